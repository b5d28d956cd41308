#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stgeyer {

/// Closed real interval with strictly positive length.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// An event location: planar coordinates plus an occurrence time.
struct EventPoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

inline bool same_location(const EventPoint& a, const EventPoint& b) {
  return a.x == b.x && a.y == b.y && a.t == b.t;
}

/// True when b lies in the cylinder of spatial radius r and temporal
/// half-height q centred at a. Both boundaries are inclusive.
inline bool in_cylinder(const EventPoint& a, const EventPoint& b, double r, double q) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dt = a.t - b.t;
  return dx * dx + dy * dy <= r * r && (dt <= q && -dt <= q);
}

/// Observation domain: a planar rectangle crossed with a time interval.
class SpacetimeWindow {
 public:
  SpacetimeWindow(Interval x_range, Interval y_range, Interval t_range);

  const Interval& x_range() const { return x_; }
  const Interval& y_range() const { return y_; }
  const Interval& t_range() const { return t_; }

  double volume() const { return x_.length() * y_.length() * t_.length(); }

  bool contains(const EventPoint& p) const {
    return x_.contains(p.x) && y_.contains(p.y) && t_.contains(p.t);
  }

 private:
  Interval x_, y_, t_;
};

/// Finite ordered set of events together with the window that holds them.
/// Immutable after construction; construction validates containment.
class PointPattern {
 public:
  PointPattern(std::vector<EventPoint> points, SpacetimeWindow window);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<EventPoint>& points() const { return points_; }
  const EventPoint& operator[](std::size_t i) const { return points_[i]; }
  const SpacetimeWindow& window() const { return window_; }

 private:
  std::vector<EventPoint> points_;
  SpacetimeWindow window_;
};

/// Number of events within planar distance r and time gap q of `center`.
/// With exclude_center set, entries coordinate-identical to the center are
/// not counted (the "other points" convention).
int cylinder_count(std::span<const EventPoint> points, const EventPoint& center,
                   double r, double q, bool exclude_center);

int cylinder_count(const PointPattern& pattern, const EventPoint& center,
                   double r, double q, bool exclude_center);

/// Uniform-grid acceleration structure for repeated cylinder counts.
///
/// Cells are at least (r_max, r_max, q_max) on a side, so any query with
/// r <= r_max and q <= q_max only needs the 3x3x3 block of cells around the
/// center. Query results are exactly those of cylinder_count.
///
/// Holds a view into the pattern's point storage; the pattern must outlive
/// the index.
class NeighborIndex {
 public:
  NeighborIndex(const PointPattern& pattern, double r_max, double q_max);

  int count(const EventPoint& center, double r, double q, bool exclude_center) const;

  /// Count restricted to entries whose mask byte is nonzero.
  int count_masked(const EventPoint& center, double r, double q, bool exclude_center,
                   std::span<const std::uint8_t> active) const;

  /// Indices of entries inside the cylinder, excluding entries
  /// coordinate-identical to the center. Appends to `out`.
  void gather(const EventPoint& center, double r, double q, std::vector<int>& out) const;

  double r_max() const { return r_max_; }
  double q_max() const { return q_max_; }

 private:
  template <typename Accept>
  void visit(const EventPoint& center, double r, double q, Accept&& accept) const;

  void cell_of(const EventPoint& p, int& ix, int& iy, int& it) const;

  std::span<const EventPoint> points_;
  double r_max_, q_max_;
  double x0_, y0_, t0_;
  double inv_cx_, inv_cy_, inv_ct_;
  int nx_, ny_, nt_;
  std::vector<int> cell_start_;  // CSR offsets, size nx*ny*nt + 1
  std::vector<int> ids_;         // point indices grouped by cell
};

}  // namespace stgeyer
