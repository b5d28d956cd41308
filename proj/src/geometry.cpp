#include "stgeyer/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stgeyer {

namespace {

void check_radii(double r, double q) {
  if (!(r > 0.0)) throw std::invalid_argument("cylinder radius r must be positive");
  if (!(q > 0.0)) throw std::invalid_argument("cylinder half-height q must be positive");
}

}  // namespace

SpacetimeWindow::SpacetimeWindow(Interval x_range, Interval y_range, Interval t_range)
    : x_(x_range), y_(y_range), t_(t_range) {
  for (const auto* iv : {&x_, &y_, &t_}) {
    if (!std::isfinite(iv->lo) || !std::isfinite(iv->hi) || !(iv->length() > 0.0)) {
      throw std::invalid_argument("window interval must be finite with positive length");
    }
  }
}

PointPattern::PointPattern(std::vector<EventPoint> points, SpacetimeWindow window)
    : points_(std::move(points)), window_(window) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.t)) {
      throw std::invalid_argument("pattern point " + std::to_string(i) + " has non-finite coordinates");
    }
    if (!window_.contains(p)) {
      throw std::invalid_argument("pattern point " + std::to_string(i) + " lies outside the window");
    }
  }
}

int cylinder_count(std::span<const EventPoint> points, const EventPoint& center,
                   double r, double q, bool exclude_center) {
  check_radii(r, q);
  int n = 0;
  for (const auto& p : points) {
    if (exclude_center && same_location(p, center)) continue;
    if (in_cylinder(center, p, r, q)) ++n;
  }
  return n;
}

int cylinder_count(const PointPattern& pattern, const EventPoint& center,
                   double r, double q, bool exclude_center) {
  return cylinder_count(std::span<const EventPoint>(pattern.points()), center, r, q, exclude_center);
}

NeighborIndex::NeighborIndex(const PointPattern& pattern, double r_max, double q_max)
    : points_(pattern.points()), r_max_(r_max), q_max_(q_max) {
  check_radii(r_max, q_max);
  const auto& w = pattern.window();
  x0_ = w.x_range().lo;
  y0_ = w.y_range().lo;
  t0_ = w.t_range().lo;

  // Cell edge >= query radius, so a 3x3x3 block covers any cylinder.
  auto n_cells = [](double len, double min_edge) {
    return std::max(1, static_cast<int>(std::floor(len / min_edge)));
  };
  nx_ = n_cells(w.x_range().length(), r_max);
  ny_ = n_cells(w.y_range().length(), r_max);
  nt_ = n_cells(w.t_range().length(), q_max);
  inv_cx_ = nx_ / w.x_range().length();
  inv_cy_ = ny_ / w.y_range().length();
  inv_ct_ = nt_ / w.t_range().length();

  const int total = nx_ * ny_ * nt_;
  cell_start_.assign(total + 1, 0);
  std::vector<int> cell(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    int ix, iy, it;
    cell_of(points_[i], ix, iy, it);
    cell[i] = (it * ny_ + iy) * nx_ + ix;
    ++cell_start_[cell[i] + 1];
  }
  for (int c = 0; c < total; ++c) cell_start_[c + 1] += cell_start_[c];
  ids_.resize(points_.size());
  std::vector<int> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) ids_[cursor[cell[i]]++] = static_cast<int>(i);
}

void NeighborIndex::cell_of(const EventPoint& p, int& ix, int& iy, int& it) const {
  ix = std::clamp(static_cast<int>((p.x - x0_) * inv_cx_), 0, nx_ - 1);
  iy = std::clamp(static_cast<int>((p.y - y0_) * inv_cy_), 0, ny_ - 1);
  it = std::clamp(static_cast<int>((p.t - t0_) * inv_ct_), 0, nt_ - 1);
}

template <typename Accept>
void NeighborIndex::visit(const EventPoint& center, double r, double q, Accept&& accept) const {
  check_radii(r, q);
  if (r > r_max_ || q > q_max_) {
    throw std::invalid_argument("NeighborIndex query radius exceeds the build-time maximum");
  }
  int cx, cy, ct;
  cell_of(center, cx, cy, ct);
  const int x_lo = std::max(cx - 1, 0), x_hi = std::min(cx + 1, nx_ - 1);
  const int y_lo = std::max(cy - 1, 0), y_hi = std::min(cy + 1, ny_ - 1);
  const int t_lo = std::max(ct - 1, 0), t_hi = std::min(ct + 1, nt_ - 1);
  for (int it = t_lo; it <= t_hi; ++it) {
    for (int iy = y_lo; iy <= y_hi; ++iy) {
      for (int ix = x_lo; ix <= x_hi; ++ix) {
        const int c = (it * ny_ + iy) * nx_ + ix;
        for (int k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
          const int id = ids_[k];
          const auto& p = points_[id];
          if (in_cylinder(center, p, r, q)) accept(id, p);
        }
      }
    }
  }
}

int NeighborIndex::count(const EventPoint& center, double r, double q, bool exclude_center) const {
  int n = 0;
  visit(center, r, q, [&](int, const EventPoint& p) {
    if (exclude_center && same_location(p, center)) return;
    ++n;
  });
  return n;
}

int NeighborIndex::count_masked(const EventPoint& center, double r, double q, bool exclude_center,
                                std::span<const std::uint8_t> active) const {
  if (active.size() != points_.size()) {
    throw std::invalid_argument("mask size does not match the indexed pattern");
  }
  int n = 0;
  visit(center, r, q, [&](int id, const EventPoint& p) {
    if (!active[id]) return;
    if (exclude_center && same_location(p, center)) return;
    ++n;
  });
  return n;
}

void NeighborIndex::gather(const EventPoint& center, double r, double q, std::vector<int>& out) const {
  visit(center, r, q, [&](int id, const EventPoint& p) {
    if (same_location(p, center)) return;
    out.push_back(id);
  });
}

}  // namespace stgeyer
