#pragma once

#include <array>
#include <span>
#include <vector>

#include "stgeyer/geometry.hpp"

namespace stgeyer {

/// One interaction scale: strength gamma acting over the cylinder (r, q),
/// with each point's neighbor count capped at saturation s.
struct ScaleComponent {
  double gamma = 1.0;
  double r = 0.1;
  double q = 0.1;
  double s = 1.0;
};

/// The irregular part of a scale (no interaction strength). What a fitter
/// needs to build sufficient statistics.
struct ScaleShape {
  double r = 0.1;
  double q = 0.1;
  double s = 1.0;
};

inline ScaleShape shape_of(const ScaleComponent& c) { return {c.r, c.q, c.s}; }
std::vector<ScaleShape> shape_of(std::span<const ScaleComponent> scales);

/// First-order trend lambda(x,t) = beta * mu(x,t). mu is either identically 1
/// or a piecewise-constant raster over window cells (nearest-cell lookup).
class TrendFunction {
 public:
  static TrendFunction constant(double beta);
  static TrendFunction grid(double beta, const SpacetimeWindow& window,
                            std::array<int, 3> dims, std::vector<double> mu_values);

  /// lambda(p) = beta * mu(p).
  double value(const EventPoint& p) const { return beta_ * mu(p); }
  double mu(const EventPoint& p) const;
  double beta() const { return beta_; }
  bool constant_mu() const { return mu_values_.empty(); }
  double max_value() const;

  /// Same mu surface with beta replaced by 1; the parameter-free covariate
  /// part handed to fitters.
  TrendFunction unit_mu() const;

 private:
  TrendFunction() = default;

  double beta_ = 1.0;
  // Raster state; empty mu_values_ means mu == 1 everywhere.
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<double> mu_values_;
  double x0_ = 0, y0_ = 0, t0_ = 0;
  double inv_cx_ = 0, inv_cy_ = 0, inv_ct_ = 0;
};

/// Multi-scale spatio-temporal Geyer saturation model.
class GeyerModel {
 public:
  GeyerModel(TrendFunction trend, std::vector<ScaleComponent> scales);

  const TrendFunction& trend() const { return trend_; }
  const std::vector<ScaleComponent>& scales() const { return scales_; }
  std::size_t n_scales() const { return scales_.size(); }
  double max_r() const { return max_r_; }
  double max_q() const { return max_q_; }
  std::vector<ScaleShape> shapes() const { return shape_of(scales_); }

 private:
  TrendFunction trend_;
  std::vector<ScaleComponent> scales_;
  double max_r_ = 0, max_q_ = 0;
};

/// Log of the unnormalized density: for each event, log lambda plus the
/// saturated neighbor counts weighted by log gamma per scale. Empty pattern
/// gives 0. A pattern event with zero trend gives -infinity (the hereditary
/// zero, distinct from an error).
double log_density_unnormalized(const GeyerModel& model, const PointPattern& pattern);

/// Saturation statistic vector S(probe, pattern), one entry per scale:
/// the probe's own capped neighbor count plus the change the probe induces
/// in the capped counts of its neighbors. For a probe coordinate-identical
/// to a pattern entry this evaluates the data-point form (pattern with the
/// probe removed as the base state).
void sufficient_statistics(std::span<const ScaleShape> shapes,
                           std::span<const EventPoint> points,
                           const EventPoint& probe, std::span<double> out);

std::vector<double> sufficient_statistics(const GeyerModel& model,
                                          const PointPattern& pattern,
                                          const EventPoint& probe);

/// log of the conditional intensity at `probe` given `points`;
/// -infinity when the trend vanishes at the probe.
double log_papangelou(const GeyerModel& model, std::span<const EventPoint> points,
                      const EventPoint& probe);

/// Conditional intensity lambda(probe | pattern). Equals the ratio of
/// unnormalized densities with and without the probe; zero when the trend
/// vanishes (0/0 := 0 convention). Throws std::domain_error if the probe is
/// outside the pattern's window.
double papangelou(const GeyerModel& model, const PointPattern& pattern, const EventPoint& probe);

/// Baseline spatio-temporal Strauss conditional intensity
/// lambda * gamma^(cylinder count). Requires gamma in (0, 1].
double strauss_papangelou(double lambda, double gamma, double r, double q,
                          const PointPattern& pattern, const EventPoint& probe);

}  // namespace stgeyer
