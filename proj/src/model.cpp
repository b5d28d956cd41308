#include "stgeyer/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stgeyer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxScales = 64;  // bitmask-backed scale sets

double capped(double s, double count) { return std::min(s, count); }

void validate_scale(const ScaleShape& sh, std::size_t j) {
  if (!(sh.r > 0.0) || !std::isfinite(sh.r))
    throw std::invalid_argument("scale " + std::to_string(j) + ": r must be positive");
  if (!(sh.q > 0.0) || !std::isfinite(sh.q))
    throw std::invalid_argument("scale " + std::to_string(j) + ": q must be positive");
  if (!(sh.s >= 0.0) || !std::isfinite(sh.s))
    throw std::invalid_argument("scale " + std::to_string(j) + ": s must be nonnegative");
}

}  // namespace

std::vector<ScaleShape> shape_of(std::span<const ScaleComponent> scales) {
  std::vector<ScaleShape> out;
  out.reserve(scales.size());
  for (const auto& c : scales) out.push_back(shape_of(c));
  return out;
}

TrendFunction TrendFunction::constant(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("trend beta must be positive and finite");
  }
  TrendFunction f;
  f.beta_ = beta;
  return f;
}

TrendFunction TrendFunction::grid(double beta, const SpacetimeWindow& window,
                                  std::array<int, 3> dims, std::vector<double> mu_values) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("trend beta must be positive and finite");
  }
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
    throw std::invalid_argument("trend raster dimensions must be positive");
  }
  const std::size_t expected =
      static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
  if (mu_values.size() != expected) {
    throw std::invalid_argument("trend raster size does not match its dimensions");
  }
  for (double v : mu_values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("trend raster values must be finite and nonnegative");
    }
  }
  TrendFunction f;
  f.beta_ = beta;
  f.dims_ = dims;
  f.mu_values_ = std::move(mu_values);
  f.x0_ = window.x_range().lo;
  f.y0_ = window.y_range().lo;
  f.t0_ = window.t_range().lo;
  f.inv_cx_ = dims[0] / window.x_range().length();
  f.inv_cy_ = dims[1] / window.y_range().length();
  f.inv_ct_ = dims[2] / window.t_range().length();
  return f;
}

double TrendFunction::mu(const EventPoint& p) const {
  if (mu_values_.empty()) return 1.0;
  const int ix = std::clamp(static_cast<int>((p.x - x0_) * inv_cx_), 0, dims_[0] - 1);
  const int iy = std::clamp(static_cast<int>((p.y - y0_) * inv_cy_), 0, dims_[1] - 1);
  const int it = std::clamp(static_cast<int>((p.t - t0_) * inv_ct_), 0, dims_[2] - 1);
  return mu_values_[(static_cast<std::size_t>(it) * dims_[1] + iy) * dims_[0] + ix];
}

double TrendFunction::max_value() const {
  if (mu_values_.empty()) return beta_;
  return beta_ * *std::max_element(mu_values_.begin(), mu_values_.end());
}

TrendFunction TrendFunction::unit_mu() const {
  TrendFunction f = *this;
  f.beta_ = 1.0;
  return f;
}

GeyerModel::GeyerModel(TrendFunction trend, std::vector<ScaleComponent> scales)
    : trend_(std::move(trend)), scales_(std::move(scales)) {
  if (scales_.empty()) throw std::invalid_argument("model needs at least one scale");
  if (scales_.size() > kMaxScales) throw std::invalid_argument("too many scales");
  for (std::size_t j = 0; j < scales_.size(); ++j) {
    const auto& c = scales_[j];
    if (!(c.gamma > 0.0) || !std::isfinite(c.gamma)) {
      throw std::invalid_argument("scale " + std::to_string(j) + ": gamma must be positive");
    }
    validate_scale(shape_of(c), j);
    max_r_ = std::max(max_r_, c.r);
    max_q_ = std::max(max_q_, c.q);
  }
}

double log_density_unnormalized(const GeyerModel& model, const PointPattern& pattern) {
  const auto& pts = pattern.points();
  const auto& scales = model.scales();
  const std::size_t n = pts.size();
  const std::size_t m = scales.size();

  // Pairwise pass accumulating each point's per-scale neighbor count.
  // Coordinate-identical pairs are skipped: counts are of *other* points.
  std::vector<double> counts(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = i + 1; l < n; ++l) {
      if (same_location(pts[i], pts[l])) continue;
      const double dx = pts[i].x - pts[l].x;
      const double dy = pts[i].y - pts[l].y;
      const double dt = pts[i].t - pts[l].t;
      const double d2 = dx * dx + dy * dy;
      const double at = std::abs(dt);
      for (std::size_t j = 0; j < m; ++j) {
        if (d2 <= scales[j].r * scales[j].r && at <= scales[j].q) {
          counts[i * m + j] += 1.0;
          counts[l * m + j] += 1.0;
        }
      }
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = model.trend().value(pts[i]);
    if (lambda <= 0.0) return kNegInf;
    total += std::log(lambda);
    for (std::size_t j = 0; j < m; ++j) {
      total += capped(scales[j].s, counts[i * m + j]) * std::log(scales[j].gamma);
    }
  }
  return total;
}

void sufficient_statistics(std::span<const ScaleShape> shapes,
                           std::span<const EventPoint> points,
                           const EventPoint& probe, std::span<double> out) {
  const std::size_t m = shapes.size();
  if (out.size() != m) throw std::invalid_argument("output span size must equal the number of scales");
  if (m > kMaxScales) throw std::invalid_argument("too many scales");
  for (std::size_t j = 0; j < m; ++j) validate_scale(shapes[j], j);

  double r2[kMaxScales], probe_count[kMaxScales];
  for (std::size_t j = 0; j < m; ++j) {
    r2[j] = shapes[j].r * shapes[j].r;
    probe_count[j] = 0.0;
  }

  // Base state: the pattern with any entry coordinate-identical to the probe
  // removed. Pass 1 finds the probe's neighbors per scale in that state.
  thread_local std::vector<int> nbr_idx;
  thread_local std::vector<std::uint64_t> nbr_mask;
  nbr_idx.clear();
  nbr_mask.clear();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (same_location(p, probe)) continue;
    const double dx = p.x - probe.x;
    const double dy = p.y - probe.y;
    const double d2 = dx * dx + dy * dy;
    const double at = std::abs(p.t - probe.t);
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (d2 <= r2[j] && at <= shapes[j].q) {
        mask |= std::uint64_t{1} << j;
        probe_count[j] += 1.0;
      }
    }
    if (mask) {
      nbr_idx.push_back(static_cast<int>(i));
      nbr_mask.push_back(mask);
    }
  }
  for (std::size_t j = 0; j < m; ++j) out[j] = capped(shapes[j].s, probe_count[j]);

  // Pass 2: adding the probe raises each neighbor's count by one; accumulate
  // the change in that neighbor's capped count.
  for (std::size_t k = 0; k < nbr_idx.size(); ++k) {
    const EventPoint c = points[static_cast<std::size_t>(nbr_idx[k])];
    double cnt[kMaxScales];
    for (std::size_t j = 0; j < m; ++j) cnt[j] = 0.0;
    for (const auto& p : points) {
      if (same_location(p, c) || same_location(p, probe)) continue;
      const double dx = p.x - c.x;
      const double dy = p.y - c.y;
      const double d2 = dx * dx + dy * dy;
      const double at = std::abs(p.t - c.t);
      for (std::size_t j = 0; j < m; ++j) {
        if (d2 <= r2[j] && at <= shapes[j].q) cnt[j] += 1.0;
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (nbr_mask[k] & (std::uint64_t{1} << j)) {
        out[j] += capped(shapes[j].s, cnt[j] + 1.0) - capped(shapes[j].s, cnt[j]);
      }
    }
  }
}

std::vector<double> sufficient_statistics(const GeyerModel& model,
                                          const PointPattern& pattern,
                                          const EventPoint& probe) {
  if (!pattern.window().contains(probe)) {
    throw std::domain_error("probe point lies outside the pattern window");
  }
  const auto shapes = model.shapes();
  std::vector<double> out(shapes.size());
  sufficient_statistics(shapes, pattern.points(), probe, out);
  return out;
}

double log_papangelou(const GeyerModel& model, std::span<const EventPoint> points,
                      const EventPoint& probe) {
  const double lambda = model.trend().value(probe);
  if (lambda <= 0.0) return kNegInf;

  thread_local std::vector<ScaleShape> shapes;
  thread_local std::vector<double> stats;
  shapes.clear();
  for (const auto& c : model.scales()) shapes.push_back(shape_of(c));
  stats.assign(shapes.size(), 0.0);
  sufficient_statistics(shapes, points, probe, stats);

  double log_lam = std::log(lambda);
  for (std::size_t j = 0; j < shapes.size(); ++j) {
    log_lam += stats[j] * std::log(model.scales()[j].gamma);
  }
  return log_lam;
}

double papangelou(const GeyerModel& model, const PointPattern& pattern, const EventPoint& probe) {
  if (!pattern.window().contains(probe)) {
    throw std::domain_error("probe point lies outside the pattern window");
  }
  const double lp = log_papangelou(model, pattern.points(), probe);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

double strauss_papangelou(double lambda, double gamma, double r, double q,
                          const PointPattern& pattern, const EventPoint& probe) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("strauss: lambda must be positive");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("strauss: gamma must lie in (0, 1]");
  }
  const int t = cylinder_count(pattern, probe, r, q, /*exclude_center=*/true);
  return lambda * std::pow(gamma, static_cast<double>(t));
}

}  // namespace stgeyer
