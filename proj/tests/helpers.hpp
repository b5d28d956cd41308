#pragma once

// Shared fixtures and test-side reference implementations. The oracles here
// are deliberately plain direct loops, independent of the library code paths
// they are used to check.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "stgeyer/geometry.hpp"
#include "stgeyer/model.hpp"
#include "stgeyer/rng.hpp"

namespace fixtures {

inline stgeyer::SpacetimeWindow unit_window() {
  return stgeyer::SpacetimeWindow({0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0});
}

// Two-scale benchmark models: small-scale inhibition with larger-scale
// clustering, and the reverse.
inline stgeyer::GeyerModel model1(double beta = 70.0) {
  return stgeyer::GeyerModel(
      stgeyer::TrendFunction::constant(beta),
      {{0.5, 0.1, 0.05, 1.0}, {1.5, 0.11, 0.1, 2.0}});
}

inline stgeyer::GeyerModel model2(double beta = 70.0) {
  return stgeyer::GeyerModel(
      stgeyer::TrendFunction::constant(beta),
      {{0.2, 0.1, 0.05, 1.0}, {1.2, 0.11, 0.1, 2.0}});
}

inline std::vector<stgeyer::EventPoint> uniform_points(std::size_t n, stgeyer::Rng& rng,
                                                       const stgeyer::SpacetimeWindow& w) {
  std::vector<stgeyer::EventPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({rng.uniform(w.x_range().lo, w.x_range().hi),
                   rng.uniform(w.y_range().lo, w.y_range().hi),
                   rng.uniform(w.t_range().lo, w.t_range().hi)});
  }
  return pts;
}

inline stgeyer::PointPattern uniform_pattern(std::size_t n, std::uint64_t seed,
                                             const stgeyer::SpacetimeWindow& w) {
  stgeyer::Rng rng(seed);
  return stgeyer::PointPattern(uniform_points(n, rng, w), w);
}

}  // namespace fixtures

namespace oracle {

// Brute-force pairwise cylinder count.
inline int brute_count(const std::vector<stgeyer::EventPoint>& pts, const stgeyer::EventPoint& c,
                       double r, double q, bool exclude_center) {
  int n = 0;
  for (const auto& p : pts) {
    if (exclude_center && p.x == c.x && p.y == c.y && p.t == c.t) continue;
    const double dx = p.x - c.x, dy = p.y - c.y, dt = p.t - c.t;
    if (dx * dx + dy * dy <= r * r && std::abs(dt) <= q) ++n;
  }
  return n;
}

// Direct-summation unnormalized log density: every per-point count is
// recomputed from scratch with brute_count.
inline double direct_log_density(const std::function<double(const stgeyer::EventPoint&)>& lambda,
                                 const std::vector<stgeyer::ScaleComponent>& scales,
                                 const std::vector<stgeyer::EventPoint>& pts) {
  double total = 0.0;
  for (const auto& p : pts) {
    const double lam = lambda(p);
    if (lam <= 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(lam);
    for (const auto& sc : scales) {
      const double cnt = brute_count(pts, p, sc.r, sc.q, true);
      total += std::min(sc.s, cnt) * std::log(sc.gamma);
    }
  }
  return total;
}

// Conditional intensity as a ratio of direct-summation densities.
inline double ratio_papangelou(const std::function<double(const stgeyer::EventPoint&)>& lambda,
                               const std::vector<stgeyer::ScaleComponent>& scales,
                               const std::vector<stgeyer::EventPoint>& pts,
                               const stgeyer::EventPoint& probe) {
  std::vector<stgeyer::EventPoint> reduced;
  for (const auto& p : pts) {
    if (p.x == probe.x && p.y == probe.y && p.t == probe.t) continue;
    reduced.push_back(p);
  }
  std::vector<stgeyer::EventPoint> with = reduced;
  with.push_back(probe);
  const double hi = direct_log_density(lambda, scales, with);
  const double lo = direct_log_density(lambda, scales, reduced);
  if (hi == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(hi - lo);
}

// Plain dense Newton on the exact weighted Poisson log-likelihood. No step
// control: intended for the well-conditioned problems used in tests; callers
// with extreme responses pass a start value in the concave basin.
inline Eigen::VectorXd newton_poisson(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& w, const Eigen::VectorXd& off,
                                      int iters = 200,
                                      const Eigen::VectorXd& init = Eigen::VectorXd()) {
  Eigen::VectorXd theta =
      init.size() == X.cols() ? init : Eigen::VectorXd::Zero(X.cols()).eval();
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd eta = off + X * theta;
    const Eigen::VectorXd mu = eta.array().exp();
    const Eigen::VectorXd grad = X.transpose() * (w.array() * (y - mu).array()).matrix();
    const Eigen::MatrixXd hess = X.transpose() * (w.array() * mu.array()).matrix().asDiagonal() * X;
    const Eigen::VectorXd step = hess.partialPivLu().solve(grad);
    theta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return theta;
}

inline Eigen::VectorXd newton_logistic(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& off, int iters = 200) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(X.cols());
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd eta = off + X * theta;
    const Eigen::VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const Eigen::VectorXd grad = X.transpose() * (y - mu);
    const Eigen::VectorXd v = (mu.array() * (1.0 - mu.array())).matrix();
    const Eigen::MatrixXd hess = X.transpose() * v.asDiagonal() * X;
    const Eigen::VectorXd step = hess.partialPivLu().solve(grad);
    theta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return theta;
}

// Standard error of the mean of a correlated series by batch means.
inline double batch_means_se(const std::vector<double>& samples, int n_batches = 20) {
  const std::size_t b = samples.size() / static_cast<std::size_t>(n_batches);
  std::vector<double> means;
  for (int k = 0; k < n_batches; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < b; ++i) s += samples[static_cast<std::size_t>(k) * b + i];
    means.push_back(s / static_cast<double>(b));
  }
  double grand = 0.0;
  for (double mv : means) grand += mv;
  grand /= static_cast<double>(n_batches);
  double var = 0.0;
  for (double mv : means) var += (mv - grand) * (mv - grand);
  var /= static_cast<double>(n_batches - 1);
  return std::sqrt(var / n_batches);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace oracle
