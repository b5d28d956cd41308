#include "stgeyer/inference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stgeyer/errors.hpp"

namespace stgeyer {

namespace {

void validate_irregular(const IrregularParams& irregular) {
  for (std::size_t j = 0; j < irregular.size(); ++j) {
    const auto& sh = irregular[j];
    if (!(sh.r > 0.0) || !(sh.q > 0.0) || !(sh.s >= 0.0)) {
      throw ValidationError("irregular parameters of scale " + std::to_string(j) +
                            " are invalid (need r > 0, q > 0, s >= 0)");
    }
  }
}

GlmSummary summarize(const GlmFit& fit) {
  GlmSummary s;
  s.converged = fit.converged;
  s.iterations = fit.iterations;
  s.deviance = fit.deviance;
  s.objective = fit.objective;
  s.gradient_norm = fit.gradient_norm;
  s.ridge_used = fit.ridge_used;
  s.coefficients.assign(fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
  s.std_errors.resize(static_cast<std::size_t>(fit.covariance.rows()));
  for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
    s.std_errors[static_cast<std::size_t>(i)] = std::sqrt(fit.covariance(i, i));
  }
  return s;
}

FitResult assemble_result(std::string method, const IrregularParams& irregular, const GlmFit& fit) {
  FitResult r;
  r.method = std::move(method);
  r.irregular = irregular;
  r.theta0 = fit.coefficients[0];
  r.beta_hat = std::exp(r.theta0);
  for (Eigen::Index j = 1; j < fit.coefficients.size(); ++j) {
    r.theta_hat.push_back(fit.coefficients[j]);
    r.gamma_hat.push_back(std::exp(fit.coefficients[j]));
  }
  r.glm = summarize(fit);
  return r;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& stats) {
  Eigen::MatrixXd design(stats.rows(), stats.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(stats.cols()) = stats;
  return design;
}

}  // namespace

FitResult fit_pseudo(const PointPattern& pattern, const IrregularParams& irregular,
                     const TrendFunction& trend_mu, const QuadGridSpec& grid) {
  if (pattern.empty()) throw EstimationError("pseudo-likelihood fit needs a nonempty pattern");
  validate_irregular(irregular);

  QuadratureScheme scheme = counting_weights(pattern, grid);
  const Eigen::MatrixXd stats = design_matrix(irregular, scheme, pattern);

  // Rows with zero trend contribute nothing to the integral; a data point
  // there would make the pseudo-likelihood identically zero.
  std::vector<std::size_t> keep;
  keep.reserve(scheme.size());
  for (std::size_t k = 0; k < scheme.size(); ++k) {
    const double mu = trend_mu.value(scheme.points[k]);
    if (mu > 0.0) {
      keep.push_back(k);
    } else if (scheme.is_data[k]) {
      throw EstimationError("trend vanishes at data point " + std::to_string(k));
    }
  }

  for (std::size_t k = 0; k < scheme.size(); ++k) {
    const double mu = trend_mu.value(scheme.points[k]);
    scheme.offsets[k] = mu > 0.0 ? std::log(mu) : -std::numeric_limits<double>::infinity();
  }

  const auto p = static_cast<Eigen::Index>(keep.size());
  const auto m = static_cast<Eigen::Index>(irregular.size());
  GlmProblem problem;
  problem.response.resize(p);
  problem.weights.resize(p);
  problem.offset.resize(p);
  Eigen::MatrixXd kept_stats(p, m);
  for (Eigen::Index row = 0; row < p; ++row) {
    const std::size_t k = keep[static_cast<std::size_t>(row)];
    const double w = scheme.weights[k];
    problem.response[row] = scheme.is_data[k] ? 1.0 / w : 0.0;  // y_k = z_k / w_k
    problem.weights[row] = w;
    problem.offset[row] = scheme.offsets[k];
    kept_stats.row(row) = stats.row(static_cast<Eigen::Index>(k));
  }
  problem.design = with_intercept(kept_stats);

  const GlmFit fit = fit_poisson(problem);
  if (!fit.converged) {
    throw EstimationError("pseudo-likelihood GLM did not converge: " + fit.diagnostic);
  }

  FitResult result = assemble_result("pseudo", irregular, fit);

  // Fitted approximate log pseudo-likelihood: data log-intensities minus the
  // weighted intensity sum over all quadrature points.
  const Eigen::VectorXd eta = problem.offset + problem.design * fit.coefficients;
  double log_pl = 0.0;
  for (Eigen::Index row = 0; row < p; ++row) {
    if (problem.response[row] > 0.0) log_pl += eta[row];
    log_pl -= problem.weights[row] * std::exp(eta[row]);
  }
  result.log_pseudo_likelihood = log_pl;
  return result;
}

FitResult fit_logistic_likelihood(const PointPattern& pattern, const IrregularParams& irregular,
                                  const TrendFunction& trend_mu, double rho, Rng& rng) {
  if (pattern.empty()) throw EstimationError("logistic-likelihood fit needs a nonempty pattern");
  if (!(rho > 0.0)) throw ValidationError("dummy intensity rho must be positive");
  validate_irregular(irregular);

  QuadratureScheme scheme = poisson_dummies(pattern, rho, rng);
  if (scheme.size() == scheme.n_data) {
    throw EstimationError("no dummy points were drawn; increase rho");
  }
  const Eigen::MatrixXd stats = design_matrix(irregular, scheme, pattern);

  std::vector<std::size_t> keep;
  keep.reserve(scheme.size());
  for (std::size_t k = 0; k < scheme.size(); ++k) {
    const double mu = trend_mu.value(scheme.points[k]);
    if (mu > 0.0) {
      keep.push_back(k);
    } else if (scheme.is_data[k]) {
      throw EstimationError("trend vanishes at data point " + std::to_string(k));
    }
  }

  for (std::size_t k = 0; k < scheme.size(); ++k) {
    const double mu = trend_mu.value(scheme.points[k]);
    scheme.offsets[k] = mu > 0.0 ? std::log(mu / rho) : -std::numeric_limits<double>::infinity();
  }

  const auto p = static_cast<Eigen::Index>(keep.size());
  const auto m = static_cast<Eigen::Index>(irregular.size());
  GlmProblem problem;
  problem.response.resize(p);
  problem.weights = Eigen::VectorXd::Ones(p);
  problem.offset.resize(p);
  Eigen::MatrixXd kept_stats(p, m);
  for (Eigen::Index row = 0; row < p; ++row) {
    const std::size_t k = keep[static_cast<std::size_t>(row)];
    problem.response[row] = scheme.is_data[k] ? 1.0 : 0.0;
    problem.offset[row] = scheme.offsets[k];
    kept_stats.row(row) = stats.row(static_cast<Eigen::Index>(k));
  }
  problem.design = with_intercept(kept_stats);

  const GlmFit fit = fit_logistic(problem);
  if (!fit.converged) {
    throw EstimationError("logistic-likelihood GLM did not converge: " + fit.diagnostic);
  }
  return assemble_result("logistic", irregular, fit);
}

ProfileResult profile_pseudo(const PointPattern& pattern,
                             const std::vector<IrregularParams>& candidates,
                             const TrendFunction& trend_mu, const QuadGridSpec& grid) {
  if (candidates.empty()) throw ValidationError("profile search needs at least one candidate");

  ProfileResult result;
  std::optional<FitResult> best;
  double best_value = -std::numeric_limits<double>::infinity();

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    ProfileRow row;
    row.irregular = candidates[c];
    try {
      FitResult fit = fit_pseudo(pattern, candidates[c], trend_mu, grid);
      row.log_pl = *fit.log_pseudo_likelihood;
      row.converged = true;
      if (row.log_pl > best_value) {
        best_value = row.log_pl;
        best = std::move(fit);
        result.best_index = c;
      }
    } catch (const std::exception& e) {
      row.log_pl = -std::numeric_limits<double>::infinity();
      row.note = e.what();
    }
    result.table.push_back(std::move(row));
  }

  if (!best) {
    std::string detail;
    for (std::size_t c = 0; c < result.table.size(); ++c) {
      detail += "\n  candidate " + std::to_string(c) + ": " + result.table[c].note;
    }
    throw EstimationError("no profile candidate produced a convergent fit:" + detail);
  }
  result.best_fit = std::move(*best);
  return result;
}

double gnz_residual(const GeyerModel& model, const PointPattern& pattern,
                    const GnzTestFn& h, const QuadGridSpec& grid) {
  const auto& pts = pattern.points();

  double sum_side = 0.0;
  std::vector<EventPoint> rest;
  rest.reserve(pts.size() > 0 ? pts.size() - 1 : 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rest.clear();
    for (std::size_t l = 0; l < pts.size(); ++l) {
      if (l != i) rest.push_back(pts[l]);
    }
    sum_side += h(pts[i], rest);
  }

  const QuadratureScheme scheme = counting_weights(pattern, grid);
  double integral_side = 0.0;
  for (std::size_t k = 0; k < scheme.size(); ++k) {
    const double hk = h(scheme.points[k], pts);
    if (hk == 0.0) continue;
    integral_side += scheme.weights[k] * hk * papangelou(model, pattern, scheme.points[k]);
  }
  return sum_side - integral_side;
}

}  // namespace stgeyer
