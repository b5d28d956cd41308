#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stgeyer/geometry.hpp"
#include "stgeyer/glm.hpp"
#include "stgeyer/model.hpp"
#include "stgeyer/quadrature.hpp"
#include "stgeyer/rng.hpp"

namespace stgeyer {

/// The user-chosen (or grid-searched) interaction ranges and saturations.
using IrregularParams = std::vector<ScaleShape>;

/// GLM diagnostics kept with a fit; a plain-data mirror of GlmFit that
/// serializes cleanly.
struct GlmSummary {
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  bool ridge_used = false;
  std::vector<double> coefficients;  // intercept first
  std::vector<double> std_errors;
};

struct FitResult {
  std::string method;  // "pseudo" or "logistic"
  IrregularParams irregular;
  double beta_hat = 0.0;
  double theta0 = 0.0;
  std::vector<double> theta_hat;  // log interaction coefficients
  std::vector<double> gamma_hat;  // exp(theta_hat)
  std::optional<double> log_pseudo_likelihood;  // pseudo method only
  GlmSummary glm;
};

/// Maximum pseudo-likelihood via the Berman-Turner counting-weight scheme
/// and a weighted Poisson GLM. `trend_mu` is the parameter-free covariate
/// surface (identically 1 for the homogeneous model).
FitResult fit_pseudo(const PointPattern& pattern, const IrregularParams& irregular,
                     const TrendFunction& trend_mu, const QuadGridSpec& grid);

/// Logistic likelihood: Poisson(rho) dummies, Bernoulli responses, logistic
/// GLM with offset log(mu/rho).
FitResult fit_logistic_likelihood(const PointPattern& pattern, const IrregularParams& irregular,
                                  const TrendFunction& trend_mu, double rho, Rng& rng);

struct ProfileRow {
  IrregularParams irregular;
  double log_pl = 0.0;
  bool converged = false;
  std::string note;  // failure diagnostic when not converged
};

struct ProfileResult {
  std::size_t best_index = 0;
  FitResult best_fit;
  std::vector<ProfileRow> table;
};

/// Grid search over irregular-parameter candidates: fit each by pseudo-
/// likelihood, keep the candidate with the highest fitted log PL. Ties go to
/// the earliest candidate.
ProfileResult profile_pseudo(const PointPattern& pattern,
                             const std::vector<IrregularParams>& candidates,
                             const TrendFunction& trend_mu, const QuadGridSpec& grid);

/// A bounded nonnegative test function h(point, rest-of-pattern).
using GnzTestFn = std::function<double(const EventPoint&, std::span<const EventPoint>)>;

/// Two-sided Georgii-Nguyen-Zessin discrepancy: sum of h over data points
/// (each evaluated against the pattern without itself) minus the quadrature
/// approximation of the h-weighted conditional-intensity integral. Zero in
/// expectation under the true model.
double gnz_residual(const GeyerModel& model, const PointPattern& pattern,
                    const GnzTestFn& h, const QuadGridSpec& grid);

}  // namespace stgeyer
