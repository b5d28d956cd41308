#pragma once

#include <Eigen/Dense>
#include <string>

namespace stgeyer {

/// A weighted GLM instance. The design matrix carries a leading intercept
/// column; `offset` enters the linear predictor additively with a fixed
/// unit coefficient.
struct GlmProblem {
  Eigen::VectorXd response;
  Eigen::MatrixXd design;
  Eigen::VectorXd weights;
  Eigen::VectorXd offset;
};

struct GlmFit {
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;
  double objective = 0.0;      // maximized log-likelihood (up to constants)
  double gradient_norm = 0.0;  // max-norm of the score at exit
  Eigen::MatrixXd covariance;  // inverse observed information at the optimum
  bool ridge_used = false;
  std::string diagnostic;      // empty on a clean converged fit
};

/// Weighted Poisson log-linear regression by Newton/IRLS with step halving.
/// Maximizes sum_k w_k (y_k eta_k - exp(eta_k)).
GlmFit fit_poisson(const GlmProblem& problem, double tol = 1e-8, int max_iter = 100);

/// Bernoulli logistic regression, same machinery on the concave
/// sum_k (y_k eta_k - log(1 + exp(eta_k))). Responses must be 0 or 1.
GlmFit fit_logistic(const GlmProblem& problem, double tol = 1e-8, int max_iter = 100);

}  // namespace stgeyer
