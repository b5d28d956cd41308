#include "stgeyer/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stgeyer {

namespace {

constexpr double kCoefLimit = 50.0;  // beyond this the fit is treated as diverging
constexpr double kInitEps = 1e-10;
constexpr int kMaxHalvings = 30;

enum class Family { poisson, logistic };

double log1pexp(double x) {
  // Stable log(1 + e^x).
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

struct Objective {
  Family family;
  const GlmProblem& p;

  double value(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd eta = p.offset + p.design * theta;
    double total = 0.0;
    if (family == Family::poisson) {
      for (Eigen::Index k = 0; k < eta.size(); ++k) {
        const double e = eta[k];
        const double ye = p.response[k] == 0.0 ? 0.0 : p.response[k] * e;
        total += p.weights[k] * (ye - std::exp(e));
      }
    } else {
      for (Eigen::Index k = 0; k < eta.size(); ++k) {
        total += p.response[k] * eta[k] - log1pexp(eta[k]);
      }
    }
    return total;
  }

  // Score and the negative-Hessian curvature weights at theta.
  void score_curvature(const Eigen::VectorXd& theta, Eigen::VectorXd& score,
                       Eigen::VectorXd& curvature) const {
    const Eigen::VectorXd eta = p.offset + p.design * theta;
    const Eigen::Index n = eta.size();
    Eigen::VectorXd resid(n);
    curvature.resize(n);
    if (family == Family::poisson) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double mu = std::exp(eta[k]);
        resid[k] = p.weights[k] * (p.response[k] - mu);
        curvature[k] = p.weights[k] * mu;
      }
    } else {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double mu = 1.0 / (1.0 + std::exp(-eta[k]));
        resid[k] = p.response[k] - mu;
        curvature[k] = mu * (1.0 - mu);
      }
    }
    score = p.design.transpose() * resid;
  }

  double deviance(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd eta = p.offset + p.design * theta;
    double dev = 0.0;
    if (family == Family::poisson) {
      for (Eigen::Index k = 0; k < eta.size(); ++k) {
        const double mu = std::exp(eta[k]);
        const double y = p.response[k];
        const double term = y > 0.0 ? y * std::log(y / mu) - (y - mu) : mu;
        dev += 2.0 * p.weights[k] * term;
      }
    } else {
      for (Eigen::Index k = 0; k < eta.size(); ++k) {
        const double y = p.response[k];
        dev += 2.0 * (log1pexp(eta[k]) - y * eta[k]);
      }
    }
    return dev;
  }
};

void validate(const GlmProblem& p, Family family) {
  const Eigen::Index n = p.design.rows();
  if (p.response.size() != n || p.weights.size() != n || p.offset.size() != n) {
    throw std::invalid_argument("glm: response, weights, offset and design sizes disagree");
  }
  if (n == 0) throw std::invalid_argument("glm: empty problem");
  if (!p.response.allFinite() || !p.weights.allFinite() || !p.offset.allFinite() ||
      !p.design.allFinite()) {
    throw std::invalid_argument("glm: non-finite entries in the problem");
  }
  if ((p.weights.array() <= 0.0).any()) {
    throw std::invalid_argument("glm: weights must be positive");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double y = p.response[k];
    if (family == Family::poisson && y < 0.0) {
      throw std::invalid_argument("glm: poisson responses must be nonnegative");
    }
    if (family == Family::logistic && y != 0.0 && y != 1.0) {
      throw std::invalid_argument("glm: logistic responses must be 0 or 1");
    }
    if (family == Family::logistic && p.weights[k] != 1.0) {
      throw std::invalid_argument("glm: logistic fits take unit weights");
    }
  }

  // Rank check up front so collinear designs fail with a named column
  // instead of a numerically unstable fit.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p.design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p.design.cols()) {
    const auto perm = qr.colsPermutation().indices();
    const Eigen::Index offender = perm[qr.rank()];
    throw std::invalid_argument("glm: design column " + std::to_string(offender) +
                                " is collinear with the preceding columns");
  }
}

GlmFit fit_impl(const GlmProblem& p, Family family, double tol, int max_iter) {
  validate(p, family);
  if (!(tol > 0.0)) throw std::invalid_argument("glm: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("glm: max_iter must be positive");

  const Eigen::Index dim = p.design.cols();
  const Objective obj{family, p};

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  if (family == Family::poisson) {
    const double mean_y = p.weights.dot(p.response) / p.weights.sum();
    theta[0] = std::log(mean_y + kInitEps);
  } else {
    const double mean_y = std::clamp(p.response.mean(), kInitEps, 1.0 - kInitEps);
    theta[0] = std::log(mean_y / (1.0 - mean_y));
  }

  GlmFit fit;
  double value = obj.value(theta);
  double last_delta = std::numeric_limits<double>::infinity();
  Eigen::VectorXd score, curvature;

  for (int iter = 1; iter <= max_iter; ++iter) {
    fit.iterations = iter;
    obj.score_curvature(theta, score, curvature);
    const double scale = 1.0 + std::abs(value);
    if (score.cwiseAbs().maxCoeff() < tol * scale && last_delta < tol * scale) {
      fit.converged = true;
      break;
    }

    Eigen::MatrixXd info = p.design.transpose() * curvature.asDiagonal() * p.design;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      info.diagonal().array() += 1e-10 * info.trace();
      llt.compute(info);
      fit.ridge_used = true;
      if (llt.info() != Eigen::Success) {
        fit.diagnostic = "information matrix not positive definite even with ridge";
        break;
      }
    }
    const Eigen::VectorXd direction = llt.solve(score);

    // Step halving on the objective. Near the optimum the improvement sits
    // below evaluation round-off, so tiny decreases are accepted too.
    const double slack = 1e-11 * scale;
    double step = 1.0;
    Eigen::VectorXd candidate;
    double cand_value = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      candidate = theta + step * direction;
      cand_value = obj.value(candidate);
      if (std::isfinite(cand_value) && cand_value >= value - slack) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      fit.diagnostic = "line search stalled";
      break;
    }

    last_delta = std::abs(cand_value - value);
    theta = candidate;
    value = cand_value;

    if (theta.cwiseAbs().maxCoeff() > kCoefLimit) {
      fit.diagnostic = "coefficients diverged (possible separation)";
      break;
    }
    if (iter == max_iter) fit.diagnostic = "iteration limit reached";
  }

  obj.score_curvature(theta, score, curvature);
  if (fit.converged && family == Family::logistic) {
    // A concave logistic fit that classifies every row with near certainty
    // has no interior maximum: the optimizer merely stopped along a ray.
    const Eigen::VectorXd eta = p.offset + p.design * theta;
    double max_gap = 0.0;
    for (Eigen::Index k = 0; k < eta.size(); ++k) {
      const double mu = 1.0 / (1.0 + std::exp(-eta[k]));
      max_gap = std::max(max_gap, std::abs(p.response[k] - mu));
    }
    if (max_gap < 1e-6) {
      fit.converged = false;
      fit.diagnostic = "responses are completely separated; maximum does not exist";
    }
  }
  fit.coefficients = theta;
  fit.objective = value;
  fit.gradient_norm = score.cwiseAbs().maxCoeff();
  fit.deviance = obj.deviance(theta);

  Eigen::MatrixXd info = p.design.transpose() * curvature.asDiagonal() * p.design;
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() == Eigen::Success) {
    fit.covariance = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  } else {
    fit.covariance = Eigen::MatrixXd::Constant(dim, dim, std::numeric_limits<double>::quiet_NaN());
  }
  return fit;
}

}  // namespace

GlmFit fit_poisson(const GlmProblem& problem, double tol, int max_iter) {
  return fit_impl(problem, Family::poisson, tol, max_iter);
}

GlmFit fit_logistic(const GlmProblem& problem, double tol, int max_iter) {
  return fit_impl(problem, Family::logistic, tol, max_iter);
}

}  // namespace stgeyer
