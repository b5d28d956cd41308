#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stgeyer/inference.hpp"
#include "stgeyer/model.hpp"
#include "stgeyer/simulate.hpp"

namespace stgeyer {

/// A simulate-then-fit Monte Carlo comparison of the estimation methods.
struct StudyConfig {
  StudyConfig(GeyerModel truth_model, SpacetimeWindow win)
      : truth(std::move(truth_model)), window(win) {}

  GeyerModel truth;
  SpacetimeWindow window;
  int n_replicates = 100;
  McmcConfig mcmc{};  // per-replicate seeds are derived from master_seed
  bool run_pseudo = true;
  bool run_logistic = true;
  std::uint64_t master_seed = 0;
  QuadGridSpec quad{};     // used when quad_auto is false
  bool quad_auto = true;   // grid resolution chosen per replicate from n
  double rho = 0.0;        // dummy intensity; <= 0 means 4 n / |W|
};

struct MethodEstimate {
  double beta_hat = 0.0;
  std::vector<double> gamma_hat;
};

struct ReplicateRecord {
  int replicate = 0;
  int n_points = 0;
  std::optional<MethodEstimate> pseudo;
  std::optional<MethodEstimate> logistic;
  std::string pseudo_error;
  std::string logistic_error;
};

struct MethodRmse {
  std::string method;
  std::vector<double> rmse;  // aligned with StudyReport::param_names
  int n_converged = 0;
  int n_failed = 0;
};

struct StudyReport {
  std::uint64_t master_seed = 0;
  int n_replicates = 0;
  std::vector<std::string> methods;
  std::vector<std::string> param_names;  // "beta", "gamma_1", ...
  std::vector<double> truth_values;
  std::vector<ReplicateRecord> rows;
  std::vector<MethodRmse> rmse;
  bool non_comparable = false;  // set when any method lost > 20% of replicates
};

/// Simulate n_replicates chains from the truth model, fit each with the
/// requested methods, and aggregate per-parameter RMSEs. Failed fits are
/// logged and excluded from the aggregates. Results are identical whether
/// replicates run sequentially or on worker threads.
StudyReport run_study(const StudyConfig& config, int n_threads = 1);

/// Per-method root-mean-squared errors over the converged rows of a report.
std::vector<MethodRmse> aggregate_rmse(const StudyReport& report);

/// Plain-text RMSE table with the per-parameter minimum flagged.
std::string rmse_table_text(const StudyReport& report);

}  // namespace stgeyer
