#include "stgeyer/study.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stgeyer/errors.hpp"
#include "stgeyer/format.hpp"
#include "stgeyer/rng.hpp"

namespace stgeyer {

namespace {

void run_replicate(const StudyConfig& config, int i, ReplicateRecord& rec) {
  rec.replicate = i;
  const auto stream = static_cast<std::uint64_t>(i);

  McmcConfig mc = config.mcmc;
  mc.seed = derive_seed(config.master_seed, 2 * stream);
  const McmcTrace trace = run_chain(config.truth, config.window, mc);
  const PointPattern& pattern = trace.final_pattern;
  rec.n_points = static_cast<int>(pattern.size());

  const IrregularParams shapes = config.truth.shapes();
  const TrendFunction mu = config.truth.trend().unit_mu();

  if (config.run_pseudo) {
    try {
      const QuadGridSpec grid =
          config.quad_auto ? QuadGridSpec::default_for(pattern.size()) : config.quad;
      const FitResult fit = fit_pseudo(pattern, shapes, mu, grid);
      rec.pseudo = MethodEstimate{fit.beta_hat, fit.gamma_hat};
    } catch (const std::exception& e) {
      rec.pseudo_error = e.what();
    }
  }
  if (config.run_logistic) {
    try {
      const double rho = config.rho > 0.0
                             ? config.rho
                             : 4.0 * static_cast<double>(pattern.size()) / config.window.volume();
      Rng dummy_rng(derive_seed(config.master_seed, 2 * stream + 1));
      const FitResult fit = fit_logistic_likelihood(pattern, shapes, mu, rho, dummy_rng);
      rec.logistic = MethodEstimate{fit.beta_hat, fit.gamma_hat};
    } catch (const std::exception& e) {
      rec.logistic_error = e.what();
    }
  }
}

MethodRmse aggregate_one(const std::string& method, const StudyReport& report) {
  MethodRmse out;
  out.method = method;
  const std::size_t n_params = report.truth_values.size();
  std::vector<double> sq(n_params, 0.0);
  for (const auto& rec : report.rows) {
    const auto& est = method == "pseudo" ? rec.pseudo : rec.logistic;
    if (!est) {
      ++out.n_failed;
      continue;
    }
    ++out.n_converged;
    sq[0] += (est->beta_hat - report.truth_values[0]) * (est->beta_hat - report.truth_values[0]);
    for (std::size_t j = 0; j + 1 < n_params; ++j) {
      const double d = est->gamma_hat[j] - report.truth_values[j + 1];
      sq[j + 1] += d * d;
    }
  }
  out.rmse.resize(n_params, std::numeric_limits<double>::quiet_NaN());
  if (out.n_converged > 0) {
    for (std::size_t j = 0; j < n_params; ++j) out.rmse[j] = std::sqrt(sq[j] / out.n_converged);
  }
  return out;
}

}  // namespace

std::vector<MethodRmse> aggregate_rmse(const StudyReport& report) {
  std::vector<MethodRmse> out;
  out.reserve(report.methods.size());
  for (const auto& method : report.methods) out.push_back(aggregate_one(method, report));
  return out;
}

StudyReport run_study(const StudyConfig& config, int n_threads) {
  if (config.n_replicates < 1) throw ValidationError("study needs at least one replicate");
  if (!config.run_pseudo && !config.run_logistic) {
    throw ValidationError("study needs at least one estimation method");
  }

  StudyReport report;
  report.master_seed = config.master_seed;
  report.n_replicates = config.n_replicates;
  if (config.run_pseudo) report.methods.push_back("pseudo");
  if (config.run_logistic) report.methods.push_back("logistic");
  report.param_names.push_back("beta");
  report.truth_values.push_back(config.truth.trend().beta());
  for (std::size_t j = 0; j < config.truth.n_scales(); ++j) {
    report.param_names.push_back("gamma_" + std::to_string(j + 1));
    report.truth_values.push_back(config.truth.scales()[j].gamma);
  }

  report.rows.resize(static_cast<std::size_t>(config.n_replicates));
  if (n_threads <= 1) {
    for (int i = 0; i < config.n_replicates; ++i) {
      run_replicate(config, i, report.rows[static_cast<std::size_t>(i)]);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= config.n_replicates) return;
        run_replicate(config, i, report.rows[static_cast<std::size_t>(i)]);
      }
    };
    std::vector<std::thread> pool;
    const int k = std::min(n_threads, config.n_replicates);
    pool.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.rmse = aggregate_rmse(report);
  for (const auto& mr : report.rmse) {
    if (mr.n_failed > 0.2 * config.n_replicates) report.non_comparable = true;
  }
  return report;
}

std::string rmse_table_text(const StudyReport& report) {
  if (report.rows.empty()) throw ValidationError("empty study report");
  for (const auto& mr : report.rmse) {
    if (mr.n_converged == 0) {
      throw ValidationError("method '" + mr.method + "' has no converged replicates");
    }
  }

  // Column minima only get flagged when there is something to compare.
  const bool compare = report.rmse.size() > 1;
  std::ostringstream os;
  os << "method";
  for (const auto& name : report.param_names) os << '\t' << name;
  os << "\tconverged\n";
  for (const auto& mr : report.rmse) {
    os << mr.method;
    for (std::size_t j = 0; j < mr.rmse.size(); ++j) {
      bool is_min = compare;
      for (const auto& other : report.rmse) {
        if (other.rmse[j] < mr.rmse[j]) is_min = false;
      }
      os << '\t' << format_double(mr.rmse[j]) << (is_min ? "*" : "");
    }
    os << '\t' << mr.n_converged << '/' << (mr.n_converged + mr.n_failed) << "\n";
  }
  os << "truth";
  for (double v : report.truth_values) os << '\t' << format_double(v);
  os << "\t\n";
  if (report.non_comparable) {
    os << "warning: a method failed on more than 20% of replicates; comparison not reliable\n";
  }
  return os.str();
}

}  // namespace stgeyer
