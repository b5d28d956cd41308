#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "stgeyer/errors.hpp"
#include "stgeyer/format.hpp"
#include "stgeyer/io.hpp"
#include "stgeyer/study.hpp"

namespace fs = std::filesystem;
using namespace stgeyer;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

void ensure_writable(const fs::path& path, bool overwrite) {
  if (!overwrite && fs::exists(path)) {
    throw ValidationError("output '" + path.string() + "' already exists; pass --overwrite");
  }
}

fs::path sibling(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  p.replace_extension();
  return p.string() + suffix;
}

struct Args {
  std::string config;
  std::string out;
  std::string pattern;
  std::string trace;
  std::string table;
  std::optional<std::uint64_t> seed;
  bool overwrite = false;
  int threads = 1;
};

int cmd_simulate(const Args& a) {
  SimulateJob job = parse_simulate_config(load_json_file(a.config));
  if (a.seed) job.mcmc.seed = *a.seed;
  const fs::path trace_path = a.trace.empty() ? sibling(a.out, "_trace.csv") : fs::path(a.trace);
  ensure_writable(a.out, a.overwrite);
  ensure_writable(trace_path, a.overwrite);

  const McmcTrace trace = run_chain(job.model, job.window, job.mcmc);
  write_pattern_csv(a.out, trace.final_pattern);
  write_trace_csv(trace_path, trace);
  std::cout << "simulated " << trace.final_pattern.size() << " events -> " << a.out << "\n";
  return 0;
}

int cmd_fit(const Args& a) {
  const PointPattern pattern = read_pattern_csv(a.pattern);
  FitJob job = parse_fit_config(load_json_file(a.config));
  if (a.seed) job.seed = *a.seed;
  ensure_writable(a.out, a.overwrite);

  const TrendFunction mu = TrendFunction::constant(1.0);
  FitResult result = [&] {
    if (job.method == "pseudo") {
      const QuadGridSpec grid = job.quad_auto ? QuadGridSpec::default_for(pattern.size()) : job.quad;
      return fit_pseudo(pattern, job.irregular, mu, grid);
    }
    const double rho = job.rho > 0.0
                           ? job.rho
                           : 4.0 * static_cast<double>(pattern.size()) / pattern.window().volume();
    Rng rng(job.seed);
    return fit_logistic_likelihood(pattern, job.irregular, mu, rho, rng);
  }();

  atomic_write(a.out, fit_result_to_json(result).dump(2) + "\n");
  std::cout << "fit (" << result.method << ") beta_hat=" << format_double(result.beta_hat);
  for (std::size_t j = 0; j < result.gamma_hat.size(); ++j) {
    std::cout << " gamma_" << (j + 1) << "=" << format_double(result.gamma_hat[j]);
  }
  std::cout << " -> " << a.out << "\n";
  return 0;
}

int cmd_profile(const Args& a) {
  const PointPattern pattern = read_pattern_csv(a.pattern);
  ProfileJob job = parse_profile_config(load_json_file(a.config));
  const fs::path table_path = a.table.empty() ? sibling(a.out, "_profile.csv") : fs::path(a.table);
  ensure_writable(a.out, a.overwrite);
  ensure_writable(table_path, a.overwrite);

  const TrendFunction mu = TrendFunction::constant(1.0);
  const QuadGridSpec grid = job.quad_auto ? QuadGridSpec::default_for(pattern.size()) : job.quad;
  const ProfileResult profile = profile_pseudo(pattern, job.candidates, mu, grid);

  atomic_write(a.out, fit_result_to_json(profile.best_fit).dump(2) + "\n");
  write_profile_csv(table_path, profile);
  std::cout << "profile selected candidate " << profile.best_index << " (log PL "
            << format_double(profile.table[profile.best_index].log_pl) << ") -> " << a.out << "\n";
  return 0;
}

int cmd_study(const Args& a) {
  StudyJob job = parse_study_config(load_json_file(a.config));
  if (a.seed) job.master_seed = *a.seed;
  const fs::path dir(a.out);
  for (const auto& p : study_output_paths(dir)) ensure_writable(p, a.overwrite);

  StudyConfig config(job.truth, job.window);
  config.n_replicates = job.n_replicates;
  config.mcmc = job.mcmc;
  config.run_pseudo = job.run_pseudo;
  config.run_logistic = job.run_logistic;
  config.master_seed = job.master_seed;
  config.quad = job.quad;
  config.quad_auto = job.quad_auto;
  config.rho = job.rho;

  const StudyReport report = run_study(config, a.threads);
  write_study_outputs(dir, report);
  std::cout << rmse_table_text(report);
  std::cout << "study outputs -> " << dir.string() << "\n";
  return 0;
}

int cmd_gnz(const Args& a) {
  const PointPattern pattern = read_pattern_csv(a.pattern);
  GnzJob job = parse_gnz_config(load_json_file(a.config));
  ensure_writable(a.out, a.overwrite);

  const auto& cw = job.window;
  const auto& pw = pattern.window();
  if (cw.x_range().lo != pw.x_range().lo || cw.x_range().hi != pw.x_range().hi ||
      cw.y_range().lo != pw.y_range().lo || cw.y_range().hi != pw.y_range().hi ||
      cw.t_range().lo != pw.t_range().lo || cw.t_range().hi != pw.t_range().hi) {
    throw ValidationError("config window does not match the pattern window");
  }

  const QuadGridSpec grid = job.quad_auto ? QuadGridSpec::default_for(pattern.size()) : job.quad;
  const double residual = gnz_residual(
      job.model, pattern, [](const EventPoint&, std::span<const EventPoint>) { return 1.0; }, grid);

  nlohmann::json out{{"residual", residual},
                     {"n_points", pattern.size()},
                     {"test_function", "1"}};
  atomic_write(a.out, out.dump(2) + "\n");
  std::cout << "gnz residual " << format_double(residual) << " -> " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale spatio-temporal Geyer saturation processes: "
               "simulation, fitting and estimator studies"};
  app.require_subcommand(1);

  Args args;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", args.config, "JSON run configuration")->required();
    if (needs_out) cmd->add_option("--out", args.out, "output path")->required();
    cmd->add_flag("--overwrite", args.overwrite, "allow replacing existing outputs");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "draw one realization by birth-death MCMC");
  add_common(simulate, true);
  simulate->add_option("--trace", args.trace, "trace CSV path (default: <out>_trace.csv)");
  CLI::Option* sim_seed = simulate->add_option("--seed", seed_value, "override the config seed");

  CLI::App* fit = app.add_subcommand("fit", "fit a pattern by pseudo or logistic likelihood");
  fit->add_option("pattern", args.pattern, "pattern CSV")->required();
  add_common(fit, true);
  CLI::Option* fit_seed = fit->add_option("--seed", seed_value, "override the config seed");

  CLI::App* profile = app.add_subcommand("profile", "profile pseudo-likelihood grid search");
  profile->add_option("pattern", args.pattern, "pattern CSV")->required();
  add_common(profile, true);
  profile->add_option("--table", args.table, "profile table CSV (default: <out>_profile.csv)");

  CLI::App* study = app.add_subcommand("study", "simulate-and-fit estimator comparison");
  add_common(study, true);
  CLI::Option* study_seed = study->add_option("--seed", seed_value, "override the config seed");
  study->add_option("--threads", args.threads, "worker threads for replicates")
      ->check(CLI::PositiveNumber);

  CLI::App* gnz = app.add_subcommand("gnz-check", "Georgii-Nguyen-Zessin residual of a model");
  gnz->add_option("pattern", args.pattern, "pattern CSV")->required();
  add_common(gnz, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if ((sim_seed && sim_seed->count()) || (fit_seed && fit_seed->count()) ||
      (study_seed && study_seed->count())) {
    args.seed = seed_value;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (fit->parsed()) return cmd_fit(args);
    if (profile->parsed()) return cmd_profile(args);
    if (study->parsed()) return cmd_study(args);
    if (gnz->parsed()) return cmd_gnz(args);
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
