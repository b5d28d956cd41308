#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stgeyer/geometry.hpp"
#include "stgeyer/inference.hpp"
#include "stgeyer/model.hpp"
#include "stgeyer/simulate.hpp"
#include "stgeyer/study.hpp"

namespace stgeyer {

/// Write-temp-then-rename so a partial file never masquerades as output.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Pattern CSV: optional "# window xmin xmax ymin ymax tmin tmax" comment,
/// then an "x,y,t" header and one event per row. When the comment is absent
/// the window is read from the sidecar "<file>.window.json".
PointPattern read_pattern_csv(const std::filesystem::path& path);
void write_pattern_csv(const std::filesystem::path& path, const PointPattern& pattern);

void write_trace_csv(const std::filesystem::path& path, const McmcTrace& trace);

nlohmann::json fit_result_to_json(const FitResult& result);
FitResult fit_result_from_json(const nlohmann::json& j);

void write_profile_csv(const std::filesystem::path& path, const ProfileResult& profile);

/// Study output files: report.json, estimates.csv, rmse.csv, boxplot.csv,
/// boxplot.svg.
void write_study_outputs(const std::filesystem::path& dir, const StudyReport& report);
std::vector<std::filesystem::path> study_output_paths(const std::filesystem::path& dir);

// --- JSON run configurations (schema-checked; unknown keys rejected) ---

struct SimulateJob {
  SpacetimeWindow window;
  GeyerModel model;
  McmcConfig mcmc;
};

struct FitJob {
  std::string method;  // "pseudo" or "logistic"
  IrregularParams irregular;
  QuadGridSpec quad;       // pseudo
  bool quad_auto = true;   // pseudo: derive grid from n when true
  double rho = 0.0;        // logistic; <= 0 means 4 n / |W|
  std::uint64_t seed = 0;  // logistic dummy draws
};

struct ProfileJob {
  std::vector<IrregularParams> candidates;
  QuadGridSpec quad;
  bool quad_auto = true;
};

struct StudyJob {
  SpacetimeWindow window;
  GeyerModel truth;
  McmcConfig mcmc;
  int n_replicates = 100;
  bool run_pseudo = true;
  bool run_logistic = true;
  std::uint64_t master_seed = 0;
  QuadGridSpec quad;
  bool quad_auto = true;
  double rho = 0.0;
};

struct GnzJob {
  SpacetimeWindow window;
  GeyerModel model;
  QuadGridSpec quad;
  bool quad_auto = true;
};

SimulateJob parse_simulate_config(const nlohmann::json& j);
FitJob parse_fit_config(const nlohmann::json& j);
ProfileJob parse_profile_config(const nlohmann::json& j);
StudyJob parse_study_config(const nlohmann::json& j);
GnzJob parse_gnz_config(const nlohmann::json& j);

nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace stgeyer
