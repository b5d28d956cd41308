#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "stgeyer/errors.hpp"
#include "stgeyer/io.hpp"

using namespace stgeyer;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "stgeyer_cli_tests";

int run_cli(const std::string& args, bool quiet = true) {
  const std::string cmd =
      std::string(STGEYER_CLI_PATH) + " " + args + (quiet ? " >/dev/null 2>/dev/null" : "");
  const int status = std::system(cmd.c_str());
  return status < 0 ? status : WEXITSTATUS(status);
}

void put_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kModelJson =
    R"("model": {"beta": 70.0, "scales": [
        {"gamma": 0.5, "r": 0.1, "q": 0.05, "s": 1},
        {"gamma": 1.5, "r": 0.11, "q": 0.1, "s": 2}]})";

std::string simulate_config(int steps, int burn, int seed) {
  std::ostringstream ss;
  ss << R"({"window": {"x": [0,1], "y": [0,1], "t": [0,1]},)" << kModelJson
     << R"(, "mcmc": {"n_steps": )" << steps << R"(, "burn_in": )" << burn << R"(, "seed": )"
     << seed << R"(, "initial": {"poisson": 70.0}}})";
  return ss.str();
}

}  // namespace

TEST_CASE("pattern CSV round-trip with window comment") {
  fs::create_directories(kDir);
  const auto w = SpacetimeWindow({-1, 2}, {0, 0.5}, {10, 11});
  const auto pattern = fixtures::uniform_pattern(40, 555, w);
  const fs::path path = kDir / "roundtrip.csv";
  write_pattern_csv(path, pattern);

  const PointPattern back = read_pattern_csv(path);
  REQUIRE(back.size() == pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    CHECK(same_location(back[i], pattern[i]));  // shortest round-trip formatting is exact
  }
  CHECK(back.window().x_range().lo == -1.0);
  CHECK(back.window().t_range().hi == 11.0);
}

TEST_CASE("pattern CSV window from sidecar JSON") {
  fs::create_directories(kDir);
  const fs::path path = kDir / "sidecar.csv";
  put_file(path, "x,y,t\n0.5,0.5,0.5\n");

  // No window anywhere: parse error naming the sidecar.
  fs::remove(path.string() + ".window.json");
  CHECK_THROWS_AS(read_pattern_csv(path), ParseError);

  put_file(path.string() + ".window.json", R"({"x": [0,1], "y": [0,1], "t": [0,1]})");
  const PointPattern pattern = read_pattern_csv(path);
  CHECK(pattern.size() == 1);
}

TEST_CASE("malformed pattern rows are reported with their line number") {
  fs::create_directories(kDir);
  const fs::path path = kDir / "bad.csv";
  put_file(path, "# window 0 1 0 1 0 1\nx,y,t\n0.1,0.2,0.3\n0.4,oops,0.6\n");
  CHECK_THROWS_WITH_AS(read_pattern_csv(path), doctest::Contains(":4"), ParseError);

  put_file(path, "# window 0 1 0 1 0 1\nx,y,t\n0.1,0.2\n");
  CHECK_THROWS_WITH_AS(read_pattern_csv(path), doctest::Contains("3 fields"), ParseError);

  // Out-of-window points are a validation problem, not a parse problem.
  put_file(path, "# window 0 1 0 1 0 1\nx,y,t\n2.0,0.2,0.3\n");
  CHECK_THROWS_AS(read_pattern_csv(path), ValidationError);
}

TEST_CASE("fit result JSON round-trips bit-exactly") {
  FitResult r;
  r.method = "pseudo";
  r.irregular = {{0.1, 0.05, 1.0}, {0.11, 0.1, 2.0}};
  r.beta_hat = 0.1 + 0.2;  // deliberately non-representable decimals
  r.theta0 = std::log(r.beta_hat);
  r.theta_hat = {std::log(0.7), 1.0 / 3.0};
  r.gamma_hat = {0.7, std::exp(1.0 / 3.0)};
  r.log_pseudo_likelihood = -123.45678901234567;
  r.glm.converged = true;
  r.glm.iterations = 7;
  r.glm.deviance = 42.0000000001;
  r.glm.objective = -41.99999999;
  r.glm.gradient_norm = 1e-13;
  r.glm.ridge_used = false;
  r.glm.coefficients = {std::log(r.beta_hat), std::log(0.7), 1.0 / 3.0};
  r.glm.std_errors = {0.01, 0.02, 0.03};

  const auto j = fit_result_to_json(r);
  const auto parsed = nlohmann::json::parse(j.dump());
  const FitResult back = fit_result_from_json(parsed);

  auto bits_equal = [](double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
  };
  CHECK(back.method == r.method);
  CHECK(bits_equal(back.beta_hat, r.beta_hat));
  CHECK(bits_equal(back.theta0, r.theta0));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(bits_equal(back.theta_hat[i], r.theta_hat[i]));
    CHECK(bits_equal(back.gamma_hat[i], r.gamma_hat[i]));
    CHECK(bits_equal(back.irregular[i].r, r.irregular[i].r));
  }
  CHECK(bits_equal(*back.log_pseudo_likelihood, *r.log_pseudo_likelihood));
  CHECK(back.glm.iterations == 7);
  CHECK(bits_equal(back.glm.deviance, r.glm.deviance));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(bits_equal(back.glm.coefficients[i], r.glm.coefficients[i]));
  }
}

TEST_CASE("config schemas reject unknown keys and bad values by name") {
  CHECK_THROWS_WITH_AS(
      parse_simulate_config(nlohmann::json::parse(
          R"({"window": {"x":[0,1],"y":[0,1],"t":[0,1]}, "model": {"beta":1,"scales":[{"gamma":1,"r":0.1,"q":0.1,"s":1}]}, "mcmc": {"n_steps":10,"seed":1}, "typo_key": 3})")),
      doctest::Contains("typo_key"), ValidationError);

  CHECK_THROWS_WITH_AS(
      parse_simulate_config(nlohmann::json::parse(
          R"({"window": {"x":[0,1],"y":[0,1],"t":[0,1]}, "model": {"beta":1,"scales":[{"gamma":1,"r":-0.1,"q":0.1,"s":1}]}, "mcmc": {"n_steps":10,"seed":1}})")),
      doctest::Contains("scales[0].r"), ValidationError);

  CHECK_THROWS_WITH_AS(
      parse_fit_config(nlohmann::json::parse(R"({"method": "pseudo"})")),
      doctest::Contains("irregular"), ValidationError);

  CHECK_THROWS_WITH_AS(
      parse_study_config(nlohmann::json::parse(
          R"({"window": {"x":[0,1],"y":[0,1],"t":[0,1]}, "model": {"beta":1,"scales":[{"gamma":1,"r":0.1,"q":0.1,"s":1}]}, "mcmc": {"n_steps":10,"seed":1}, "n_replicates": 1, "seed": 1, "methods": ["bogus"]})")),
      doctest::Contains("bogus"), ValidationError);
}

TEST_CASE("cli help and usage errors") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("simulate --help") == 0);
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("") == 2);  // a subcommand is required
}

TEST_CASE("cli simulate: deterministic outputs, validation exit codes") {
  fs::create_directories(kDir);
  const fs::path cfg = kDir / "sim.json";
  put_file(cfg, simulate_config(3000, 1000, 5));

  const fs::path out1 = kDir / "pat1.csv";
  const fs::path out2 = kDir / "pat2.csv";
  fs::remove(out1);
  fs::remove(out2);
  fs::remove(kDir / "pat1_trace.csv");
  fs::remove(kDir / "pat2_trace.csv");

  REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + out1.string()) == 0);
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + out2.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(kDir / "pat1_trace.csv") == slurp(kDir / "pat2_trace.csv"));

  const PointPattern pattern = read_pattern_csv(out1);
  CHECK(pattern.size() > 0);
  for (const auto& p : pattern.points()) CHECK(pattern.window().contains(p));

  // Existing outputs are refused without --overwrite.
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out1.string()) == 2);
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out1.string() + " --overwrite") == 0);

  // Parse and validation failures.
  const fs::path broken = kDir / "broken.json";
  put_file(broken, "{ not json");
  CHECK(run_cli("simulate --config " + broken.string() + " --out " + out1.string() +
                " --overwrite") == 1);
  CHECK(run_cli("simulate --config " + (kDir / "missing.json").string() + " --out " +
                out1.string() + " --overwrite") == 1);

  const fs::path invalid = kDir / "invalid.json";
  put_file(invalid, simulate_config(3000, 1000, 5));
  {
    auto j = load_json_file(invalid);
    j["model"]["scales"][0]["r"] = -1.0;
    put_file(invalid, j.dump());
  }
  CHECK(run_cli("simulate --config " + invalid.string() + " --out " + out1.string() +
                " --overwrite") == 2);
}

TEST_CASE("cli fit: round trip against the library, deterministic bytes") {
  fs::create_directories(kDir);
  const fs::path sim_cfg = kDir / "sim_fit.json";
  put_file(sim_cfg, simulate_config(20000, 20000, 6));
  const fs::path pattern_path = kDir / "fit_pattern.csv";
  REQUIRE(run_cli("simulate --config " + sim_cfg.string() + " --out " + pattern_path.string() +
                  " --overwrite") == 0);

  const fs::path fit_cfg = kDir / "fit.json";
  put_file(fit_cfg,
           R"({"method": "pseudo", "irregular": [
                {"r": 0.1, "q": 0.05, "s": 1}, {"r": 0.11, "q": 0.1, "s": 2}]})");
  const fs::path fit_out1 = kDir / "fit1.json";
  const fs::path fit_out2 = kDir / "fit2.json";
  REQUIRE(run_cli("fit " + pattern_path.string() + " --config " + fit_cfg.string() + " --out " +
                  fit_out1.string() + " --overwrite") == 0);
  REQUIRE(run_cli("fit " + pattern_path.string() + " --config " + fit_cfg.string() + " --out " +
                  fit_out2.string() + " --overwrite") == 0);
  CHECK(slurp(fit_out1) == slurp(fit_out2));

  const FitResult from_cli = fit_result_from_json(load_json_file(fit_out1));
  CHECK(from_cli.method == "pseudo");
  for (double g : from_cli.gamma_hat) {
    CHECK(std::isfinite(g));
    CHECK(g > 0.0);
  }

  // The CLI resolves the same defaults as a direct library call.
  const PointPattern pattern = read_pattern_csv(pattern_path);
  const FitResult direct = fit_pseudo(pattern, from_cli.irregular, TrendFunction::constant(1.0),
                                      QuadGridSpec::default_for(pattern.size()));
  CHECK(std::abs(from_cli.beta_hat - direct.beta_hat) <= 1e-10 * direct.beta_hat);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(from_cli.gamma_hat[j] - direct.gamma_hat[j]) <= 1e-10 * direct.gamma_hat[j]);
  }

  // Logistic path with a seed flag.
  const fs::path logit_cfg = kDir / "fit_logit.json";
  put_file(logit_cfg,
           R"({"method": "logistic", "irregular": [
                {"r": 0.1, "q": 0.05, "s": 1}, {"r": 0.11, "q": 0.1, "s": 2}], "seed": 4})");
  const fs::path logit_out = kDir / "fit_logit_out.json";
  REQUIRE(run_cli("fit " + pattern_path.string() + " --config " + logit_cfg.string() + " --out " +
                  logit_out.string() + " --overwrite") == 0);
  const FitResult logit = fit_result_from_json(load_json_file(logit_out));
  CHECK(logit.method == "logistic");
  CHECK(!logit.log_pseudo_likelihood.has_value());

  // Runtime failure: empty pattern exits 3.
  const fs::path empty_pattern = kDir / "empty.csv";
  put_file(empty_pattern, "# window 0 1 0 1 0 1\nx,y,t\n");
  CHECK(run_cli("fit " + empty_pattern.string() + " --config " + fit_cfg.string() + " --out " +
                (kDir / "nope.json").string() + " --overwrite") == 3);

  // Malformed pattern exits 1.
  const fs::path bad_pattern = kDir / "bad_pattern.csv";
  put_file(bad_pattern, "# window 0 1 0 1 0 1\nx,y,t\n0.1,zzz,0.3\n");
  CHECK(run_cli("fit " + bad_pattern.string() + " --config " + fit_cfg.string() + " --out " +
                (kDir / "nope.json").string() + " --overwrite") == 1);
}

TEST_CASE("cli profile writes the selected fit and the table") {
  fs::create_directories(kDir);
  const fs::path sim_cfg = kDir / "sim_prof.json";
  put_file(sim_cfg, simulate_config(20000, 20000, 8));
  const fs::path pattern_path = kDir / "prof_pattern.csv";
  REQUIRE(run_cli("simulate --config " + sim_cfg.string() + " --out " + pattern_path.string() +
                  " --overwrite") == 0);

  const fs::path prof_cfg = kDir / "prof.json";
  put_file(prof_cfg, R"({"candidates": [
      [{"r": 0.1, "q": 0.05, "s": 1}, {"r": 0.11, "q": 0.1, "s": 2}],
      [{"r": 0.2, "q": 0.05, "s": 1}, {"r": 0.22, "q": 0.1, "s": 2}]]})");
  const fs::path best = kDir / "profile_best.json";
  REQUIRE(run_cli("profile " + pattern_path.string() + " --config " + prof_cfg.string() +
                  " --out " + best.string() + " --overwrite") == 0);
  CHECK(fs::exists(kDir / "profile_best_profile.csv"));
  const FitResult chosen = fit_result_from_json(load_json_file(best));
  CHECK(chosen.log_pseudo_likelihood.has_value());

  const std::string table = slurp(kDir / "profile_best_profile.csv");
  CHECK(table.find("candidate,log_pl,converged,scales,note,selected") == 0);
}

TEST_CASE("cli study: outputs, overwrite safety, thread-count independence") {
  fs::create_directories(kDir);
  const fs::path cfg = kDir / "study.json";
  std::ostringstream ss;
  ss << R"({"window": {"x": [0,1], "y": [0,1], "t": [0,1]},)" << kModelJson
     << R"(, "mcmc": {"n_steps": 1500, "burn_in": 1500, "seed": 0, "initial": {"poisson": 70.0}},)"
     << R"( "n_replicates": 2, "seed": 9, "methods": ["pseudo", "logistic"]})";
  put_file(cfg, ss.str());

  const fs::path dir1 = kDir / "study_out1";
  const fs::path dir2 = kDir / "study_out2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);

  REQUIRE(run_cli("study --config " + cfg.string() + " --out " + dir1.string()) == 0);
  for (const auto& p : study_output_paths(dir1)) CHECK(fs::exists(p));
  const auto report = load_json_file(dir1 / "report.json");
  CHECK(report.at("n_replicates").get<int>() == 2);
  CHECK(report.at("replicates").size() == 2);

  // Refuses to clobber without --overwrite.
  CHECK(run_cli("study --config " + cfg.string() + " --out " + dir1.string()) == 2);

  // Different thread count, byte-identical files.
  REQUIRE(run_cli("study --config " + cfg.string() + " --out " + dir2.string() + " --threads 3") == 0);
  for (const auto& name : {"report.json", "estimates.csv", "rmse.csv", "boxplot.csv", "boxplot.svg"}) {
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }
}

TEST_CASE("cli gnz-check writes the residual and validates the window") {
  fs::create_directories(kDir);
  const fs::path sim_cfg = kDir / "sim_gnz.json";
  put_file(sim_cfg, simulate_config(5000, 5000, 12));
  const fs::path pattern_path = kDir / "gnz_pattern.csv";
  REQUIRE(run_cli("simulate --config " + sim_cfg.string() + " --out " + pattern_path.string() +
                  " --overwrite") == 0);

  const fs::path gnz_cfg = kDir / "gnz.json";
  std::ostringstream ss;
  ss << R"({"window": {"x": [0,1], "y": [0,1], "t": [0,1]},)" << kModelJson << "}";
  put_file(gnz_cfg, ss.str());

  const fs::path out = kDir / "gnz.json.out";
  REQUIRE(run_cli("gnz-check " + pattern_path.string() + " --config " + gnz_cfg.string() +
                  " --out " + out.string() + " --overwrite") == 0);
  const auto j = load_json_file(out);
  CHECK(std::isfinite(j.at("residual").get<double>()));

  // Mismatched window is a validation error.
  const fs::path wrong_cfg = kDir / "gnz_wrong.json";
  std::ostringstream ws;
  ws << R"({"window": {"x": [0,2], "y": [0,1], "t": [0,1]},)" << kModelJson << "}";
  put_file(wrong_cfg, ws.str());
  CHECK(run_cli("gnz-check " + pattern_path.string() + " --config " + wrong_cfg.string() +
                " --out " + out.string() + " --overwrite") == 2);
}
