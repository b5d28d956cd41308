#include "stgeyer/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "stgeyer/errors.hpp"
#include "stgeyer/format.hpp"

namespace stgeyer {

namespace {

using nlohmann::json;

// ---------- schema helpers ----------

std::string join_ctx(const std::string& ctx, const std::string& key) {
  return ctx.empty() ? key : ctx + "." + key;
}

void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
  if (!obj.is_object()) throw ValidationError("'" + ctx + "' must be a JSON object");
  for (const char* key : required) {
    if (!obj.contains(key)) throw ValidationError("missing required field '" + join_ctx(ctx, key) + "'");
  }
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::any_of(required.begin(), required.end(),
                                   [&](const char* k) { return key == k; }) ||
                       std::any_of(optional.begin(), optional.end(),
                                   [&](const char* k) { return key == k; });
    if (!known) throw ValidationError("unknown field '" + join_ctx(ctx, key) + "'");
  }
}

double get_number(const json& obj, const std::string& ctx, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError("'" + join_ctx(ctx, key) + "' must be a number");
  return v.get<double>();
}

double get_positive(const json& obj, const std::string& ctx, const char* key) {
  const double v = get_number(obj, ctx, key);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError("'" + join_ctx(ctx, key) + "' must be positive and finite");
  }
  return v;
}

std::int64_t get_integer(const json& obj, const std::string& ctx, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ValidationError("'" + join_ctx(ctx, key) + "' must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_seed(const json& obj, const std::string& ctx, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ValidationError("'" + join_ctx(ctx, key) + "' must be an integer seed");
  }
  return v.get<std::uint64_t>();
}

Interval get_interval(const json& obj, const std::string& ctx, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError("'" + join_ctx(ctx, key) + "' must be a [lo, hi] number pair");
  }
  Interval iv{v[0].get<double>(), v[1].get<double>()};
  if (!(iv.length() > 0.0)) {
    throw ValidationError("'" + join_ctx(ctx, key) + "' must have positive length");
  }
  return iv;
}

SpacetimeWindow parse_window(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"x", "y", "t"}, {});
  return SpacetimeWindow(get_interval(j, ctx, "x"), get_interval(j, ctx, "y"),
                         get_interval(j, ctx, "t"));
}

ScaleShape parse_shape(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"r", "q", "s"}, {});
  ScaleShape sh;
  sh.r = get_positive(j, ctx, "r");
  sh.q = get_positive(j, ctx, "q");
  sh.s = get_number(j, ctx, "s");
  if (!(sh.s >= 0.0)) throw ValidationError("'" + join_ctx(ctx, "s") + "' must be nonnegative");
  return sh;
}

GeyerModel parse_model(const json& j, const std::string& ctx, const SpacetimeWindow& window) {
  check_keys(j, ctx, {"beta", "scales"}, {"mu_grid"});
  const double beta = get_positive(j, ctx, "beta");

  TrendFunction trend = TrendFunction::constant(beta);
  if (j.contains("mu_grid")) {
    const auto& g = j.at("mu_grid");
    const std::string gctx = join_ctx(ctx, "mu_grid");
    check_keys(g, gctx, {"dims", "values"}, {});
    const auto& dims = g.at("dims");
    if (!dims.is_array() || dims.size() != 3) {
      throw ValidationError("'" + join_ctx(gctx, "dims") + "' must be [nx, ny, nt]");
    }
    std::array<int, 3> d{};
    for (int k = 0; k < 3; ++k) {
      if (!dims[k].is_number_integer() || dims[k].get<int>() < 1) {
        throw ValidationError("'" + join_ctx(gctx, "dims") + "' entries must be positive integers");
      }
      d[k] = dims[k].get<int>();
    }
    const auto& values = g.at("values");
    if (!values.is_array()) throw ValidationError("'" + join_ctx(gctx, "values") + "' must be an array");
    std::vector<double> mu;
    mu.reserve(values.size());
    for (const auto& v : values) {
      if (!v.is_number()) throw ValidationError("'" + join_ctx(gctx, "values") + "' must hold numbers");
      mu.push_back(v.get<double>());
    }
    try {
      trend = TrendFunction::grid(beta, window, d, std::move(mu));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("'") + gctx + "': " + e.what());
    }
  }

  const auto& scales = j.at("scales");
  if (!scales.is_array() || scales.empty()) {
    throw ValidationError("'" + join_ctx(ctx, "scales") + "' must be a nonempty array");
  }
  std::vector<ScaleComponent> comps;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const std::string sctx = join_ctx(ctx, "scales[" + std::to_string(k) + "]");
    check_keys(scales[k], sctx, {"gamma", "r", "q", "s"}, {});
    ScaleComponent c;
    c.gamma = get_positive(scales[k], sctx, "gamma");
    c.r = get_positive(scales[k], sctx, "r");
    c.q = get_positive(scales[k], sctx, "q");
    c.s = get_number(scales[k], sctx, "s");
    if (!(c.s >= 0.0)) throw ValidationError("'" + join_ctx(sctx, "s") + "' must be nonnegative");
    comps.push_back(c);
  }
  return GeyerModel(trend, std::move(comps));
}

McmcConfig parse_mcmc(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"n_steps", "seed"}, {"burn_in", "initial", "thin"});
  McmcConfig mc;
  mc.n_steps = get_integer(j, ctx, "n_steps");
  if (mc.n_steps < 1) throw ValidationError("'" + join_ctx(ctx, "n_steps") + "' must be positive");
  if (j.contains("burn_in")) {
    mc.burn_in = get_integer(j, ctx, "burn_in");
    if (mc.burn_in < 0 || mc.burn_in > mc.n_steps) {
      throw ValidationError("'" + join_ctx(ctx, "burn_in") + "' must lie in [0, n_steps]");
    }
  }
  mc.seed = get_seed(j, ctx, "seed");
  if (j.contains("thin")) {
    mc.thin = get_integer(j, ctx, "thin");
    if (mc.thin < 1) throw ValidationError("'" + join_ctx(ctx, "thin") + "' must be positive");
  }
  if (j.contains("initial")) {
    const auto& init = j.at("initial");
    if (init.is_string() && init.get<std::string>() == "empty") {
      mc.init = McmcConfig::Init::empty;
    } else if (init.is_object()) {
      check_keys(init, join_ctx(ctx, "initial"), {"poisson"}, {});
      mc.init = McmcConfig::Init::poisson;
      mc.init_rate = get_positive(init, join_ctx(ctx, "initial"), "poisson");
    } else {
      throw ValidationError("'" + join_ctx(ctx, "initial") +
                            "' must be \"empty\" or {\"poisson\": rate}");
    }
  }
  return mc;
}

IrregularParams parse_irregular(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ValidationError("'" + ctx + "' must be an array of scales");
  IrregularParams out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(parse_shape(j[k], ctx + "[" + std::to_string(k) + "]"));
  }
  return out;
}

QuadGridSpec parse_quad(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"nx", "ny", "nt"}, {"dummy_per_cell"});
  QuadGridSpec q;
  q.nx = static_cast<int>(get_integer(j, ctx, "nx"));
  q.ny = static_cast<int>(get_integer(j, ctx, "ny"));
  q.nt = static_cast<int>(get_integer(j, ctx, "nt"));
  if (q.nx < 1 || q.ny < 1 || q.nt < 1) {
    throw ValidationError("'" + ctx + "' cell counts must be positive");
  }
  if (j.contains("dummy_per_cell")) {
    q.dummy_per_cell = static_cast<int>(get_integer(j, ctx, "dummy_per_cell"));
    if (q.dummy_per_cell < 1) {
      throw ValidationError("'" + join_ctx(ctx, "dummy_per_cell") + "' must be positive");
    }
  }
  return q;
}

// ---------- CSV helpers ----------

double parse_csv_number(std::string_view field, const std::filesystem::path& path, int line) {
  double v = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": cannot parse number '" +
                     std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = row.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(row.substr(start));
      break;
    }
    fields.push_back(row.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    os << content;
    if (!os.flush()) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

PointPattern read_pattern_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open pattern file '" + path.string() + "'");

  std::string line;
  int line_no = 0;
  std::optional<SpacetimeWindow> window;

  // Optional window comment lines before the header.
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] != '#') break;
    std::istringstream ss(line.substr(1));
    std::string tag;
    ss >> tag;
    if (tag == "window") {
      double a, b, c, d, e, f;
      if (!(ss >> a >> b >> c >> d >> e >> f)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": window comment needs six numbers");
      }
      try {
        window = SpacetimeWindow({a, b}, {c, d}, {e, f});
      } catch (const std::invalid_argument& e2) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e2.what());
      }
    }
  }

  if (line != "x,y,t") {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected header 'x,y,t'");
  }

  if (!window) {
    const std::filesystem::path sidecar = path.string() + ".window.json";
    if (!std::filesystem::exists(sidecar)) {
      throw ParseError("no window declared for '" + path.string() +
                       "': add a '# window ...' comment or the sidecar '" + sidecar.string() + "'");
    }
    window = parse_window(load_json_file(sidecar), "window");
  }

  std::vector<EventPoint> points;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields, got " +
                       std::to_string(fields.size()));
    }
    points.push_back({parse_csv_number(fields[0], path, line_no),
                      parse_csv_number(fields[1], path, line_no),
                      parse_csv_number(fields[2], path, line_no)});
  }

  try {
    return PointPattern(std::move(points), *window);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_pattern_csv(const std::filesystem::path& path, const PointPattern& pattern) {
  const auto& w = pattern.window();
  std::string out = "# window " + format_double(w.x_range().lo) + ' ' + format_double(w.x_range().hi) +
                    ' ' + format_double(w.y_range().lo) + ' ' + format_double(w.y_range().hi) + ' ' +
                    format_double(w.t_range().lo) + ' ' + format_double(w.t_range().hi) + "\nx,y,t\n";
  for (const auto& p : pattern.points()) {
    out += format_double(p.x) + ',' + format_double(p.y) + ',' + format_double(p.t) + '\n';
  }
  atomic_write(path, out);
}

void write_trace_csv(const std::filesystem::path& path, const McmcTrace& trace) {
  std::string out = "step,n_points,move,accepted\n";
  for (std::size_t i = 0; i < trace.counts.size(); ++i) {
    out += format_int(static_cast<std::int64_t>(i) + 1) + ',' + format_int(trace.counts[i]) + ',' +
           (trace.moves[i] == static_cast<std::uint8_t>(MoveType::birth) ? "birth" : "death") + ',' +
           (trace.accepts[i] ? '1' : '0') + '\n';
  }
  atomic_write(path, out);
}

nlohmann::json fit_result_to_json(const FitResult& result) {
  json irregular = json::array();
  for (const auto& sh : result.irregular) {
    irregular.push_back({{"r", sh.r}, {"q", sh.q}, {"s", sh.s}});
  }
  json glm{{"converged", result.glm.converged},
           {"iterations", result.glm.iterations},
           {"deviance", result.glm.deviance},
           {"objective", result.glm.objective},
           {"gradient_norm", result.glm.gradient_norm},
           {"ridge_used", result.glm.ridge_used},
           {"coefficients", result.glm.coefficients},
           {"std_errors", result.glm.std_errors}};
  json j{{"method", result.method},
         {"irregular", irregular},
         {"beta_hat", result.beta_hat},
         {"theta0", result.theta0},
         {"theta_hat", result.theta_hat},
         {"gamma_hat", result.gamma_hat},
         {"glm", glm}};
  if (result.log_pseudo_likelihood) j["log_pseudo_likelihood"] = *result.log_pseudo_likelihood;
  return j;
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  check_keys(j, "fit",
             {"method", "irregular", "beta_hat", "theta0", "theta_hat", "gamma_hat", "glm"},
             {"log_pseudo_likelihood"});
  FitResult r;
  r.method = j.at("method").get<std::string>();
  for (const auto& sh : j.at("irregular")) {
    r.irregular.push_back(ScaleShape{sh.at("r").get<double>(), sh.at("q").get<double>(),
                                     sh.at("s").get<double>()});
  }
  r.beta_hat = j.at("beta_hat").get<double>();
  r.theta0 = j.at("theta0").get<double>();
  r.theta_hat = j.at("theta_hat").get<std::vector<double>>();
  r.gamma_hat = j.at("gamma_hat").get<std::vector<double>>();
  if (j.contains("log_pseudo_likelihood")) {
    r.log_pseudo_likelihood = j.at("log_pseudo_likelihood").get<double>();
  }
  const auto& g = j.at("glm");
  r.glm.converged = g.at("converged").get<bool>();
  r.glm.iterations = g.at("iterations").get<int>();
  r.glm.deviance = g.at("deviance").get<double>();
  r.glm.objective = g.at("objective").get<double>();
  r.glm.gradient_norm = g.at("gradient_norm").get<double>();
  r.glm.ridge_used = g.at("ridge_used").get<bool>();
  r.glm.coefficients = g.at("coefficients").get<std::vector<double>>();
  r.glm.std_errors = g.at("std_errors").get<std::vector<double>>();
  return r;
}

void write_profile_csv(const std::filesystem::path& path, const ProfileResult& profile) {
  std::string out = "candidate,log_pl,converged,scales,note,selected\n";
  for (std::size_t c = 0; c < profile.table.size(); ++c) {
    const auto& row = profile.table[c];
    std::string scales;
    for (std::size_t j = 0; j < row.irregular.size(); ++j) {
      if (j) scales += "; ";
      scales += "r=" + format_double(row.irregular[j].r) + " q=" + format_double(row.irregular[j].q) +
                " s=" + format_double(row.irregular[j].s);
    }
    std::string note = row.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    out += format_int(static_cast<std::int64_t>(c)) + ',' + format_double(row.log_pl) + ',' +
           (row.converged ? '1' : '0') + ',' + scales + ',' + note + ',' +
           (c == profile.best_index ? '1' : '0') + '\n';
  }
  atomic_write(path, out);
}

// ---------- study outputs ----------

namespace {

json replicate_to_json(const ReplicateRecord& rec, bool run_pseudo, bool run_logistic) {
  json j{{"replicate", rec.replicate}, {"n_points", rec.n_points}};
  auto method_json = [](const std::optional<MethodEstimate>& est, const std::string& err) {
    if (est) return json{{"beta_hat", est->beta_hat}, {"gamma_hat", est->gamma_hat}};
    return json{{"error", err}};
  };
  if (run_pseudo) j["pseudo"] = method_json(rec.pseudo, rec.pseudo_error);
  if (run_logistic) j["logistic"] = method_json(rec.logistic, rec.logistic_error);
  return j;
}

std::string estimates_csv(const StudyReport& report) {
  std::string out = "replicate,n_points,method,converged";
  for (const auto& name : report.param_names) out += "," + name + "_hat";
  out += "\n";
  for (const auto& rec : report.rows) {
    for (const auto& method : report.methods) {
      const auto& est = method == "pseudo" ? rec.pseudo : rec.logistic;
      out += format_int(rec.replicate) + ',' + format_int(rec.n_points) + ',' + method + ',' +
             (est ? '1' : '0');
      if (est) {
        out += ',' + format_double(est->beta_hat);
        for (double g : est->gamma_hat) out += ',' + format_double(g);
      } else {
        for (std::size_t j = 0; j < report.param_names.size(); ++j) out += ',';
      }
      out += '\n';
    }
  }
  return out;
}

std::string rmse_csv(const StudyReport& report) {
  std::string out = "method,parameter,truth,rmse,n_converged,n_failed,is_min\n";
  for (const auto& mr : report.rmse) {
    for (std::size_t j = 0; j < mr.rmse.size(); ++j) {
      bool is_min = report.rmse.size() > 1;
      for (const auto& other : report.rmse) {
        if (other.rmse[j] < mr.rmse[j]) is_min = false;
      }
      out += mr.method + ',' + report.param_names[j] + ',' + format_double(report.truth_values[j]) +
             ',' + format_double(mr.rmse[j]) + ',' + format_int(mr.n_converged) + ',' +
             format_int(mr.n_failed) + ',' + (is_min ? '1' : '0') + '\n';
    }
  }
  return out;
}

std::string boxplot_csv(const StudyReport& report) {
  std::string out = "replicate";
  for (const auto& method : report.methods) {
    for (const auto& name : report.param_names) out += ',' + method + '_' + name;
  }
  out += "\n";
  for (const auto& rec : report.rows) {
    out += format_int(rec.replicate);
    for (const auto& method : report.methods) {
      const auto& est = method == "pseudo" ? rec.pseudo : rec.logistic;
      if (est) {
        out += ',' + format_double(est->beta_hat);
        for (double g : est->gamma_hat) out += ',' + format_double(g);
      } else {
        for (std::size_t j = 0; j < report.param_names.size(); ++j) out += ',';
      }
    }
    out += '\n';
  }
  return out;
}

struct BoxStats {
  double lo_whisker, q1, median, q3, hi_whisker;
};

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  BoxStats b{};
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  b.lo_whisker = b.q1;
  b.hi_whisker = b.q3;
  for (double v : values) {
    if (v >= b.q1 - 1.5 * iqr) {
      b.lo_whisker = v;
      break;
    }
  }
  for (auto it = values.rbegin(); it != values.rend(); ++it) {
    if (*it <= b.q3 + 1.5 * iqr) {
      b.hi_whisker = *it;
      break;
    }
  }
  return b;
}

std::string boxplot_svg(const StudyReport& report) {
  const int panel_w = 180, panel_h = 240, margin = 40;
  const auto n_params = report.param_names.size();
  const int width = static_cast<int>(n_params) * panel_w + 2 * margin;
  const int height = panel_h + 2 * margin;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\">\n";

  for (std::size_t pi = 0; pi < n_params; ++pi) {
    // Collect per-method estimates for this parameter.
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (const auto& method : report.methods) {
      std::vector<double> vals;
      for (const auto& rec : report.rows) {
        const auto& est = method == "pseudo" ? rec.pseudo : rec.logistic;
        if (!est) continue;
        vals.push_back(pi == 0 ? est->beta_hat : est->gamma_hat[pi - 1]);
      }
      if (!vals.empty()) series.emplace_back(method, std::move(vals));
    }
    if (series.empty()) continue;

    double lo = report.truth_values[pi], hi = report.truth_values[pi];
    for (const auto& [_, vals] : series) {
      lo = std::min(lo, *std::min_element(vals.begin(), vals.end()));
      hi = std::max(hi, *std::max_element(vals.begin(), vals.end()));
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double x0 = margin + static_cast<double>(pi) * panel_w;
    auto ypos = [&](double v) { return margin + panel_h * (1.0 - (v - lo) / (hi - lo)); };

    svg += "<rect x=\"" + format_double(x0) + "\" y=\"" + std::to_string(margin) + "\" width=\"" +
           std::to_string(panel_w - 20) + "\" height=\"" + std::to_string(panel_h) +
           "\" fill=\"none\" stroke=\"#999\"/>\n";
    svg += "<text x=\"" + format_double(x0 + (panel_w - 20) / 2.0) + "\" y=\"" +
           std::to_string(margin - 8) + "\" text-anchor=\"middle\" font-size=\"12\">" +
           report.param_names[pi] + "</text>\n";

    // Truth line.
    svg += "<line x1=\"" + format_double(x0) + "\" x2=\"" + format_double(x0 + panel_w - 20) +
           "\" y1=\"" + format_double(ypos(report.truth_values[pi])) + "\" y2=\"" +
           format_double(ypos(report.truth_values[pi])) + "\" stroke=\"red\"/>\n";

    const double slot = (panel_w - 20.0) / static_cast<double>(series.size());
    for (std::size_t si = 0; si < series.size(); ++si) {
      const BoxStats b = box_stats(series[si].second);
      const double cx = x0 + slot * (static_cast<double>(si) + 0.5);
      const double half = slot * 0.25;
      svg += "<line x1=\"" + format_double(cx) + "\" x2=\"" + format_double(cx) + "\" y1=\"" +
             format_double(ypos(b.lo_whisker)) + "\" y2=\"" + format_double(ypos(b.hi_whisker)) +
             "\" stroke=\"black\"/>\n";
      svg += "<rect x=\"" + format_double(cx - half) + "\" y=\"" + format_double(ypos(b.q3)) +
             "\" width=\"" + format_double(2 * half) + "\" height=\"" +
             format_double(ypos(b.q1) - ypos(b.q3)) + "\" fill=\"#cfe2f3\" stroke=\"black\"/>\n";
      svg += "<line x1=\"" + format_double(cx - half) + "\" x2=\"" + format_double(cx + half) +
             "\" y1=\"" + format_double(ypos(b.median)) + "\" y2=\"" + format_double(ypos(b.median)) +
             "\" stroke=\"black\"/>\n";
      svg += "<text x=\"" + format_double(cx) + "\" y=\"" + std::to_string(margin + panel_h + 16) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + series[si].first + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

json report_to_json(const StudyReport& report) {
  const bool has_pseudo =
      std::find(report.methods.begin(), report.methods.end(), "pseudo") != report.methods.end();
  const bool has_logistic =
      std::find(report.methods.begin(), report.methods.end(), "logistic") != report.methods.end();
  json replicates = json::array();
  for (const auto& rec : report.rows) {
    replicates.push_back(replicate_to_json(rec, has_pseudo, has_logistic));
  }
  json rmse = json::array();
  for (const auto& mr : report.rmse) {
    rmse.push_back({{"method", mr.method},
                    {"rmse", mr.rmse},
                    {"n_converged", mr.n_converged},
                    {"n_failed", mr.n_failed}});
  }
  return json{{"master_seed", report.master_seed},
              {"n_replicates", report.n_replicates},
              {"methods", report.methods},
              {"params", report.param_names},
              {"truth", report.truth_values},
              {"replicates", replicates},
              {"rmse", rmse},
              {"non_comparable", report.non_comparable}};
}

}  // namespace

std::vector<std::filesystem::path> study_output_paths(const std::filesystem::path& dir) {
  return {dir / "report.json", dir / "estimates.csv", dir / "rmse.csv", dir / "boxplot.csv",
          dir / "boxplot.svg"};
}

void write_study_outputs(const std::filesystem::path& dir, const StudyReport& report) {
  std::filesystem::create_directories(dir);
  atomic_write(dir / "report.json", report_to_json(report).dump(2) + "\n");
  atomic_write(dir / "estimates.csv", estimates_csv(report));
  atomic_write(dir / "rmse.csv", rmse_csv(report));
  atomic_write(dir / "boxplot.csv", boxplot_csv(report));
  atomic_write(dir / "boxplot.svg", boxplot_svg(report));
}

// ---------- run configurations ----------

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

SimulateJob parse_simulate_config(const nlohmann::json& j) {
  check_keys(j, "", {"window", "model", "mcmc"}, {});
  const SpacetimeWindow window = parse_window(j.at("window"), "window");
  GeyerModel model = parse_model(j.at("model"), "model", window);
  McmcConfig mcmc = parse_mcmc(j.at("mcmc"), "mcmc");
  return SimulateJob{window, std::move(model), mcmc};
}

FitJob parse_fit_config(const nlohmann::json& j) {
  check_keys(j, "", {"method", "irregular"}, {"quadrature", "rho", "seed"});
  FitJob job;
  if (!j.at("method").is_string()) throw ValidationError("'method' must be a string");
  job.method = j.at("method").get<std::string>();
  if (job.method != "pseudo" && job.method != "logistic") {
    throw ValidationError("'method' must be \"pseudo\" or \"logistic\"");
  }
  job.irregular = parse_irregular(j.at("irregular"), "irregular");
  if (j.contains("quadrature")) {
    job.quad = parse_quad(j.at("quadrature"), "quadrature");
    job.quad_auto = false;
  }
  if (j.contains("rho")) job.rho = get_positive(j, "", "rho");
  if (j.contains("seed")) job.seed = get_seed(j, "", "seed");
  return job;
}

ProfileJob parse_profile_config(const nlohmann::json& j) {
  check_keys(j, "", {"candidates"}, {"quadrature"});
  ProfileJob job;
  const auto& cands = j.at("candidates");
  if (!cands.is_array() || cands.empty()) {
    throw ValidationError("'candidates' must be a nonempty array");
  }
  for (std::size_t c = 0; c < cands.size(); ++c) {
    job.candidates.push_back(parse_irregular(cands[c], "candidates[" + std::to_string(c) + "]"));
  }
  if (j.contains("quadrature")) {
    job.quad = parse_quad(j.at("quadrature"), "quadrature");
    job.quad_auto = false;
  }
  return job;
}

StudyJob parse_study_config(const nlohmann::json& j) {
  check_keys(j, "", {"window", "model", "mcmc", "n_replicates", "seed"},
             {"methods", "quadrature", "rho"});
  const SpacetimeWindow window = parse_window(j.at("window"), "window");
  GeyerModel truth = parse_model(j.at("model"), "model", window);
  StudyJob job{.window = window,
               .truth = std::move(truth),
               .mcmc = parse_mcmc(j.at("mcmc"), "mcmc"),
               .n_replicates = 100,
               .run_pseudo = true,
               .run_logistic = true,
               .master_seed = 0,
               .quad = {},
               .quad_auto = true,
               .rho = 0.0};
  job.n_replicates = static_cast<int>(get_integer(j, "", "n_replicates"));
  if (job.n_replicates < 1) throw ValidationError("'n_replicates' must be positive");
  job.master_seed = get_seed(j, "", "seed");
  if (j.contains("methods")) {
    const auto& methods = j.at("methods");
    if (!methods.is_array() || methods.empty()) {
      throw ValidationError("'methods' must be a nonempty array");
    }
    job.run_pseudo = false;
    job.run_logistic = false;
    for (const auto& m : methods) {
      if (!m.is_string()) throw ValidationError("'methods' entries must be strings");
      const std::string name = m.get<std::string>();
      if (name == "pseudo") {
        job.run_pseudo = true;
      } else if (name == "logistic") {
        job.run_logistic = true;
      } else {
        throw ValidationError("unknown method '" + name + "' in 'methods'");
      }
    }
  }
  if (j.contains("quadrature")) {
    job.quad = parse_quad(j.at("quadrature"), "quadrature");
    job.quad_auto = false;
  }
  if (j.contains("rho")) job.rho = get_positive(j, "", "rho");
  return job;
}

GnzJob parse_gnz_config(const nlohmann::json& j) {
  check_keys(j, "", {"window", "model"}, {"quadrature"});
  const SpacetimeWindow window = parse_window(j.at("window"), "window");
  GeyerModel model = parse_model(j.at("model"), "model", window);
  GnzJob job{.window = window, .model = std::move(model), .quad = {}, .quad_auto = true};
  if (j.contains("quadrature")) {
    job.quad = parse_quad(j.at("quadrature"), "quadrature");
    job.quad_auto = false;
  }
  return job;
}

}  // namespace stgeyer
