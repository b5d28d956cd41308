#include "stgeyer/simulate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace stgeyer {

namespace detail {

StepRecord mh_transition(const GeyerModel& model, const SpacetimeWindow& window,
                         std::vector<EventPoint>& points, Rng& rng) {
  StepRecord rec;
  const double y1 = rng.uniform01();
  const double y2 = rng.uniform01();
  const double volume = window.volume();

  if (y1 <= 0.5) {
    rec.move = MoveType::birth;
    rec.proposed = true;
    EventPoint u{rng.uniform(window.x_range().lo, window.x_range().hi),
                 rng.uniform(window.y_range().lo, window.y_range().hi),
                 rng.uniform(window.t_range().lo, window.t_range().hi)};
    rec.point = u;
    const double lp = log_papangelou(model, points, u);
    const double lam = lp == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(lp);
    rec.hastings_ratio = volume / static_cast<double>(points.size() + 1) * lam;
    if (y2 < rec.hastings_ratio) {
      points.push_back(u);
      rec.accepted = true;
    }
  } else {
    rec.move = MoveType::death;
    if (points.empty()) return rec;  // nothing to delete; state unchanged
    rec.proposed = true;
    const auto n = points.size();
    auto idx = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
    if (idx >= n) idx = n - 1;
    rec.point = points[idx];
    // Conditional intensity of the victim given the full current state; its
    // reciprocal is the death acceptance ratio.
    const double lp = log_papangelou(model, points, rec.point);
    const double lam = lp == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(lp);
    rec.hastings_ratio = volume / static_cast<double>(n) * lam;
    if (y2 < 1.0 / rec.hastings_ratio) {
      points[idx] = points.back();
      points.pop_back();
      rec.accepted = true;
    }
  }
  return rec;
}

}  // namespace detail

PointPattern mh_step(const GeyerModel& model, const PointPattern& pattern, Rng& rng) {
  std::vector<EventPoint> points = pattern.points();
  detail::mh_transition(model, pattern.window(), points, rng);
  return PointPattern(std::move(points), pattern.window());
}

McmcTrace run_chain(const GeyerModel& model, const SpacetimeWindow& window,
                    const McmcConfig& config) {
  if (config.n_steps < 1) throw std::invalid_argument("n_steps must be positive");
  if (config.burn_in < 0 || config.burn_in > config.n_steps) {
    throw std::invalid_argument("burn_in must lie in [0, n_steps]");
  }
  if (config.thin < 1) throw std::invalid_argument("thin must be positive");

  Rng rng(config.seed);
  std::vector<EventPoint> points;
  if (config.init == McmcConfig::Init::poisson) {
    if (!(config.init_rate > 0.0) || !std::isfinite(config.init_rate)) {
      throw std::invalid_argument("poisson initial state needs a positive finite rate");
    }
    const auto n0 = rng.poisson(config.init_rate * window.volume());
    points.reserve(static_cast<std::size_t>(n0));
    for (std::int64_t i = 0; i < n0; ++i) {
      points.push_back({rng.uniform(window.x_range().lo, window.x_range().hi),
                        rng.uniform(window.y_range().lo, window.y_range().hi),
                        rng.uniform(window.t_range().lo, window.t_range().hi)});
    }
  }

  McmcTrace trace{.counts = {},
                  .moves = {},
                  .accepts = {},
                  .birth = {},
                  .death = {},
                  .thinned_counts = {},
                  .final_pattern = PointPattern({}, window)};
  trace.counts.reserve(static_cast<std::size_t>(config.n_steps));
  trace.moves.reserve(static_cast<std::size_t>(config.n_steps));
  trace.accepts.reserve(static_cast<std::size_t>(config.n_steps));

  for (std::int64_t step = 1; step <= config.n_steps; ++step) {
    const StepRecord rec = detail::mh_transition(model, window, points, rng);
    trace.counts.push_back(static_cast<std::int32_t>(points.size()));
    trace.moves.push_back(static_cast<std::uint8_t>(rec.move));
    trace.accepts.push_back(rec.accepted ? 1 : 0);
    auto& tally = rec.move == MoveType::birth ? trace.birth : trace.death;
    if (rec.proposed) {
      ++tally.proposed;
      if (rec.accepted) ++tally.accepted;
    }
    if (step > config.burn_in && (step - config.burn_in) % config.thin == 0) {
      trace.thinned_counts.push_back(static_cast<std::int32_t>(points.size()));
    }
  }

  trace.final_pattern = PointPattern(std::move(points), window);
  return trace;
}

}  // namespace stgeyer
