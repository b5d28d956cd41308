#pragma once

#include <cstdint>
#include <vector>

#include "stgeyer/geometry.hpp"
#include "stgeyer/model.hpp"
#include "stgeyer/rng.hpp"

namespace stgeyer {

struct McmcConfig {
  std::int64_t n_steps = 20000;
  std::int64_t burn_in = 0;  // must not exceed n_steps
  std::uint64_t seed = 0;
  enum class Init { empty, poisson } init = Init::empty;
  double init_rate = 0.0;    // intensity of the Poisson initial state
  std::int64_t thin = 100;   // post burn-in thinning interval for diagnostics
};

enum class MoveType : std::uint8_t { birth = 0, death = 1 };

/// What one transition proposed and how it was resolved. A death drawn on an
/// empty state has proposed=false (no point to delete; state unchanged).
struct StepRecord {
  MoveType move = MoveType::birth;
  bool proposed = false;
  bool accepted = false;
  EventPoint point{};       // birth candidate or death victim
  double hastings_ratio = 0.0;
};

struct MoveCounts {
  std::int64_t proposed = 0;
  std::int64_t accepted = 0;
};

struct McmcTrace {
  std::vector<std::int32_t> counts;       // point count after each step
  std::vector<std::uint8_t> moves;        // MoveType per step
  std::vector<std::uint8_t> accepts;      // acceptance flag per step
  MoveCounts birth;
  MoveCounts death;
  std::vector<std::int32_t> thinned_counts;  // post burn-in, every `thin` steps
  PointPattern final_pattern;
};

namespace detail {
/// One birth-death transition applied in place. Draw order is fixed:
/// two uniforms decide branch and acceptance, then the branch-specific
/// draws (three coordinates for a birth, one index draw for a death).
StepRecord mh_transition(const GeyerModel& model, const SpacetimeWindow& window,
                         std::vector<EventPoint>& points, Rng& rng);
}  // namespace detail

/// One transition as a pure function on patterns.
PointPattern mh_step(const GeyerModel& model, const PointPattern& pattern, Rng& rng);

/// Run a seeded chain from the configured initial state and record its trace.
McmcTrace run_chain(const GeyerModel& model, const SpacetimeWindow& window,
                    const McmcConfig& config);

}  // namespace stgeyer
