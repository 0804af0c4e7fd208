#pragma once

#include <cstdint>
#include <string>

#include "imlab/mdp.hpp"

namespace imlab {

/// Grid cells are numbered y * width + x. Actions: 0 = N (y - 1), 1 = E (x + 1),
/// 2 = S (y + 1), 3 = W (x - 1). Moves into a wall leave the agent in place.
struct GridworldParams {
  int width = 5;
  int height = 5;
  /// Negative coordinates mean the corner opposite the start.
  int goal_x = -1;
  int goal_y = -1;
  int start_x = 0;
  int start_y = 0;
  /// Probability of moving perpendicular to the intended direction, split
  /// evenly between the two sides.
  double slip = 0.1;
  /// Cost of every step taken outside the goal. The goal is absorbing and free.
  double step_cost = 1.0;
};

TabularMdp build_gridworld(const GridworldParams& params, int horizon);

/// A corridor c_0..c_{L-1} (ids 0..L-1) beside a fallen lane f_0..f_{L-1}
/// (ids L..2L-1). Every step advances the position, capped at L - 1. In the
/// corridor a0 stays on it and a1 falls; in the fallen lane a0 stays fallen
/// and a1 climbs back when `recoverable` is set. Corridor steps cost 0,
/// fallen steps cost fall_cost.
struct CliffwalkParams {
  int length = 25;
  double fall_cost = 1.0;
  bool recoverable = true;
};

TabularMdp build_cliffwalk(const CliffwalkParams& params, int horizon);

struct RandomMdpParams {
  int num_states = 3;
  int num_actions = 2;
  /// Fraction of states reachable from each (s, a): ceil(density * S) successors.
  double density = 1.0;
  /// Probability that a cost entry is non-zero.
  double cost_density = 1.0;
};

/// Deterministic given the seed. Draw order: successor sets and weights row
/// by row, then costs, then the initial distribution.
TabularMdp build_random_mdp(const RandomMdpParams& params, std::uint64_t seed, int horizon);

enum class EnvFamily { Gridworld, Cliffwalk, Random };

struct EnvSpec {
  EnvFamily family = EnvFamily::Gridworld;
  int horizon = 12;
  std::uint64_t seed = 0;
  GridworldParams gridworld;
  CliffwalkParams cliffwalk;
  RandomMdpParams random;
};

TabularMdp build_env(const EnvSpec& spec);
/// Short tag used in result tables, e.g. "gridworld5x5", "cliffwalk25", "random3x2".
std::string env_name(const EnvSpec& spec);
std::string to_string(EnvFamily family);
EnvFamily env_family_from_string(const std::string& name);

}  // namespace imlab
