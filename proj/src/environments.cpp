#include "imlab/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "imlab/rng.hpp"

namespace imlab {

TabularMdp build_gridworld(const GridworldParams& p, int horizon) {
  if (p.width < 1 || p.height < 1) {
    throw std::invalid_argument("gridworld: width and height must be positive");
  }
  const int gx = p.goal_x < 0 ? p.width - 1 - p.start_x : p.goal_x;
  const int gy = p.goal_y < 0 ? p.height - 1 - p.start_y : p.goal_y;
  if (gx < 0 || gx >= p.width || gy < 0 || gy >= p.height) {
    throw std::invalid_argument("gridworld: goal lies outside the grid");
  }
  if (p.start_x < 0 || p.start_x >= p.width || p.start_y < 0 || p.start_y >= p.height) {
    throw std::invalid_argument("gridworld: start lies outside the grid");
  }
  if (!(p.slip >= 0.0 && p.slip < 1.0)) {
    throw std::invalid_argument("gridworld: slip must lie in [0,1)");
  }
  if (!(p.step_cost >= 0.0 && p.step_cost <= 1.0)) {
    throw std::invalid_argument("gridworld: step_cost must lie in [0,1]");
  }
  const int S = p.width * p.height;
  const int A = 4;
  const int goal = gy * p.width + gx;
  constexpr int dx[4] = {0, 1, 0, -1};
  constexpr int dy[4] = {-1, 0, 1, 0};
  const auto move = [&](int s, int dir) {
    const int x = s % p.width + dx[dir];
    const int y = s / p.width + dy[dir];
    if (x < 0 || x >= p.width || y < 0 || y >= p.height) return s;
    return y * p.width + x;
  };
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  std::vector<double> cost(static_cast<std::size_t>(S) * A, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double* row = transition.data() + (static_cast<std::size_t>(s) * A + a) * S;
      if (s == goal) {
        row[s] = 1.0;
        continue;
      }
      cost[static_cast<std::size_t>(s) * A + a] = p.step_cost;
      row[move(s, a)] += 1.0 - p.slip;
      if (p.slip > 0.0) {
        row[move(s, (a + 1) % 4)] += p.slip / 2;
        row[move(s, (a + 3) % 4)] += p.slip / 2;
      }
    }
  }
  std::vector<double> initial(S, 0.0);
  initial[p.start_y * p.width + p.start_x] = 1.0;
  TabularMdp mdp(S, A, horizon, std::move(transition), std::move(cost), std::move(initial));
  require_valid(mdp);
  return mdp;
}

TabularMdp build_cliffwalk(const CliffwalkParams& p, int horizon) {
  if (p.length < 2) {
    throw std::invalid_argument("cliffwalk: length must be at least 2");
  }
  if (!(p.fall_cost > 0.0 && p.fall_cost <= 1.0)) {
    throw std::invalid_argument("cliffwalk: fall_cost must lie in (0,1]");
  }
  const int L = p.length;
  const int S = 2 * L;
  const int A = 2;
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  std::vector<double> cost(static_cast<std::size_t>(S) * A, 0.0);
  const auto set = [&](int s, int a, int next) {
    transition[(static_cast<std::size_t>(s) * A + a) * S + next] = 1.0;
  };
  for (int pos = 0; pos < L; ++pos) {
    const int next = std::min(pos + 1, L - 1);
    set(pos, 0, next);
    set(pos, 1, L + next);
    set(L + pos, 0, L + next);
    set(L + pos, 1, p.recoverable ? next : L + next);
    cost[static_cast<std::size_t>(L + pos) * A + 0] = p.fall_cost;
    cost[static_cast<std::size_t>(L + pos) * A + 1] = p.fall_cost;
  }
  std::vector<double> initial(S, 0.0);
  initial[0] = 1.0;
  TabularMdp mdp(S, A, horizon, std::move(transition), std::move(cost), std::move(initial));
  require_valid(mdp);
  return mdp;
}

TabularMdp build_random_mdp(const RandomMdpParams& p, std::uint64_t seed, int horizon) {
  const int S = p.num_states;
  const int A = p.num_actions;
  if (S < 1 || A < 1) {
    throw std::invalid_argument("random mdp: state and action counts must be positive");
  }
  if (!(p.density > 0.0 && p.density <= 1.0) || p.density * S < 1.0 - 1e-12) {
    throw std::invalid_argument("random mdp: density must lie in (0,1] with density * num_states >= 1");
  }
  if (!(p.cost_density >= 0.0 && p.cost_density <= 1.0)) {
    throw std::invalid_argument("random mdp: cost_density must lie in [0,1]");
  }
  // The small offset keeps e.g. 0.3 * 10 from rounding up to 4.
  const int k = std::min(S, static_cast<int>(std::ceil(p.density * S - 1e-9)));
  CounterRng rng(seed);
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  std::vector<int> order(S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < k; ++i) {
        const int j = i + rng.below(S - i);
        std::swap(order[i], order[j]);
      }
      std::vector<double> w(k);
      double total = 0.0;
      for (int i = 0; i < k; ++i) {
        w[i] = 1.0 - rng.uniform();
        total += w[i];
      }
      double* row = transition.data() + (static_cast<std::size_t>(s) * A + a) * S;
      for (int i = 0; i < k; ++i) row[order[i]] = w[i] / total;
    }
  }
  std::vector<double> cost(static_cast<std::size_t>(S) * A);
  for (double& c : cost) {
    c = rng.uniform();
    if (p.cost_density < 1.0 && !(rng.uniform() < p.cost_density)) c = 0.0;
  }
  std::vector<double> initial(S);
  double total = 0.0;
  for (double& v : initial) {
    v = 1.0 - rng.uniform();
    total += v;
  }
  for (double& v : initial) v /= total;
  TabularMdp mdp(S, A, horizon, std::move(transition), std::move(cost), std::move(initial));
  require_valid(mdp);
  return mdp;
}

TabularMdp build_env(const EnvSpec& spec) {
  switch (spec.family) {
    case EnvFamily::Gridworld:
      return build_gridworld(spec.gridworld, spec.horizon);
    case EnvFamily::Cliffwalk:
      return build_cliffwalk(spec.cliffwalk, spec.horizon);
    case EnvFamily::Random:
      return build_random_mdp(spec.random, spec.seed, spec.horizon);
  }
  throw std::invalid_argument("unknown environment family");
}

std::string env_name(const EnvSpec& spec) {
  switch (spec.family) {
    case EnvFamily::Gridworld:
      return "gridworld" + std::to_string(spec.gridworld.width) + "x" + std::to_string(spec.gridworld.height);
    case EnvFamily::Cliffwalk:
      return "cliffwalk" + std::to_string(spec.cliffwalk.length);
    case EnvFamily::Random:
      return "random" + std::to_string(spec.random.num_states) + "x" + std::to_string(spec.random.num_actions);
  }
  return "unknown";
}

std::string to_string(EnvFamily family) {
  switch (family) {
    case EnvFamily::Gridworld:
      return "gridworld";
    case EnvFamily::Cliffwalk:
      return "cliffwalk";
    case EnvFamily::Random:
      return "random";
  }
  return "unknown";
}

EnvFamily env_family_from_string(const std::string& name) {
  if (name == "gridworld") return EnvFamily::Gridworld;
  if (name == "cliffwalk") return EnvFamily::Cliffwalk;
  if (name == "random") return EnvFamily::Random;
  throw std::invalid_argument("unknown environment family '" + name + "' (expected gridworld, cliffwalk or random)");
}

}  // namespace imlab
