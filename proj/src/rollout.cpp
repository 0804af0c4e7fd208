#include "imlab/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace imlab {

PolicySampler::PolicySampler(const Policy& policy, int horizon) {
  if (policy.is_trajectory_mixture()) {
    weights_.assign(policy.weights().begin(), policy.weights().end());
    tables_.reserve(policy.components().size());
    for (const auto& c : policy.components()) tables_.push_back(action_table(c, horizon));
  } else {
    tables_.push_back(action_table(policy, horizon));
  }
}

void PolicySampler::begin_episode(CounterRng& rng) {
  if (!weights_.empty()) component_ = sample_index(weights_, rng.uniform());
}

ActionId PolicySampler::act(int step, StateId s, double u) const {
  return sample_index(tables_[component_].row(step, s), u);
}

Trajectory run_from(const TabularMdp& mdp, StateId start, int first_step, const ActionRule& rule,
                    CounterRng& rng) {
  const int T = mdp.horizon();
  if (first_step < 0 || first_step >= T) {
    throw std::invalid_argument("run_from: step out of range");
  }
  Trajectory traj;
  const std::size_t len = static_cast<std::size_t>(T - first_step);
  traj.states.reserve(len);
  traj.actions.reserve(len);
  traj.costs.reserve(len);
  StateId s = start;
  for (int t = first_step; t < T; ++t) {
    const ActionId a = rule(t, s, rng.uniform());
    const double u_next = rng.uniform();
    const double c = mdp.cost(s, a);
    traj.states.push_back(s);
    traj.actions.push_back(a);
    traj.costs.push_back(c);
    traj.total_cost += c;
    if (t + 1 < T) s = sample_index(mdp.successors(s, a), u_next);
  }
  return traj;
}

Trajectory run_episode(const TabularMdp& mdp, const ActionRule& rule, CounterRng& rng) {
  const StateId s0 = sample_index(mdp.initial(), rng.uniform());
  return run_from(mdp, s0, 0, rule, rng);
}

Trajectory rollout(const TabularMdp& mdp, const Policy& policy, std::uint64_t rng_seed) {
  check_compatible(mdp, policy);
  PolicySampler sampler(policy, mdp.horizon());
  CounterRng rng(rng_seed);
  sampler.begin_episode(rng);
  return run_episode(
      mdp, [&](int t, StateId s, double u) { return sampler.act(t, s, u); }, rng);
}

MonteCarloEstimate monte_carlo_cost(const TabularMdp& mdp, const Policy& policy, int n_rollouts,
                                    std::uint64_t rng_seed) {
  if (n_rollouts < 1) {
    throw std::invalid_argument("monte_carlo_cost: n_rollouts must be at least 1");
  }
  check_compatible(mdp, policy);
  PolicySampler sampler(policy, mdp.horizon());
  const ActionRule rule = [&](int t, StateId s, double u) { return sampler.act(t, s, u); };
  // Welford's update keeps the variance stable for long runs.
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n_rollouts; ++i) {
    CounterRng rng(derive_seed(rng_seed, {static_cast<std::uint64_t>(i)}));
    sampler.begin_episode(rng);
    const double x = run_episode(mdp, rule, rng).total_cost;
    const double delta = x - mean;
    mean += delta / (i + 1);
    m2 += delta * (x - mean);
  }
  MonteCarloEstimate out;
  out.mean = mean;
  if (n_rollouts > 1) {
    const double var = m2 / (n_rollouts - 1);
    out.std_error = std::sqrt(var / n_rollouts);
  }
  return out;
}

}  // namespace imlab
