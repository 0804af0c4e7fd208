#include "imlab/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

namespace imlab {

StateDistributionSchedule StateDistributionSchedule::from_steps(std::vector<std::vector<double>> per_step) {
  StateDistributionSchedule out;
  if (per_step.empty()) {
    throw std::invalid_argument("StateDistributionSchedule: no steps");
  }
  const std::size_t S = per_step.front().size();
  out.average.assign(S, 0.0);
  for (const auto& d : per_step) {
    for (std::size_t s = 0; s < S; ++s) out.average[s] += d[s];
  }
  const double inv_t = 1.0 / static_cast<double>(per_step.size());
  for (double& v : out.average) v *= inv_t;
  out.per_step = std::move(per_step);
  return out;
}

StateDistributionSchedule StateDistributionSchedule::weighted_sum(
    std::span<const double> weights, std::span<const StateDistributionSchedule> parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    throw std::invalid_argument("StateDistributionSchedule::weighted_sum: misaligned inputs");
  }
  const int T = parts.front().horizon();
  const int S = parts.front().num_states();
  std::vector<std::vector<double>> steps(T, std::vector<double>(S, 0.0));
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) steps[t][s] += weights[k] * parts[k].per_step[t][s];
    }
  }
  return from_steps(std::move(steps));
}

QTable::QTable(int horizon, int num_states, int num_actions)
    : horizon_(horizon),
      num_states_(num_states),
      num_actions_(num_actions),
      values_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

double QTable::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

std::vector<double> propagate(const TabularMdp& mdp, std::span<const double> dist,
                              const ActionTable& table, int step) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<double> next(S, 0.0);
  for (StateId s = 0; s < S; ++s) {
    if (dist[s] == 0.0) continue;
    for (ActionId a = 0; a < A; ++a) {
      const double w = dist[s] * table(step, s, a);
      if (w == 0.0) continue;
      const auto row = mdp.successors(s, a);
      for (StateId n = 0; n < S; ++n) next[n] += w * row[n];
    }
  }
  return next;
}

StateDistributionSchedule exact_state_distributions(const TabularMdp& mdp, const ActionTable& table) {
  const int T = mdp.horizon();
  std::vector<std::vector<double>> steps;
  steps.reserve(T);
  steps.emplace_back(mdp.initial().begin(), mdp.initial().end());
  for (int t = 0; t + 1 < T; ++t) {
    steps.push_back(propagate(mdp, steps.back(), table, t));
  }
  return StateDistributionSchedule::from_steps(std::move(steps));
}

StateDistributionSchedule exact_state_distributions(const TabularMdp& mdp, const Policy& policy) {
  check_compatible(mdp, policy);
  if (policy.is_trajectory_mixture()) {
    std::vector<StateDistributionSchedule> parts;
    parts.reserve(policy.components().size());
    for (const auto& c : policy.components()) parts.push_back(exact_state_distributions(mdp, c));
    return StateDistributionSchedule::weighted_sum(policy.weights(), parts);
  }
  return exact_state_distributions(mdp, action_table(policy, mdp.horizon()));
}

namespace {

std::vector<double> step_costs(const TabularMdp& mdp, const ActionTable& table) {
  const auto sched = exact_state_distributions(mdp, table);
  std::vector<double> out(mdp.horizon(), 0.0);
  for (int t = 0; t < mdp.horizon(); ++t) {
    double c = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      const double d = sched.per_step[t][s];
      if (d == 0.0) continue;
      double expected = 0.0;
      for (ActionId a = 0; a < mdp.num_actions(); ++a) expected += table(t, s, a) * mdp.cost(s, a);
      c += d * expected;
    }
    out[t] = c;
  }
  return out;
}

}  // namespace

std::vector<double> expected_step_costs(const TabularMdp& mdp, const Policy& policy) {
  check_compatible(mdp, policy);
  if (policy.is_trajectory_mixture()) {
    std::vector<double> out(mdp.horizon(), 0.0);
    for (std::size_t k = 0; k < policy.components().size(); ++k) {
      const auto part = expected_step_costs(mdp, policy.components()[k]);
      for (int t = 0; t < mdp.horizon(); ++t) out[t] += policy.weights()[k] * part[t];
    }
    return out;
  }
  return step_costs(mdp, action_table(policy, mdp.horizon()));
}

double exact_cost(const TabularMdp& mdp, const ActionTable& table) {
  double total = 0.0;
  for (double c : step_costs(mdp, table)) total += c;
  return total;
}

double exact_cost(const TabularMdp& mdp, const Policy& policy) {
  check_compatible(mdp, policy);
  if (policy.is_trajectory_mixture()) {
    double total = 0.0;
    for (std::size_t k = 0; k < policy.components().size(); ++k) {
      total += policy.weights()[k] * exact_cost(mdp, policy.components()[k]);
    }
    return total;
  }
  return exact_cost(mdp, action_table(policy, mdp.horizon()));
}

QTable q_values(const TabularMdp& mdp, const ActionTable& table) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  QTable q(T, S, A);
  std::vector<double> next_value(S, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    std::vector<double> value(S, 0.0);
    for (StateId s = 0; s < S; ++s) {
      for (ActionId a = 0; a < A; ++a) {
        double future = 0.0;
        if (t + 1 < T) {
          const auto row = mdp.successors(s, a);
          for (StateId n = 0; n < S; ++n) future += row[n] * next_value[n];
        }
        q(t, s, a) = mdp.cost(s, a) + future;
        value[s] += table(t, s, a) * q(t, s, a);
      }
    }
    next_value = std::move(value);
  }
  return q;
}

QTable q_values(const TabularMdp& mdp, const Policy& policy) {
  check_compatible(mdp, policy);
  if (policy.is_trajectory_mixture()) {
    throw std::invalid_argument("q_values: not defined for trajectory mixtures; evaluate components separately");
  }
  return q_values(mdp, action_table(policy, mdp.horizon()));
}

std::vector<std::vector<double>> state_values(const QTable& q, const ActionTable& table) {
  std::vector<std::vector<double>> v(q.horizon() + 1, std::vector<double>(q.num_states(), 0.0));
  for (int t = 0; t < q.horizon(); ++t) {
    for (StateId s = 0; s < q.num_states(); ++s) {
      double acc = 0.0;
      for (ActionId a = 0; a < q.num_actions(); ++a) acc += table(t, s, a) * q(t, s, a);
      v[t][s] = acc;
    }
  }
  return v;
}

}  // namespace imlab
