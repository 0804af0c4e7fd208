#include "imlab/expert.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "imlab/rng.hpp"

namespace imlab {

Policy optimal_policy(const TabularMdp& mdp) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<Policy> steps(T, constant_policy(S, A, 0));
  std::vector<double> next_value(S, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    std::vector<double> value(S, 0.0);
    std::vector<ActionId> best(S, 0);
    for (StateId s = 0; s < S; ++s) {
      double best_q = 0.0;
      for (ActionId a = 0; a < A; ++a) {
        double q = mdp.cost(s, a);
        if (t + 1 < T) {
          const auto row = mdp.successors(s, a);
          for (StateId n = 0; n < S; ++n) q += row[n] * next_value[n];
        }
        if (a == 0 || q < best_q - 1e-12) {
          best_q = q;
          best[s] = a;
        }
      }
      value[s] = best_q;
    }
    steps[t] = Policy::deterministic(A, std::move(best));
    next_value = std::move(value);
  }
  return Policy::non_stationary(std::move(steps));
}

ExpertOracle::ExpertOracle(Policy policy, std::string label, std::uint64_t rng_seed)
    : policy_(std::move(policy)), label_(std::move(label)), seed_(rng_seed) {
  if (policy_.is_trajectory_mixture()) {
    throw std::invalid_argument("ExpertOracle: expert must be a Markov policy");
  }
}

ExpertOracle::ExpertOracle(ExpertOracle&& other) noexcept
    : policy_(other.policy_),
      label_(std::move(other.label_)),
      seed_(other.seed_),
      queries_(other.queries_.load()) {}

ActionId ExpertOracle::query(StateId s, int step) {
  if (s < 0 || s >= policy_.num_states()) {
    throw std::out_of_range("expert query: state " + std::to_string(s) + " out of range");
  }
  if (step < 0 || (policy_.horizon() != 0 && step >= policy_.horizon())) {
    throw std::out_of_range("expert query: step " + std::to_string(step) + " out of range");
  }
  const std::uint64_t k = queries_.fetch_add(1, std::memory_order_relaxed);
  if (policy_.is_deterministic()) {
    return policy_.action(step, s);
  }
  std::vector<double> dist(policy_.num_actions());
  policy_.distribution(step, s, dist);
  return sample_index(dist, uniform_at(seed_, k));
}

ExpertOracle optimal_expert(const TabularMdp& mdp) { return ExpertOracle(optimal_policy(mdp), "optimal"); }

namespace {

Policy flip_stationary(const Policy& p, double flip) {
  const int S = p.num_states();
  const int A = p.num_actions();
  std::vector<double> probs(static_cast<std::size_t>(S) * A, 0.0);
  const double other = A > 1 ? flip / (A - 1) : 0.0;
  const double keep = A > 1 ? 1.0 - flip : 1.0;
  for (StateId s = 0; s < S; ++s) {
    const ActionId chosen = p.action(0, s);
    for (ActionId a = 0; a < A; ++a) {
      probs[static_cast<std::size_t>(s) * A + a] = a == chosen ? keep : other;
    }
  }
  return Policy::stochastic(S, A, std::move(probs));
}

}  // namespace

Policy flip_policy(const Policy& deterministic, double flip_rate) {
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) {
    throw std::invalid_argument("flip rate must lie in [0,1]");
  }
  if (!deterministic.is_deterministic() || deterministic.kind() == PolicyKind::Mixture) {
    throw std::invalid_argument("flip_policy: input policy must be deterministic");
  }
  if (deterministic.kind() == PolicyKind::NonStationary) {
    std::vector<Policy> steps;
    steps.reserve(deterministic.steps().size());
    for (const auto& p : deterministic.steps()) steps.push_back(flip_stationary(p, flip_rate));
    return Policy::non_stationary(std::move(steps));
  }
  return flip_stationary(deterministic, flip_rate);
}

ExpertOracle corrupt_expert(const Policy& policy, double error_rate, std::uint64_t rng_seed) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
    throw std::invalid_argument("corrupt_expert: error_rate must lie in [0,1]");
  }
  std::ostringstream label;
  label << "corrupted:rate=" << error_rate;
  return ExpertOracle(flip_policy(policy, error_rate), label.str(), rng_seed);
}

std::vector<std::vector<bool>> reachable_states(const TabularMdp& mdp) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  std::vector<std::vector<bool>> reach(T, std::vector<bool>(S, false));
  for (StateId s = 0; s < S; ++s) reach[0][s] = mdp.initial()[s] > 0.0;
  for (int t = 0; t + 1 < T; ++t) {
    for (StateId s = 0; s < S; ++s) {
      if (!reach[t][s]) continue;
      for (ActionId a = 0; a < mdp.num_actions(); ++a) {
        const auto row = mdp.successors(s, a);
        for (StateId n = 0; n < S; ++n) {
          if (row[n] > 0.0) reach[t + 1][n] = true;
        }
      }
    }
  }
  return reach;
}

double compute_u(const TabularMdp& mdp, const Policy& expert) {
  const ActionTable table = action_table(expert, mdp.horizon());
  const QTable q = q_values(mdp, table);
  const auto reach = reachable_states(mdp);
  double u = 0.0;
  for (int t = 0; t < mdp.horizon(); ++t) {
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      if (!reach[t][s]) continue;
      double v = 0.0;
      for (ActionId a = 0; a < mdp.num_actions(); ++a) v += table(t, s, a) * q(t, s, a);
      for (ActionId a = 0; a < mdp.num_actions(); ++a) u = std::max(u, q(t, s, a) - v);
    }
  }
  return u;
}

QTable expert_disadvantage(const TabularMdp& mdp, const Policy& expert) {
  QTable q = q_values(mdp, expert);
  for (int t = 0; t < q.horizon(); ++t) {
    for (StateId s = 0; s < q.num_states(); ++s) {
      double best = q(t, s, 0);
      for (ActionId a = 1; a < q.num_actions(); ++a) best = std::min(best, q(t, s, a));
      for (ActionId a = 0; a < q.num_actions(); ++a) q(t, s, a) -= best;
    }
  }
  return q;
}

}  // namespace imlab
