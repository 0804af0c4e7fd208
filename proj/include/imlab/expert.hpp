#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "imlab/dynamics.hpp"
#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"

namespace imlab {

/// Backward induction. Returns a deterministic non-stationary policy; an
/// action replaces the incumbent only if it is better by more than 1e-12, so
/// ties go to the lowest index.
Policy optimal_policy(const TabularMdp& mdp);

/// Answers action queries on behalf of an expert policy and counts them.
///
/// The counter is atomic so rollouts may query concurrently. A stochastic
/// expert (see corrupt_expert) answers query k with uniform draw k of its own
/// stream, so answers depend only on the query order.
class ExpertOracle {
 public:
  ExpertOracle(Policy policy, std::string label, std::uint64_t rng_seed = 0);
  ExpertOracle(ExpertOracle&& other) noexcept;
  ExpertOracle(const ExpertOracle&) = delete;
  ExpertOracle& operator=(const ExpertOracle&) = delete;

  const Policy& policy() const noexcept { return policy_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t query_count() const noexcept { return queries_.load(std::memory_order_relaxed); }

  /// Action the expert wants at (state, step). Counts as one query.
  ActionId query(StateId s, int step);

 private:
  Policy policy_;
  std::string label_;
  std::uint64_t seed_;
  std::atomic<std::uint64_t> queries_{0};
};

/// Oracle for the optimal policy of `mdp`, labelled "optimal".
ExpertOracle optimal_expert(const TabularMdp& mdp);

/// Plays the original action with probability 1 - error_rate and each other
/// action with probability error_rate / (A - 1).
ExpertOracle corrupt_expert(const Policy& policy, double error_rate, std::uint64_t rng_seed);

/// Stochastic policy obtained from a deterministic one by the same flip rule
/// as corrupt_expert. Non-stationary inputs stay non-stationary.
Policy flip_policy(const Policy& deterministic, double flip_rate);

/// States reachable at each step from the support of I under arbitrary actions.
std::vector<std::vector<bool>> reachable_states(const TabularMdp& mdp);

/// u = max over reachable (t, s) and all actions a of Q*(t,s,a) - V*(t,s),
/// where V* averages Q* under the expert (Q*(t,s,pi*(s)) for a deterministic one).
double compute_u(const TabularMdp& mdp, const Policy& expert);

/// Q*-disadvantage table: C(t, s, a) = Q*(t,s,a) - min_b Q*(t,s,b).
QTable expert_disadvantage(const TabularMdp& mdp, const Policy& expert);

}  // namespace imlab
