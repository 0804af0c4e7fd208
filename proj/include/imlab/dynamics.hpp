#pragma once

#include <span>
#include <vector>

#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"

namespace imlab {

/// Per-step state distributions d^t (t = 0..T-1) and their average.
struct StateDistributionSchedule {
  std::vector<std::vector<double>> per_step;
  std::vector<double> average;

  int horizon() const noexcept { return static_cast<int>(per_step.size()); }
  int num_states() const noexcept { return static_cast<int>(average.size()); }

  /// Builds the average from per_step.
  static StateDistributionSchedule from_steps(std::vector<std::vector<double>> per_step);
  /// sum_k w_k * schedule_k, step by step.
  static StateDistributionSchedule weighted_sum(std::span<const double> weights,
                                                std::span<const StateDistributionSchedule> parts);
};

/// Expected cost-to-go Q(t, s, a) of taking a in s at step t, then following
/// the table's policy until the horizon. Steps are 0-based, so values(T-1, s, a)
/// is the immediate cost.
class QTable {
 public:
  QTable(int horizon, int num_states, int num_actions);

  int horizon() const noexcept { return horizon_; }
  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }

  double operator()(int step, StateId s, ActionId a) const { return values_[index(step, s, a)]; }
  double& operator()(int step, StateId s, ActionId a) { return values_[index(step, s, a)]; }

  /// Largest entry (Q_max).
  double max_value() const;

 private:
  std::size_t index(int step, StateId s, ActionId a) const {
    return (static_cast<std::size_t>(step) * num_states_ + s) * num_actions_ + a;
  }
  int horizon_;
  int num_states_;
  int num_actions_;
  std::vector<double> values_;
};

/// Forward recursion d^0 = I, d^{t+1}(s') = sum_{s,a} d^t(s) pi_t(a|s) B(s,a,s').
/// Trajectory mixtures return the weighted sum of their components' schedules.
StateDistributionSchedule exact_state_distributions(const TabularMdp& mdp, const Policy& policy);
StateDistributionSchedule exact_state_distributions(const TabularMdp& mdp, const ActionTable& table);

/// Expected per-step cost E[C(s_t, a_t)] for t = 0..T-1.
std::vector<double> expected_step_costs(const TabularMdp& mdp, const Policy& policy);

/// J(pi): expected total cost over the horizon, in [0, T].
double exact_cost(const TabularMdp& mdp, const Policy& policy);
double exact_cost(const TabularMdp& mdp, const ActionTable& table);

/// Backward recursion from the last step. Trajectory mixtures are rejected.
QTable q_values(const TabularMdp& mdp, const Policy& policy);
QTable q_values(const TabularMdp& mdp, const ActionTable& table);

/// V(t, s) = sum_a pi_t(a|s) Q(t, s, a), with V(T, .) = 0 appended.
std::vector<std::vector<double>> state_values(const QTable& q, const ActionTable& table);

/// One step of the forward recursion: sum_{s,a} d(s) row_t(a|s) B(s,a,.).
std::vector<double> propagate(const TabularMdp& mdp, std::span<const double> dist,
                              const ActionTable& table, int step);

}  // namespace imlab
