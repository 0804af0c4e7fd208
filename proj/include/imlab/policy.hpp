#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "imlab/mdp.hpp"

namespace imlab {

enum class PolicyKind { DeterministicStationary, StochasticStationary, NonStationary, Mixture };

/// How a Mixture picks its component. Trajectory draws one component per
/// episode and keeps it; PerStep redraws at every step (equivalent to a
/// Markov policy whose action distribution is the weighted average).
enum class MixingMode { Trajectory, PerStep };

std::string_view to_string(PolicyKind kind);
std::string_view to_string(MixingMode mode);
MixingMode mixing_mode_from_string(std::string_view name);

/// Decision rule over a tabular MDP's state/action spaces.
///
/// Policies are immutable values backed by shared storage, so copies are
/// cheap and instances may be shared across threads. Steps are 0-based.
/// Nested mixtures with the same mixing mode are flattened on construction.
class Policy {
 public:
  static Policy deterministic(int num_actions, std::vector<ActionId> actions);
  static Policy stochastic(int num_states, int num_actions, std::vector<double> probs);
  static Policy uniform(int num_states, int num_actions);
  /// One stationary sub-policy per step.
  static Policy non_stationary(std::vector<Policy> steps);
  static Policy mixture(std::vector<double> weights, std::vector<Policy> components,
                        MixingMode mode = MixingMode::Trajectory);

  PolicyKind kind() const noexcept;
  int num_states() const noexcept;
  int num_actions() const noexcept;
  /// Number of sub-policies for a non-stationary rule, 0 when the rule does
  /// not depend on the step.
  int horizon() const noexcept;

  bool is_stationary() const noexcept;
  /// True when every step's action is a point mass.
  bool is_deterministic() const noexcept;
  /// True for trajectory-level mixtures, whose per-step action distribution
  /// is not Markov in the state.
  bool is_trajectory_mixture() const noexcept;

  /// Action of a deterministic rule. Throws std::logic_error otherwise.
  ActionId action(int step, StateId s) const;
  /// pi_step(a | s). Not defined for trajectory mixtures.
  double probability(int step, StateId s, ActionId a) const;
  /// Fills out[a] = pi_step(a | s). Not defined for trajectory mixtures.
  void distribution(int step, StateId s, std::span<double> out) const;

  /// Stationary rule used at `step` (the policy itself when stationary).
  Policy step_policy(int step) const;

  // Raw access by kind.
  std::span<const ActionId> actions() const;
  std::span<const double> probabilities() const;
  const std::vector<Policy>& steps() const;
  std::span<const double> weights() const;
  const std::vector<Policy>& components() const;
  MixingMode mixing() const;

  /// Structural equality (same kind, same tables, same weights).
  bool operator==(const Policy& other) const;

 private:
  struct Rep;
  explicit Policy(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const Rep> rep_;
};

/// Dense T x S x A table of action probabilities for a Markov policy.
class ActionTable {
 public:
  ActionTable(int horizon, int num_states, int num_actions);

  int horizon() const noexcept { return horizon_; }
  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }

  double operator()(int step, StateId s, ActionId a) const { return probs_[index(step, s) + a]; }
  double& operator()(int step, StateId s, ActionId a) { return probs_[index(step, s) + a]; }
  std::span<const double> row(int step, StateId s) const {
    return {probs_.data() + index(step, s), static_cast<std::size_t>(num_actions_)};
  }
  std::span<double> row(int step, StateId s) {
    return {probs_.data() + index(step, s), static_cast<std::size_t>(num_actions_)};
  }

 private:
  std::size_t index(int step, StateId s) const {
    return (static_cast<std::size_t>(step) * num_states_ + s) * num_actions_;
  }
  int horizon_;
  int num_states_;
  int num_actions_;
  std::vector<double> probs_;
};

/// Throws std::invalid_argument if the policy's spaces or step count do not
/// fit the MDP.
void check_compatible(const TabularMdp& mdp, const Policy& policy);

/// Tabulates a Markov policy over `horizon` steps. Throws std::invalid_argument
/// for trajectory mixtures.
ActionTable action_table(const Policy& policy, int horizon);

/// Deterministic stationary policy that plays `action` everywhere.
Policy constant_policy(int num_states, int num_actions, ActionId action);

}  // namespace imlab
