#pragma once

#include <span>
#include <string>
#include <vector>

namespace imlab {

using StateId = int;
using ActionId = int;

/// Construction-time tolerance for probability normalization.
inline constexpr double kConstructionTol = 1e-12;
/// Tolerance for quantities derived through accumulated arithmetic.
inline constexpr double kDerivedTol = 1e-10;

/// Finite-horizon tabular MDP with per-step costs in [0, 1].
///
/// The decision process runs for `horizon()` steps, indexed 0..T-1 in code.
/// Costs are minimized; a "reward" in the usual sense is 1 - cost.
/// Storage is dense: transition(s, a, s') lives at ((s * A) + a) * S + s'.
class TabularMdp {
 public:
  /// Checks table sizes only. Use validate_mdp / require_valid for the
  /// probability and range invariants.
  TabularMdp(int num_states, int num_actions, int horizon, std::vector<double> transition,
             std::vector<double> cost, std::vector<double> initial);

  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  int horizon() const noexcept { return horizon_; }

  double transition(StateId s, ActionId a, StateId next) const {
    return transition_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next];
  }
  /// Successor distribution B(s, a, .).
  std::span<const double> successors(StateId s, ActionId a) const {
    return {transition_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_,
            static_cast<std::size_t>(num_states_)};
  }
  double cost(StateId s, ActionId a) const {
    return cost_[static_cast<std::size_t>(s) * num_actions_ + a];
  }
  std::span<const double> initial() const noexcept { return initial_; }

  const std::vector<double>& transition_table() const noexcept { return transition_; }
  const std::vector<double>& cost_table() const noexcept { return cost_; }

  /// Same dynamics with a different horizon.
  TabularMdp with_horizon(int horizon) const;

  bool operator==(const TabularMdp&) const = default;

 private:
  int num_states_;
  int num_actions_;
  int horizon_;
  std::vector<double> transition_;
  std::vector<double> cost_;
  std::vector<double> initial_;
};

struct Violation {
  std::string constraint;
  std::vector<int> index;

  std::string message() const;
};

/// Empty iff every TabularMdp invariant holds.
std::vector<Violation> validate_mdp(const TabularMdp& mdp);

/// Throws std::invalid_argument listing the first violations, if any.
void require_valid(const TabularMdp& mdp);

}  // namespace imlab
