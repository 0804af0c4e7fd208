#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"
#include "imlab/rng.hpp"

namespace imlab {

struct Trajectory {
  std::vector<StateId> states;
  std::vector<ActionId> actions;
  std::vector<double> costs;
  double total_cost = 0.0;

  int length() const noexcept { return static_cast<int>(states.size()); }
};

/// Samples actions from a policy with the inverse-CDF rule. Markov policies
/// are tabulated once; trajectory mixtures keep one table per component and
/// fix the component at begin_episode.
class PolicySampler {
 public:
  PolicySampler(const Policy& policy, int horizon);

  /// Consumes one uniform when the policy is a trajectory mixture, none otherwise.
  void begin_episode(CounterRng& rng);
  ActionId act(int step, StateId s, double u) const;

  /// Component chosen for the current episode (0 for non-mixtures).
  int component() const noexcept { return component_; }

 private:
  std::vector<double> weights_;
  std::vector<ActionTable> tables_;
  int component_ = 0;
};

/// Chooses the action at (step, state) from one uniform in [0, 1).
using ActionRule = std::function<ActionId(int step, StateId s, double u)>;

/// Runs one T-step episode. Stream layout: one uniform for the initial state,
/// then per step one uniform for the action and one for the transition (the
/// last transition uniform is drawn and discarded so every step consumes two).
Trajectory run_episode(const TabularMdp& mdp, const ActionRule& rule, CounterRng& rng);

/// Same as run_episode but starts at a fixed state at `first_step` and runs to
/// the horizon. Used for continuation rollouts.
Trajectory run_from(const TabularMdp& mdp, StateId start, int first_step, const ActionRule& rule,
                    CounterRng& rng);

/// Samples one trajectory of `policy`. A trajectory mixture draws its
/// component before the initial state.
Trajectory rollout(const TabularMdp& mdp, const Policy& policy, std::uint64_t rng_seed);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Rollout i uses derive_seed(rng_seed, {i}). std_error is 0 when n = 1.
MonteCarloEstimate monte_carlo_cost(const TabularMdp& mdp, const Policy& policy, int n_rollouts,
                                    std::uint64_t rng_seed);

}  // namespace imlab
