#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imlab/expert.hpp"
#include "imlab/learners.hpp"
#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"
#include "imlab/rng.hpp"
#include "imlab/rollout.hpp"

namespace imlab {

enum class Algorithm { SupervisedBC, ForwardTraining, Searn, Smile, Rail, Dagger, Aggrevate };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);

/// Knobs shared by all procedures. Unset optionals take the algorithm's default.
struct Hyperparameters {
  std::optional<int> iterations;
  /// SMILe mixing rate. Default 1/T^2. Also the alpha echoed in AggreVaTe's bound.
  std::optional<double> alpha;
  /// SEARN interpolation weight of each new classifier.
  double beta = 0.3;
  /// AggreVaTe expert mixing: "first" (beta_i = 1 only at i = 1) or
  /// "geometric" (beta_i = beta_decay^(i-1)).
  std::string beta_schedule = "first";
  double beta_decay = 0.5;
  /// Trajectories sampled per iteration (BC, Forward Training, SEARN, SMILe, DAgger).
  int rollouts_per_iter = 5;
  /// DAgger coaching: hope-action labels with lambda_i = lambda0 * lambda_decay^(i-1).
  bool coaching = false;
  double lambda0 = 1.0;
  double lambda_decay = 0.9;
  /// AggreVaTe sub-rollouts (m) and RAIL active-learning budget per iteration.
  int samples_per_iter = 100;
  /// SEARN Monte-Carlo continuations per action, used when S*A*T exceeds the threshold.
  int searn_continuations = 5;
  int searn_exact_threshold = 5000;
  /// RAIL's nominal (eps, delta) passed to the active learner.
  double rail_eps = 0.1;
  double rail_delta = 0.1;
  /// RAIL's initial policy: "default" (learner fallback action) or "expert".
  std::string rail_init = "default";
  /// Choose the returned DAgger/AggreVaTe snapshot by Monte-Carlo rollouts
  /// instead of exact evaluation.
  bool rollout_validation = false;
  int validation_rollouts = 200;
  MixingMode mixing = MixingMode::Trajectory;
  std::uint64_t seed = 0;

  /// Key/value echo of every field, in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Policies produced during a run. Id 0 is always the expert.
class PolicyStore {
 public:
  explicit PolicyStore(Policy expert) { policies_.push_back(std::move(expert)); }
  int add(Policy p) {
    policies_.push_back(std::move(p));
    return static_cast<int>(policies_.size()) - 1;
  }
  const Policy& get(int id) const { return policies_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return policies_.size(); }
  const std::vector<Policy>& all() const noexcept { return policies_; }

 private:
  std::vector<Policy> policies_;
};

struct IterationRecord {
  int iteration = 0;
  /// Policy trained in this iteration.
  int policy_id = -1;
  /// Policy whose trajectories produced this iteration's data (-1 if none).
  int executed_policy_id = -1;
  double J_exact = 0.0;
  double eps = 0.0;
  /// Which state distribution eps was measured under.
  std::string eps_distribution;
  std::uint64_t expert_queries = 0;
  std::size_t dataset_size = 0;
  std::map<std::string, double> extra;
  /// DAgger coaching: hope-action labels, T*S entries indexed t*S + s.
  std::vector<int> targets;
};

struct RunTrace {
  Algorithm algorithm = Algorithm::SupervisedBC;
  std::vector<std::pair<std::string, std::string>> hyperparameters;
  std::string learner;
  std::string expert_label;
  std::vector<IterationRecord> iterations;
  int final_policy_id = -1;
  /// Run-level quantities (mixing weights, per-run aggregates).
  std::map<std::string, double> scalars;
  /// Mixture carriers (SEARN, SMILe): component ids with final weights.
  std::vector<int> mixture_ids;
  std::vector<double> mixture_weights;
};

struct RunResult {
  RunTrace trace;
  PolicyStore store;
  /// Aggregated training set at the end of the run (DAgger, AggreVaTe).
  std::optional<Dataset> dataset;
  const Policy& final_policy() const { return store.get(trace.final_policy_id); }
};

RunResult supervised_bc(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                        const Hyperparameters& hp);
RunResult forward_training(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                           const Hyperparameters& hp);
RunResult searn(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp);
RunResult smile(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp);
RunResult rail(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp);
RunResult dagger(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp);
RunResult aggrevate(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                    const Hyperparameters& hp);

RunResult run_algorithm(Algorithm algo, const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                        const Hyperparameters& hp);

/// Iteration count used for `algo` on horizon T when hp.iterations is unset.
int default_iterations(Algorithm algo, int horizon);
/// SMILe's alpha when hp.alpha is unset: 1/T^2.
double default_alpha(int horizon);

/// SMILe mixture weights after i iterations: index 0 is the expert with
/// (1-alpha)^i, index j >= 1 is alpha (1-alpha)^(j-1).
std::vector<double> smile_weights(double alpha, int i);

/// Removes component 0 and renormalizes. Throws if its weight is 1.
std::vector<double> unmix_weights(const std::vector<double>& weights);

/// Realized cost-to-go of taking `a` in `s` at `step`, then letting the
/// expert act until the horizon. The sum is accumulated from the last step
/// backwards, matching the backward recursion of q_values.
double sample_cost_to_go(const TabularMdp& mdp, ExpertOracle& expert, int step, StateId s, ActionId a,
                         CounterRng& rng);

}  // namespace imlab
