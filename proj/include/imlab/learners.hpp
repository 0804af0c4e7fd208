#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "imlab/dynamics.hpp"
#include "imlab/expert.hpp"
#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"

namespace imlab {

/// One labelled example. `costs` is empty for action-labelled data; for
/// cost-sensitive data it has one entry per action, NaN where unobserved.
struct Record {
  StateId state = 0;
  int step = 0;
  ActionId action = 0;
  std::vector<double> costs;

  bool operator==(const Record&) const;
};

/// Append-only collection of labelled records over fixed state/action spaces.
/// Either every record carries a cost vector or none does.
class Dataset {
 public:
  Dataset(int num_states, int num_actions, std::string provenance = {});

  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  const std::string& provenance() const noexcept { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  bool has_costs() const noexcept { return !records_.empty() && !records_.front().costs.empty(); }
  const std::vector<Record>& records() const noexcept { return records_; }

  void add(StateId s, int step, ActionId a);
  /// Cost-sensitive record. Entries may be NaN for actions that were not tried.
  void add(StateId s, int step, ActionId a, std::vector<double> costs);
  /// D <- D u other.
  void append(const Dataset& other);

  bool operator==(const Dataset&) const;

 private:
  void push(Record r);

  int num_states_;
  int num_actions_;
  std::string provenance_;
  std::vector<Record> records_;
};

/// Result of training: the policy plus per-(s, a) scores (higher = better).
struct TrainedClassifier {
  Policy policy;
  std::vector<double> scores;
  std::vector<bool> seen;

  int num_states() const noexcept { return policy.num_states(); }
  int num_actions() const noexcept { return policy.num_actions(); }
  double score(StateId s, ActionId a) const;
  bool was_seen(StateId s) const { return seen.at(s); }
};

/// Any classifier that maps a dataset to a stationary policy. Training must
/// be a pure function of (dataset, seed).
class Learner {
 public:
  virtual ~Learner() = default;
  virtual TrainedClassifier train(const Dataset& data, std::uint64_t seed) const = 0;
  virtual std::string describe() const = 0;
};

struct TabularConfig {
  double smoothing = 0.0;
  ActionId default_action = 0;
  /// Unseen states play the uniform distribution instead of default_action.
  bool uniform_fallback = false;
};

/// One action per state: majority label, or the lowest mean observed cost for
/// cost-sensitive data. Ties go to the lowest action index.
class TabularLearner : public Learner {
 public:
  explicit TabularLearner(TabularConfig config = {}) : config_(config) {}
  TrainedClassifier train(const Dataset& data, std::uint64_t seed) const override;
  std::string describe() const override;
  const TabularConfig& config() const noexcept { return config_; }

 private:
  TabularConfig config_;
};

TrainedClassifier train_tabular(const Dataset& data, const TabularConfig& config = {});

/// Wraps a learner and flips its action on every state seen in training: with
/// probability flip_rate the policy plays a uniformly random other action.
/// By default the flip is exact (a stochastic policy); with `sampled` set,
/// each seen state flips or not once, decided by the seed.
class ErrorInjectedLearner : public Learner {
 public:
  ErrorInjectedLearner(std::shared_ptr<const Learner> inner, double flip_rate, bool sampled = false);
  TrainedClassifier train(const Dataset& data, std::uint64_t seed) const override;
  std::string describe() const override;
  double flip_rate() const noexcept { return flip_rate_; }

 private:
  std::shared_ptr<const Learner> inner_;
  double flip_rate_;
  bool sampled_;
};

struct ActiveLearnResult {
  TrainedClassifier model;
  Dataset data;
};

/// Draws `budget` (step, state) pairs i.i.d. (step uniform, state from that
/// step's distribution, so states follow the average), labels each with one
/// expert query and trains `learner`. eps_target and delta are not used to
/// size the sample; the achieved values are measured by the caller.
ActiveLearnResult active_learn(double eps_target, double delta, const StateDistributionSchedule& dist,
                               ExpertOracle& expert, int budget, const Learner& learner,
                               std::uint64_t rng_seed);

/// Sum_t (1/T) sum_s dist.per_step[t][s] * P(pi_t(s) != pi*_t(s)). Trajectory
/// mixtures are evaluated through their weight-averaged per-step rule.
double measured_eps(const TabularMdp& mdp, const Policy& policy, const Policy& expert,
                    const StateDistributionSchedule& dist);

/// Per-step disagreement probability table P(pi_t(s) != pi*_t(s)), T x S.
std::vector<std::vector<double>> disagreement_table(const Policy& policy, const Policy& expert, int horizon);

/// Markov rule with the same per-step action distribution as `policy`;
/// trajectory mixtures become per-step mixtures.
ActionTable markov_table(const Policy& policy, int horizon);

}  // namespace imlab
