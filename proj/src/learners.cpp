#include "imlab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "imlab/rng.hpp"

namespace imlab {

namespace {

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

bool Record::operator==(const Record& o) const {
  if (state != o.state || step != o.step || action != o.action || costs.size() != o.costs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!same_double(costs[i], o.costs[i])) return false;
  }
  return true;
}

Dataset::Dataset(int num_states, int num_actions, std::string provenance)
    : num_states_(num_states), num_actions_(num_actions), provenance_(std::move(provenance)) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("Dataset: spaces must be non-empty");
  }
}

void Dataset::push(Record r) {
  if (r.state < 0 || r.state >= num_states_ || r.action < 0 || r.action >= num_actions_ || r.step < 0) {
    throw std::out_of_range("Dataset: record index out of range");
  }
  if (!r.costs.empty() && static_cast<int>(r.costs.size()) != num_actions_) {
    throw std::invalid_argument("Dataset: cost vector must have one entry per action");
  }
  if (!records_.empty() && records_.front().costs.empty() != r.costs.empty()) {
    throw std::invalid_argument("Dataset: cost vectors must be present on all records or none");
  }
  records_.push_back(std::move(r));
}

void Dataset::add(StateId s, int step, ActionId a) { push({s, step, a, {}}); }

void Dataset::add(StateId s, int step, ActionId a, std::vector<double> costs) {
  if (costs.empty()) {
    throw std::invalid_argument("Dataset: empty cost vector");
  }
  push({s, step, a, std::move(costs)});
}

void Dataset::append(const Dataset& other) {
  if (other.num_states_ != num_states_ || other.num_actions_ != num_actions_) {
    throw std::invalid_argument("Dataset::append: spaces differ");
  }
  records_.reserve(records_.size() + other.records_.size());
  for (const auto& r : other.records_) push(r);
}

bool Dataset::operator==(const Dataset& o) const {
  return num_states_ == o.num_states_ && num_actions_ == o.num_actions_ && provenance_ == o.provenance_ &&
         records_ == o.records_;
}

double TrainedClassifier::score(StateId s, ActionId a) const {
  if (scores.empty()) {
    throw std::logic_error("score: learner has not been trained");
  }
  if (s < 0 || s >= num_states() || a < 0 || a >= num_actions()) {
    throw std::out_of_range("score: index out of range");
  }
  return scores[static_cast<std::size_t>(s) * num_actions() + a];
}

TrainedClassifier train_tabular(const Dataset& data, const TabularConfig& config) {
  if (data.empty()) {
    throw std::invalid_argument("train_tabular: empty dataset");
  }
  const int S = data.num_states();
  const int A = data.num_actions();
  if (config.default_action < 0 || config.default_action >= A) {
    throw std::invalid_argument("train_tabular: default action out of range");
  }
  const auto idx = [A](StateId s, ActionId a) { return static_cast<std::size_t>(s) * A + a; };
  TrainedClassifier out{constant_policy(S, A, 0), std::vector<double>(static_cast<std::size_t>(S) * A, 0.0),
                        std::vector<bool>(S, false)};
  std::vector<double> probs(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<ActionId> chosen(S, config.default_action);

  if (data.has_costs()) {
    std::vector<double> sum(static_cast<std::size_t>(S) * A, 0.0);
    std::vector<double> count(static_cast<std::size_t>(S) * A, 0.0);
    for (const auto& r : data.records()) {
      out.seen[r.state] = true;
      for (ActionId a = 0; a < A; ++a) {
        if (std::isnan(r.costs[a])) continue;
        sum[idx(r.state, a)] += r.costs[a];
        count[idx(r.state, a)] += 1.0;
      }
    }
    for (StateId s = 0; s < S; ++s) {
      if (!out.seen[s]) continue;
      double best = 0.0;
      double worst = 0.0;
      int best_a = -1;
      for (ActionId a = 0; a < A; ++a) {
        if (count[idx(s, a)] == 0.0) continue;
        const double mean = sum[idx(s, a)] / count[idx(s, a)];
        out.scores[idx(s, a)] = -mean;
        if (best_a < 0 || mean < best) {
          best = mean;
          best_a = a;
        }
        worst = std::max(worst, mean);
      }
      if (best_a < 0) {
        // Every record at s had an all-NaN cost vector.
        out.seen[s] = false;
        continue;
      }
      for (ActionId a = 0; a < A; ++a) {
        if (count[idx(s, a)] == 0.0) out.scores[idx(s, a)] = -worst - 1.0;
      }
      chosen[s] = best_a;
    }
  } else {
    std::vector<double> count(static_cast<std::size_t>(S) * A, 0.0);
    std::vector<double> total(S, 0.0);
    for (const auto& r : data.records()) {
      out.seen[r.state] = true;
      count[idx(r.state, r.action)] += 1.0;
      total[r.state] += 1.0;
    }
    for (StateId s = 0; s < S; ++s) {
      if (!out.seen[s]) continue;
      ActionId best = 0;
      for (ActionId a = 0; a < A; ++a) {
        if (count[idx(s, a)] > count[idx(s, best)]) best = a;
        out.scores[idx(s, a)] = (count[idx(s, a)] + config.smoothing) / (total[s] + A * config.smoothing);
      }
      chosen[s] = best;
    }
  }

  bool deterministic = true;
  for (StateId s = 0; s < S; ++s) {
    if (!out.seen[s]) {
      for (ActionId a = 0; a < A; ++a) out.scores[idx(s, a)] = 1.0 / A;
      if (config.uniform_fallback) {
        deterministic = false;
        for (ActionId a = 0; a < A; ++a) probs[idx(s, a)] = 1.0 / A;
        continue;
      }
    }
    probs[idx(s, chosen[s])] = 1.0;
  }
  out.policy = deterministic ? Policy::deterministic(A, chosen) : Policy::stochastic(S, A, std::move(probs));
  return out;
}

TrainedClassifier TabularLearner::train(const Dataset& data, std::uint64_t) const {
  return train_tabular(data, config_);
}

std::string TabularLearner::describe() const {
  std::ostringstream out;
  out << "tabular(smoothing=" << config_.smoothing << ",default_action=" << config_.default_action
      << (config_.uniform_fallback ? ",uniform_fallback" : "") << ")";
  return out.str();
}

ErrorInjectedLearner::ErrorInjectedLearner(std::shared_ptr<const Learner> inner, double flip_rate, bool sampled)
    : inner_(std::move(inner)), flip_rate_(flip_rate), sampled_(sampled) {
  if (!inner_) {
    throw std::invalid_argument("ErrorInjectedLearner: missing inner learner");
  }
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) {
    throw std::invalid_argument("ErrorInjectedLearner: flip_rate must lie in [0,1]");
  }
}

TrainedClassifier ErrorInjectedLearner::train(const Dataset& data, std::uint64_t seed) const {
  TrainedClassifier out = inner_->train(data, seed);
  if (flip_rate_ == 0.0) return out;
  const int S = out.num_states();
  const int A = out.num_actions();
  if (A == 1) return out;
  if (sampled_) {
    std::vector<ActionId> actions(S);
    const std::uint64_t key = derive_seed(seed, {0xF11Bu});
    for (StateId s = 0; s < S; ++s) {
      const ActionId a = out.policy.action(0, s);
      actions[s] = a;
      if (!out.seen[s] || !(uniform_at(key, 2 * static_cast<std::uint64_t>(s)) < flip_rate_)) continue;
      const int k = static_cast<int>(uniform_at(key, 2 * static_cast<std::uint64_t>(s) + 1) * (A - 1));
      const ActionId other = std::min(k, A - 2);
      actions[s] = other >= a ? other + 1 : other;
    }
    out.policy = Policy::deterministic(A, std::move(actions));
    return out;
  }
  std::vector<double> probs(static_cast<std::size_t>(S) * A);
  std::vector<double> row(A);
  for (StateId s = 0; s < S; ++s) {
    out.policy.distribution(0, s, row);
    double total = 0.0;
    for (double p : row) total += p;
    for (ActionId a = 0; a < A; ++a) {
      const double p = out.seen[s] ? (1.0 - flip_rate_) * row[a] + flip_rate_ * (total - row[a]) / (A - 1)
                                   : row[a];
      probs[static_cast<std::size_t>(s) * A + a] = p;
    }
  }
  out.policy = Policy::stochastic(S, A, std::move(probs));
  return out;
}

std::string ErrorInjectedLearner::describe() const {
  std::ostringstream out;
  out << "flip(" << flip_rate_ << (sampled_ ? ",sampled" : "") << ")/" << inner_->describe();
  return out.str();
}

ActiveLearnResult active_learn(double eps_target, double delta, const StateDistributionSchedule& dist,
                               ExpertOracle& expert, int budget, const Learner& learner,
                               std::uint64_t rng_seed) {
  if (budget < 1) {
    throw std::invalid_argument("active_learn: budget must be at least 1");
  }
  if (!(eps_target >= 0.0) || !(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("active_learn: need eps_target >= 0 and delta in (0,1]");
  }
  if (dist.per_step.empty()) {
    throw std::invalid_argument("active_learn: empty state distribution");
  }
  for (const auto& d : dist.per_step) {
    double total = 0.0;
    for (double p : d) {
      if (!(p >= 0.0)) throw std::invalid_argument("active_learn: negative state probability");
      total += p;
    }
    if (!(std::abs(total - 1.0) <= kDerivedTol)) {
      throw std::invalid_argument("active_learn: state distribution does not sum to 1");
    }
  }
  const int S = dist.num_states();
  ActiveLearnResult out{TrainedClassifier{constant_policy(S, expert.policy().num_actions(), 0), {}, {}},
                        Dataset(S, expert.policy().num_actions(), "active_learn")};
  CounterRng rng(rng_seed);
  for (int i = 0; i < budget; ++i) {
    const int t = rng.below(dist.horizon());
    const StateId s = sample_index(dist.per_step[t], rng.uniform());
    out.data.add(s, t, expert.query(s, t));
  }
  out.model = learner.train(out.data, derive_seed(rng_seed, {1}));
  return out;
}

ActionTable markov_table(const Policy& policy, int horizon) {
  if (!policy.is_trajectory_mixture()) return action_table(policy, horizon);
  std::vector<Policy> comps(policy.components());
  std::vector<double> w(policy.weights().begin(), policy.weights().end());
  return action_table(Policy::mixture(std::move(w), std::move(comps), MixingMode::PerStep), horizon);
}

std::vector<std::vector<double>> disagreement_table(const Policy& policy, const Policy& expert, int horizon) {
  if (policy.num_states() != expert.num_states() || policy.num_actions() != expert.num_actions()) {
    throw std::invalid_argument("disagreement: policy and expert spaces differ");
  }
  const ActionTable pt = markov_table(policy, horizon);
  const ActionTable et = action_table(expert, horizon);
  std::vector<std::vector<double>> out(horizon, std::vector<double>(policy.num_states(), 0.0));
  for (int t = 0; t < horizon; ++t) {
    for (StateId s = 0; s < policy.num_states(); ++s) {
      double agree = 0.0;
      for (ActionId a = 0; a < policy.num_actions(); ++a) agree += pt(t, s, a) * et(t, s, a);
      out[t][s] = std::max(0.0, 1.0 - agree);
    }
  }
  return out;
}

double measured_eps(const TabularMdp& mdp, const Policy& policy, const Policy& expert,
                    const StateDistributionSchedule& dist) {
  check_compatible(mdp, policy);
  check_compatible(mdp, expert);
  if (dist.horizon() != mdp.horizon() || dist.num_states() != mdp.num_states()) {
    throw std::invalid_argument("measured_eps: distribution does not match the MDP");
  }
  const auto dis = disagreement_table(policy, expert, mdp.horizon());
  double eps = 0.0;
  for (int t = 0; t < mdp.horizon(); ++t) {
    double step = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) step += dist.per_step[t][s] * dis[t][s];
    eps += step;
  }
  return eps / mdp.horizon();
}

}  // namespace imlab
