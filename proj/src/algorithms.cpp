#include "imlab/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "imlab/dynamics.hpp"

namespace imlab {

namespace {

// Stream tags mixed into derive_seed so that training, validation and data
// collection never share a stream.
constexpr std::uint64_t kTrainTag = 0x7A41'0000;
constexpr std::uint64_t kValidateTag = 0x7A41'0001;
constexpr std::uint64_t kContinuationTag = 0x7A41'0002;

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

struct Episode {
  Trajectory traj;
  std::vector<char> by_expert;
};

/// Picks the action at (t, s) from one uniform; sets by_expert when the
/// expert oracle answered (and therefore already counted a query).
using Chooser = std::function<ActionId(int t, StateId s, double u, bool& by_expert)>;

Episode play(const TabularMdp& mdp, const Chooser& choose, CounterRng& rng) {
  Episode ep;
  ep.by_expert.reserve(static_cast<std::size_t>(mdp.horizon()));
  ep.traj = run_episode(
      mdp,
      [&](int t, StateId s, double u) {
        bool expert_acted = false;
        const ActionId a = choose(t, s, u, expert_acted);
        ep.by_expert.push_back(expert_acted ? 1 : 0);
        return a;
      },
      rng);
  return ep;
}

/// Expert label for step t of an episode: the executed action when the
/// expert acted, otherwise one fresh query.
ActionId expert_label(const Episode& ep, int t, ExpertOracle& expert) {
  if (ep.by_expert[t]) return ep.traj.actions[t];
  return expert.query(ep.traj.states[t], t);
}

Chooser expert_chooser(ExpertOracle& expert) {
  return [&expert](int t, StateId s, double, bool& by_expert) {
    by_expert = true;
    return expert.query(s, t);
  };
}

Chooser table_chooser(const ActionTable& table) {
  return [&table](int t, StateId s, double u, bool& by_expert) {
    by_expert = false;
    return sample_index(table.row(t, s), u);
  };
}

/// Inverse-CDF pick of a component, returning the uniform rescaled to the
/// chosen interval so one draw serves both choices.
std::pair<int, double> split_uniform(std::span<const double> w, double u) {
  double acc = 0.0;
  int last = -1;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] <= 0.0) continue;
    last = static_cast<int>(k);
    if (u < acc + w[k]) {
      return {last, std::clamp((u - acc) / w[k], 0.0, std::nextafter(1.0, 0.0))};
    }
    acc += w[k];
  }
  if (last < 0) throw std::invalid_argument("split_uniform: no positive weight");
  return {last, std::nextafter(1.0, 0.0)};
}

void check_rollouts(const Hyperparameters& hp, const char* who) {
  if (hp.rollouts_per_iter < 1) {
    throw std::invalid_argument(std::string(who) + ": rollouts_per_iter must be at least 1");
  }
}

IterationRecord make_record(int i, int policy_id, int executed_id, double J, double eps, std::string dist,
                            const ExpertOracle& expert, std::size_t dataset_size) {
  IterationRecord r;
  r.iteration = i;
  r.policy_id = policy_id;
  r.executed_policy_id = executed_id;
  r.J_exact = J;
  r.eps = eps;
  r.eps_distribution = std::move(dist);
  r.expert_queries = expert.query_count();
  r.dataset_size = dataset_size;
  return r;
}

RunResult start_run(Algorithm algo, const TabularMdp& mdp, const ExpertOracle& expert, const Learner& learner,
                    const Hyperparameters& hp) {
  check_compatible(mdp, expert.policy());
  RunResult out{RunTrace{}, PolicyStore(expert.policy()), std::nullopt};
  out.trace.algorithm = algo;
  out.trace.hyperparameters = hp.echo();
  out.trace.learner = learner.describe();
  out.trace.expert_label = expert.label();
  return out;
}

/// Returns the index of the candidate with the lowest validation cost; ties
/// go to the earliest.
int pick_best(const TabularMdp& mdp, const std::vector<int>& ids, const PolicyStore& store,
              const Hyperparameters& hp) {
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const Policy& p = store.get(ids[k]);
    const double c = hp.rollout_validation
                         ? monte_carlo_cost(mdp, p, hp.validation_rollouts,
                                            derive_seed(hp.seed, {kValidateTag, k})).mean
                         : exact_cost(mdp, p);
    if (c < best_cost) {
      best_cost = c;
      best = static_cast<int>(k);
    }
  }
  return best;
}

/// Weighted mixture of the expert (component 0) and learned classifiers.
/// Trajectory mode keeps the learned part's cost, state schedule and
/// (optionally) Q-table as weighted sums, which are linear in the weights;
/// per-step mode keeps the weighted action table instead.
class MixtureState {
 public:
  MixtureState(const TabularMdp& mdp, const Policy& expert, MixingMode mode, bool want_q)
      : mdp_(mdp),
        mode_(mode),
        want_q_(want_q),
        expert_table_(action_table(expert, mdp.horizon())),
        learned_table_(mdp.horizon(), mdp.num_states(), mdp.num_actions()),
        learned_q_(mdp.horizon(), mdp.num_states(), mdp.num_actions()),
        expert_q_(mdp.horizon(), mdp.num_states(), mdp.num_actions()) {
    weights_.push_back(1.0);
    ids_.push_back(0);
    tables_.push_back(expert_table_);
    expert_J_ = exact_cost(mdp, expert_table_);
    expert_sched_ = exact_state_distributions(mdp, expert_table_);
    learned_sched_.assign(mdp.horizon(), std::vector<double>(mdp.num_states(), 0.0));
    if (want_q_) expert_q_ = q_values(mdp, expert_table_);
  }

  /// Scales the expert weight by expert_scale and every learned weight by
  /// others_scale, then appends `policy` with weight new_weight.
  void add(int id, const Policy& policy, double new_weight, double expert_scale, double others_scale) {
    ActionTable table = action_table(policy, mdp_.horizon());
    weights_[0] *= expert_scale;
    for (std::size_t k = 1; k < weights_.size(); ++k) weights_[k] *= others_scale;
    weights_.push_back(new_weight);
    ids_.push_back(id);
    const int T = mdp_.horizon();
    const int S = mdp_.num_states();
    const int A = mdp_.num_actions();
    if (mode_ == MixingMode::Trajectory) {
      learned_J_ = others_scale * learned_J_ + new_weight * exact_cost(mdp_, table);
      const auto sched = exact_state_distributions(mdp_, table);
      for (int t = 0; t < T; ++t) {
        for (StateId s = 0; s < S; ++s) {
          learned_sched_[t][s] = others_scale * learned_sched_[t][s] + new_weight * sched.per_step[t][s];
        }
      }
      if (want_q_) {
        const QTable q = q_values(mdp_, table);
        for (int t = 0; t < T; ++t) {
          for (StateId s = 0; s < S; ++s) {
            for (ActionId a = 0; a < A; ++a) {
              learned_q_(t, s, a) = others_scale * learned_q_(t, s, a) + new_weight * q(t, s, a);
            }
          }
        }
      }
    }
    for (int t = 0; t < T; ++t) {
      for (StateId s = 0; s < S; ++s) {
        for (ActionId a = 0; a < A; ++a) {
          learned_table_(t, s, a) = others_scale * learned_table_(t, s, a) + new_weight * table(t, s, a);
        }
      }
    }
    tables_.push_back(std::move(table));
  }

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<int>& ids() const noexcept { return ids_; }
  double expert_weight() const noexcept { return weights_[0]; }
  MixingMode mode() const noexcept { return mode_; }

  ActionTable collapsed() const {
    ActionTable out(mdp_.horizon(), mdp_.num_states(), mdp_.num_actions());
    for (int t = 0; t < mdp_.horizon(); ++t) {
      for (StateId s = 0; s < mdp_.num_states(); ++s) {
        for (ActionId a = 0; a < mdp_.num_actions(); ++a) {
          out(t, s, a) = weights_[0] * expert_table_(t, s, a) + learned_table_(t, s, a);
        }
      }
    }
    return out;
  }

  double cost() const {
    if (mode_ == MixingMode::PerStep) return exact_cost(mdp_, collapsed());
    return weights_[0] * expert_J_ + learned_J_;
  }

  /// Cost after removing the expert component and renormalizing.
  double unmixed_cost() const {
    const double rest = learned_mass();
    if (!(rest > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (mode_ == MixingMode::Trajectory) return learned_J_ / rest;
    ActionTable t = learned_table_;
    for (int step = 0; step < mdp_.horizon(); ++step) {
      for (StateId s = 0; s < mdp_.num_states(); ++s) {
        for (ActionId a = 0; a < mdp_.num_actions(); ++a) t(step, s, a) /= rest;
      }
    }
    return exact_cost(mdp_, t);
  }

  StateDistributionSchedule schedule() const {
    if (mode_ == MixingMode::PerStep) return exact_state_distributions(mdp_, collapsed());
    std::vector<std::vector<double>> steps(learned_sched_);
    for (int t = 0; t < mdp_.horizon(); ++t) {
      for (StateId s = 0; s < mdp_.num_states(); ++s) {
        steps[t][s] += weights_[0] * expert_sched_.per_step[t][s];
      }
    }
    return StateDistributionSchedule::from_steps(std::move(steps));
  }

  /// Cost-to-go of (t, s, a) followed by the mixture; a trajectory mixture
  /// redraws its component for the continuation.
  QTable q_table() const {
    if (mode_ == MixingMode::PerStep) return q_values(mdp_, collapsed());
    QTable out(mdp_.horizon(), mdp_.num_states(), mdp_.num_actions());
    for (int t = 0; t < mdp_.horizon(); ++t) {
      for (StateId s = 0; s < mdp_.num_states(); ++s) {
        for (ActionId a = 0; a < mdp_.num_actions(); ++a) {
          out(t, s, a) = weights_[0] * expert_q_(t, s, a) + learned_q_(t, s, a);
        }
      }
    }
    return out;
  }

  /// Chooser for one episode. Trajectory mode consumes one uniform here to
  /// fix the component.
  Chooser episode_chooser(ExpertOracle& expert, CounterRng& rng) const {
    if (mode_ == MixingMode::Trajectory) {
      const int k = sample_index(weights_, rng.uniform());
      if (k == 0) return expert_chooser(expert);
      return table_chooser(tables_[k]);
    }
    return [this, &expert](int t, StateId s, double u, bool& by_expert) {
      const auto [k, v] = split_uniform(weights_, u);
      if (k == 0) {
        by_expert = true;
        return expert.query(s, t);
      }
      by_expert = false;
      return sample_index(tables_[k].row(t, s), v);
    };
  }

  std::vector<double> unmixed_weights() const {
    const double rest = learned_mass();
    std::vector<double> out;
    out.reserve(weights_.size() - 1);
    for (std::size_t k = 1; k < weights_.size(); ++k) out.push_back(weights_[k] / rest);
    return out;
  }

 private:
  double learned_mass() const {
    double rest = 0.0;
    for (std::size_t k = 1; k < weights_.size(); ++k) rest += weights_[k];
    return rest;
  }

  const TabularMdp& mdp_;
  MixingMode mode_;
  bool want_q_;
  ActionTable expert_table_;
  ActionTable learned_table_;
  QTable learned_q_;
  QTable expert_q_;
  double expert_J_ = 0.0;
  double learned_J_ = 0.0;
  StateDistributionSchedule expert_sched_;
  std::vector<std::vector<double>> learned_sched_;
  std::vector<double> weights_;
  std::vector<int> ids_;
  std::vector<ActionTable> tables_;
};

Policy final_mixture(const MixtureState& mix, const PolicyStore& store, MixingMode mode) {
  std::vector<Policy> comps;
  for (std::size_t k = 1; k < mix.ids().size(); ++k) comps.push_back(store.get(mix.ids()[k]));
  return Policy::mixture(mix.unmixed_weights(), std::move(comps), mode);
}

}  // namespace

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::SupervisedBC:
      return "supervised_bc";
    case Algorithm::ForwardTraining:
      return "forward_training";
    case Algorithm::Searn:
      return "searn";
    case Algorithm::Smile:
      return "smile";
    case Algorithm::Rail:
      return "rail";
    case Algorithm::Dagger:
      return "dagger";
    case Algorithm::Aggrevate:
      return "aggrevate";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (Algorithm a : {Algorithm::SupervisedBC, Algorithm::ForwardTraining, Algorithm::Searn, Algorithm::Smile,
                      Algorithm::Rail, Algorithm::Dagger, Algorithm::Aggrevate}) {
    if (to_string(a) == name) return a;
  }
  if (name == "bc" || name == "supervised") return Algorithm::SupervisedBC;
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected supervised_bc, forward_training, searn, smile, rail, dagger or "
                              "aggrevate)");
}

std::vector<std::pair<std::string, std::string>> Hyperparameters::echo() const {
  return {
      {"iterations", iterations ? std::to_string(*iterations) : "default"},
      {"alpha", alpha ? format_double(*alpha) : "default"},
      {"beta", format_double(beta)},
      {"beta_schedule", beta_schedule},
      {"beta_decay", format_double(beta_decay)},
      {"rollouts_per_iter", std::to_string(rollouts_per_iter)},
      {"coaching", coaching ? "true" : "false"},
      {"lambda0", format_double(lambda0)},
      {"lambda_decay", format_double(lambda_decay)},
      {"samples_per_iter", std::to_string(samples_per_iter)},
      {"searn_continuations", std::to_string(searn_continuations)},
      {"searn_exact_threshold", std::to_string(searn_exact_threshold)},
      {"rail_eps", format_double(rail_eps)},
      {"rail_delta", format_double(rail_delta)},
      {"rail_init", rail_init},
      {"rollout_validation", rollout_validation ? "true" : "false"},
      {"validation_rollouts", std::to_string(validation_rollouts)},
      {"mixing", std::string(to_string(mixing))},
      {"seed", std::to_string(seed)},
  };
}

int default_iterations(Algorithm algo, int horizon) {
  switch (algo) {
    case Algorithm::SupervisedBC:
      return 1;
    case Algorithm::ForwardTraining:
    case Algorithm::Rail:
      return horizon;
    case Algorithm::Searn:
      return 10;
    case Algorithm::Smile: {
      const double T = horizon;
      return std::max(1, static_cast<int>(std::ceil(2.0 * T * T * std::log(T))));
    }
    case Algorithm::Dagger:
      return 20;
    case Algorithm::Aggrevate:
      return 10;
  }
  return 1;
}

double default_alpha(int horizon) { return 1.0 / (static_cast<double>(horizon) * horizon); }

std::vector<double> smile_weights(double alpha, int i) {
  std::vector<double> w(static_cast<std::size_t>(i) + 1);
  w[0] = std::pow(1.0 - alpha, i);
  for (int j = 1; j <= i; ++j) w[j] = alpha * std::pow(1.0 - alpha, j - 1);
  return w;
}

std::vector<double> unmix_weights(const std::vector<double>& weights) {
  if (weights.size() < 2) {
    throw std::invalid_argument("unmix: nothing left after removing the expert component");
  }
  double rest = 0.0;
  for (std::size_t k = 1; k < weights.size(); ++k) rest += weights[k];
  if (!(rest > 0.0)) {
    throw std::invalid_argument("unmix: the expert component carries all the weight");
  }
  std::vector<double> out(weights.begin() + 1, weights.end());
  for (double& w : out) w /= rest;
  return out;
}

double sample_cost_to_go(const TabularMdp& mdp, ExpertOracle& expert, int step, StateId s, ActionId a,
                         CounterRng& rng) {
  const int T = mdp.horizon();
  if (step < 0 || step >= T) throw std::out_of_range("sample_cost_to_go: step out of range");
  std::vector<double> costs;
  costs.reserve(static_cast<std::size_t>(T - step));
  StateId state = s;
  ActionId action = a;
  for (int t = step; t < T; ++t) {
    if (t > step) {
      rng.uniform();  // action slot; the expert answers from its own stream
      action = expert.query(state, t);
    }
    costs.push_back(mdp.cost(state, action));
    const double u = rng.uniform();
    if (t + 1 < T) state = sample_index(mdp.successors(state, action), u);
  }
  double acc = 0.0;
  for (auto it = costs.rbegin(); it != costs.rend(); ++it) acc = *it + acc;
  return acc;
}

RunResult supervised_bc(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                        const Hyperparameters& hp) {
  check_rollouts(hp, "supervised_bc");
  RunResult out = start_run(Algorithm::SupervisedBC, mdp, expert, learner, hp);
  Dataset data(mdp.num_states(), mdp.num_actions(), "supervised_bc");
  const Chooser choose = expert_chooser(expert);
  for (int r = 0; r < hp.rollouts_per_iter; ++r) {
    CounterRng rng(derive_seed(hp.seed, {1, static_cast<std::uint64_t>(r)}));
    const Episode ep = play(mdp, choose, rng);
    for (int t = 0; t < mdp.horizon(); ++t) data.add(ep.traj.states[t], t, expert_label(ep, t, expert));
  }
  const TrainedClassifier model = learner.train(data, derive_seed(hp.seed, {1, kTrainTag}));
  const int id = out.store.add(model.policy);
  const auto d_expert = exact_state_distributions(mdp, expert.policy());
  out.trace.iterations.push_back(make_record(1, id, 0, exact_cost(mdp, model.policy),
                                             measured_eps(mdp, model.policy, expert.policy(), d_expert),
                                             "expert", expert, data.size()));
  out.trace.final_policy_id = id;
  return out;
}

RunResult forward_training(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                           const Hyperparameters& hp) {
  check_rollouts(hp, "forward_training");
  const int T = mdp.horizon();
  const int N = hp.iterations.value_or(T);
  if (N != T) {
    throw std::invalid_argument("forward_training: iterations (" + std::to_string(N) +
                                ") must equal the horizon (" + std::to_string(T) + ")");
  }
  RunResult out = start_run(Algorithm::ForwardTraining, mdp, expert, learner, hp);
  std::vector<Policy> steps;
  for (int t = 0; t < T; ++t) steps.push_back(expert.policy().step_policy(t));
  ActionTable learned(T, mdp.num_states(), mdp.num_actions());
  std::size_t collected = 0;
  for (int i = 1; i <= T; ++i) {
    const int step = i - 1;
    const Chooser choose = [&](int t, StateId s, double u, bool& by_expert) {
      if (t < step) {
        by_expert = false;
        return sample_index(learned.row(t, s), u);
      }
      by_expert = true;
      return expert.query(s, t);
    };
    Dataset data(mdp.num_states(), mdp.num_actions(), "forward_training:" + std::to_string(i));
    for (int r = 0; r < hp.rollouts_per_iter; ++r) {
      CounterRng rng(derive_seed(hp.seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(r)}));
      const Episode ep = play(mdp, choose, rng);
      data.add(ep.traj.states[step], step, expert_label(ep, step, expert));
    }
    collected += data.size();
    const TrainedClassifier model = learner.train(data, derive_seed(hp.seed, {static_cast<std::uint64_t>(i), kTrainTag}));
    steps[step] = model.policy;
    for (StateId s = 0; s < mdp.num_states(); ++s) model.policy.distribution(step, s, learned.row(step, s));
    const Policy composite = Policy::non_stationary(steps);
    const int id = out.store.add(composite);
    const auto d_own = exact_state_distributions(mdp, composite);
    auto rec = make_record(i, id, i == 1 ? 0 : id - 1, exact_cost(mdp, composite),
                           measured_eps(mdp, composite, expert.policy(), d_own), "own", expert, collected);
    out.trace.iterations.push_back(std::move(rec));
    out.trace.final_policy_id = id;
  }
  return out;
}

RunResult searn(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp) {
  check_rollouts(hp, "searn");
  if (!(hp.beta > 0.0 && hp.beta <= 1.0)) {
    throw std::invalid_argument("searn: beta must lie in (0,1]");
  }
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int N = hp.iterations.value_or(default_iterations(Algorithm::Searn, T));
  if (N < 1) {
    throw std::invalid_argument("searn: at least one pass is needed; with zero passes the policy is pure expert");
  }
  const bool exact = static_cast<long long>(S) * A * T <= hp.searn_exact_threshold;
  RunResult out = start_run(Algorithm::Searn, mdp, expert, learner, hp);
  MixtureState mix(mdp, expert.policy(), hp.mixing, exact);
  std::size_t collected = 0;
  for (int i = 1; i <= N; ++i) {
    const auto iu = static_cast<std::uint64_t>(i);
    Dataset data(S, A, "searn:" + std::to_string(i));
    const std::optional<QTable> q = exact ? std::optional<QTable>(mix.q_table()) : std::nullopt;
    for (int r = 0; r < hp.rollouts_per_iter; ++r) {
      const auto ru = static_cast<std::uint64_t>(r);
      CounterRng rng(derive_seed(hp.seed, {iu, ru}));
      const Chooser choose = mix.episode_chooser(expert, rng);
      const Episode ep = play(mdp, choose, rng);
      for (int t = 0; t < T; ++t) {
        const StateId s = ep.traj.states[t];
        std::vector<double> costs(A);
        for (ActionId a = 0; a < A; ++a) {
          if (q) {
            costs[a] = (*q)(t, s, a);
            continue;
          }
          double total = 0.0;
          for (int c = 0; c < hp.searn_continuations; ++c) {
            CounterRng crng(derive_seed(hp.seed, {kContinuationTag, iu, ru, static_cast<std::uint64_t>(t),
                                                  static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(c)}));
            const Chooser follow = mix.episode_chooser(expert, crng);
            const Trajectory cont = run_from(
                mdp, s, t,
                [&](int step, StateId st, double u) {
                  if (step == t) return a;
                  bool unused = false;
                  return follow(step, st, u, unused);
                },
                crng);
            total += cont.total_cost;
          }
          costs[a] = total / hp.searn_continuations;
        }
        const auto best = static_cast<ActionId>(std::min_element(costs.begin(), costs.end()) - costs.begin());
        data.add(s, t, best, std::move(costs));
      }
    }
    collected += data.size();
    const TrainedClassifier model = learner.train(data, derive_seed(hp.seed, {iu, kTrainTag}));
    const int id = out.store.add(model.policy);
    const double eps = measured_eps(mdp, model.policy, expert.policy(), mix.schedule());
    mix.add(id, model.policy, hp.beta, 1.0 - hp.beta, 1.0 - hp.beta);
    auto rec = make_record(i, id, -1, mix.cost(), eps, "current_mixture", expert, collected);
    rec.extra["expert_weight"] = mix.expert_weight();
    rec.extra["J_unmixed"] = mix.unmixed_cost();
    out.trace.iterations.push_back(std::move(rec));
  }
  if (!(mix.expert_weight() < 1.0)) {
    throw std::invalid_argument("searn: the expert still carries all mixture weight; increase passes or beta");
  }
  out.trace.scalars["beta"] = hp.beta;
  out.trace.scalars["expert_weight_final"] = mix.expert_weight();
  out.trace.scalars["J_mixture_final"] = mix.cost();
  out.trace.scalars["exact_cost_to_go"] = exact ? 1.0 : 0.0;
  out.trace.mixture_ids.assign(mix.ids().begin() + 1, mix.ids().end());
  out.trace.mixture_weights = mix.unmixed_weights();
  out.trace.final_policy_id = out.store.add(final_mixture(mix, out.store, hp.mixing));
  return out;
}

RunResult smile(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp) {
  check_rollouts(hp, "smile");
  const int T = mdp.horizon();
  const double alpha = hp.alpha.value_or(default_alpha(T));
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("smile: alpha must lie in (0,1)");
  }
  const int N = hp.iterations.value_or(default_iterations(Algorithm::Smile, T));
  if (N < 1) throw std::invalid_argument("smile: iterations must be at least 1");
  RunResult out = start_run(Algorithm::Smile, mdp, expert, learner, hp);
  MixtureState mix(mdp, expert.policy(), hp.mixing, false);
  std::size_t collected = 0;
  double eps_weighted = 0.0;
  for (int i = 1; i <= N; ++i) {
    const auto iu = static_cast<std::uint64_t>(i);
    Dataset data(mdp.num_states(), mdp.num_actions(), "smile:" + std::to_string(i));
    for (int r = 0; r < hp.rollouts_per_iter; ++r) {
      CounterRng rng(derive_seed(hp.seed, {iu, static_cast<std::uint64_t>(r)}));
      const Chooser choose = mix.episode_chooser(expert, rng);
      const Episode ep = play(mdp, choose, rng);
      for (int t = 0; t < T; ++t) data.add(ep.traj.states[t], t, expert_label(ep, t, expert));
    }
    collected += data.size();
    const TrainedClassifier model = learner.train(data, derive_seed(hp.seed, {iu, kTrainTag}));
    const int id = out.store.add(model.policy);
    const double eps = measured_eps(mdp, model.policy, expert.policy(), mix.schedule());
    eps_weighted += std::pow(1.0 - alpha, i - 1) * eps;
    const double w_expert = mix.expert_weight();
    mix.add(id, model.policy, alpha * w_expert, 1.0 - alpha, 1.0);
    auto rec = make_record(i, id, -1, mix.cost(), eps, "previous_mixture", expert, collected);
    rec.extra["expert_weight"] = mix.expert_weight();
    rec.extra["J_unmixed"] = mix.unmixed_cost();
    out.trace.iterations.push_back(std::move(rec));
  }
  out.trace.scalars["alpha"] = alpha;
  out.trace.scalars["expert_weight_final"] = mix.expert_weight();
  out.trace.scalars["J_mixture_final"] = mix.cost();
  out.trace.scalars["eps_tilde"] = alpha / (1.0 - std::pow(1.0 - alpha, N)) * eps_weighted;
  out.trace.mixture_ids.assign(mix.ids().begin() + 1, mix.ids().end());
  out.trace.mixture_weights = mix.unmixed_weights();
  out.trace.final_policy_id = out.store.add(final_mixture(mix, out.store, hp.mixing));
  return out;
}

RunResult rail(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp) {
  const int T = mdp.horizon();
  const int N = hp.iterations.value_or(T);
  if (N != T) {
    throw std::invalid_argument("rail: iterations (" + std::to_string(N) + ") must equal the horizon (" +
                                std::to_string(T) + ")");
  }
  if (hp.rail_init != "default" && hp.rail_init != "expert") {
    throw std::invalid_argument("rail: init must be 'default' or 'expert'");
  }
  RunResult out = start_run(Algorithm::Rail, mdp, expert, learner, hp);
  int prev_id = hp.rail_init == "expert" ? 0 : out.store.add(constant_policy(mdp.num_states(), mdp.num_actions(), 0));
  std::size_t collected = 0;
  for (int t = 1; t <= N; ++t) {
    const auto dist = exact_state_distributions(mdp, out.store.get(prev_id));
    const auto res = active_learn(hp.rail_eps, hp.rail_delta / t, dist, expert, hp.samples_per_iter, learner,
                                  derive_seed(hp.seed, {static_cast<std::uint64_t>(t)}));
    collected += res.data.size();
    const int id = out.store.add(res.model.policy);
    auto rec = make_record(t, id, prev_id, exact_cost(mdp, res.model.policy),
                           measured_eps(mdp, res.model.policy, expert.policy(), dist), "previous_policy", expert,
                           collected);
    rec.extra["delta_t"] = hp.rail_delta / t;
    out.trace.iterations.push_back(std::move(rec));
    prev_id = id;
  }
  out.trace.final_policy_id = prev_id;
  return out;
}

RunResult dagger(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner, const Hyperparameters& hp) {
  check_rollouts(hp, "dagger");
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int N = hp.iterations.value_or(default_iterations(Algorithm::Dagger, T));
  if (N < 1) throw std::invalid_argument("dagger: iterations must be at least 1");
  RunResult out = start_run(Algorithm::Dagger, mdp, expert, learner, hp);
  const ActionTable expert_table = action_table(expert.policy(), T);
  std::optional<QTable> disadvantage;
  if (hp.coaching) disadvantage = expert_disadvantage(mdp, expert.policy());

  Dataset data(S, A, "dagger");
  std::optional<TrainedClassifier> current;
  int executed_id = 0;
  // Agreement mass per (s, a), summed over iterations, for the best
  // stationary policy in hindsight.
  std::vector<double> agree_expert(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<double> agree_hope(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<int> candidates;

  for (int i = 1; i <= N; ++i) {
    const auto iu = static_cast<std::uint64_t>(i);
    const double lambda = hp.lambda0 * std::pow(hp.lambda_decay, i - 1);
    const bool use_hope = hp.coaching && current.has_value();
    std::vector<int> hope;
    if (use_hope) {
      hope.assign(static_cast<std::size_t>(T) * S, 0);
      for (int t = 0; t < T; ++t) {
        for (StateId s = 0; s < S; ++s) {
          ActionId best = 0;
          double best_v = -std::numeric_limits<double>::infinity();
          for (ActionId a = 0; a < A; ++a) {
            const double v = lambda * current->score(s, a) - (*disadvantage)(t, s, a);
            if (v > best_v) {
              best_v = v;
              best = a;
            }
          }
          hope[static_cast<std::size_t>(t) * S + s] = best;
        }
      }
    }

    const Policy& executed = out.store.get(executed_id);
    const ActionTable exec_table = action_table(executed, T);
    const Chooser choose = executed_id == 0 ? expert_chooser(expert) : table_chooser(exec_table);
    Dataset fresh(S, A);
    for (int r = 0; r < hp.rollouts_per_iter; ++r) {
      CounterRng rng(derive_seed(hp.seed, {iu, static_cast<std::uint64_t>(r)}));
      const Episode ep = play(mdp, choose, rng);
      for (int t = 0; t < T; ++t) {
        const StateId s = ep.traj.states[t];
        const ActionId label =
            use_hope ? hope[static_cast<std::size_t>(t) * S + s] : expert_label(ep, t, expert);
        fresh.add(s, t, label);
      }
    }
    data.append(fresh);

    const auto d_exec = exact_state_distributions(mdp, exec_table);
    for (int t = 0; t < T; ++t) {
      for (StateId s = 0; s < S; ++s) {
        const double m = d_exec.per_step[t][s];
        if (m == 0.0) continue;
        for (ActionId a = 0; a < A; ++a) {
          agree_expert[static_cast<std::size_t>(s) * A + a] += m * expert_table(t, s, a);
        }
        if (use_hope) {
          agree_hope[static_cast<std::size_t>(s) * A + hope[static_cast<std::size_t>(t) * S + s]] += m;
        } else {
          for (ActionId a = 0; a < A; ++a) {
            agree_hope[static_cast<std::size_t>(s) * A + a] += m * expert_table(t, s, a);
          }
        }
      }
    }

    const double online_loss = measured_eps(mdp, executed, expert.policy(), d_exec);
    TrainedClassifier model = learner.train(data, derive_seed(hp.seed, {iu, kTrainTag}));
    const int id = out.store.add(model.policy);
    candidates.push_back(id);
    const auto d_own = exact_state_distributions(mdp, model.policy);
    auto rec = make_record(i, id, executed_id, exact_cost(mdp, model.policy),
                           measured_eps(mdp, model.policy, expert.policy(), d_own), "own", expert, data.size());
    rec.extra["online_loss"] = online_loss;
    if (hp.coaching) rec.extra["lambda"] = lambda;
    rec.targets = std::move(hope);
    out.trace.iterations.push_back(std::move(rec));
    current = std::move(model);
    executed_id = id;
  }

  const auto best_mass = [&](const std::vector<double>& agree) {
    double kept = 0.0;
    for (StateId s = 0; s < S; ++s) {
      double m = 0.0;
      for (ActionId a = 0; a < A; ++a) m = std::max(m, agree[static_cast<std::size_t>(s) * A + a]);
      kept += m;
    }
    return std::max(0.0, 1.0 - kept / (static_cast<double>(N) * T));
  };
  out.trace.scalars["eps_N"] = best_mass(agree_expert);
  out.trace.scalars["eps_tilde_N"] = best_mass(agree_hope);
  out.dataset = std::move(data);
  out.trace.final_policy_id = candidates[pick_best(mdp, candidates, out.store, hp)];
  return out;
}

RunResult aggrevate(const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                    const Hyperparameters& hp) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int N = hp.iterations.value_or(default_iterations(Algorithm::Aggrevate, T));
  if (N < 1) throw std::invalid_argument("aggrevate: iterations must be at least 1");
  if (hp.samples_per_iter < 1) throw std::invalid_argument("aggrevate: samples_per_iter must be at least 1");
  if (hp.beta_schedule != "first" && hp.beta_schedule != "geometric") {
    throw std::invalid_argument("aggrevate: beta_schedule must be 'first' or 'geometric'");
  }
  RunResult out = start_run(Algorithm::Aggrevate, mdp, expert, learner, hp);
  int learner_id = out.store.add(constant_policy(S, A, 0));
  Dataset data(S, A, "aggrevate");
  std::vector<int> candidates;
  for (int i = 1; i <= N; ++i) {
    const auto iu = static_cast<std::uint64_t>(i);
    const double beta = hp.beta_schedule == "first" ? (i == 1 ? 1.0 : 0.0) : std::pow(hp.beta_decay, i - 1);
    const ActionTable learner_table = action_table(out.store.get(learner_id), T);
    int executed_id = learner_id;
    if (beta == 1.0) {
      executed_id = 0;
    } else if (beta > 0.0) {
      executed_id = out.store.add(
          Policy::mixture({beta, 1.0 - beta}, {expert.policy(), out.store.get(learner_id)}, hp.mixing));
    }
    const std::vector<double> w = {beta, 1.0 - beta};
    for (int j = 0; j < hp.samples_per_iter; ++j) {
      CounterRng rng(derive_seed(hp.seed, {iu, static_cast<std::uint64_t>(j)}));
      const bool expert_episode = rng.uniform() < beta;
      const int t_explore = rng.below(T);
      StateId s = sample_index(mdp.initial(), rng.uniform());
      for (int t = 0; t < t_explore; ++t) {
        const double u = rng.uniform();
        ActionId a = 0;
        bool by_expert = hp.mixing == MixingMode::Trajectory ? expert_episode : false;
        double v = u;
        if (hp.mixing == MixingMode::PerStep) {
          const auto [k, rescaled] = split_uniform(w, u);
          by_expert = k == 0;
          v = rescaled;
        }
        a = by_expert ? expert.query(s, t) : sample_index(learner_table.row(t, s), v);
        const double u_next = rng.uniform();
        s = sample_index(mdp.successors(s, a), u_next);
      }
      const ActionId a = rng.below(A);
      const double q = sample_cost_to_go(mdp, expert, t_explore, s, a, rng);
      std::vector<double> costs(A, std::numeric_limits<double>::quiet_NaN());
      costs[a] = q;
      data.add(s, t_explore, a, std::move(costs));
    }
    const TrainedClassifier model = learner.train(data, derive_seed(hp.seed, {iu, kTrainTag}));
    const int id = out.store.add(model.policy);
    candidates.push_back(id);
    const auto d_own = exact_state_distributions(mdp, model.policy);
    auto rec = make_record(i, id, executed_id, exact_cost(mdp, model.policy),
                           measured_eps(mdp, model.policy, expert.policy(), d_own), "own", expert, data.size());
    rec.extra["beta"] = beta;
    rec.extra["learner_policy_id"] = learner_id;
    out.trace.iterations.push_back(std::move(rec));
    learner_id = id;
  }
  out.dataset = std::move(data);
  out.trace.final_policy_id = candidates[pick_best(mdp, candidates, out.store, hp)];
  return out;
}

RunResult run_algorithm(Algorithm algo, const TabularMdp& mdp, ExpertOracle& expert, const Learner& learner,
                        const Hyperparameters& hp) {
  switch (algo) {
    case Algorithm::SupervisedBC:
      return supervised_bc(mdp, expert, learner, hp);
    case Algorithm::ForwardTraining:
      return forward_training(mdp, expert, learner, hp);
    case Algorithm::Searn:
      return searn(mdp, expert, learner, hp);
    case Algorithm::Smile:
      return smile(mdp, expert, learner, hp);
    case Algorithm::Rail:
      return rail(mdp, expert, learner, hp);
    case Algorithm::Dagger:
      return dagger(mdp, expert, learner, hp);
    case Algorithm::Aggrevate:
      return aggrevate(mdp, expert, learner, hp);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace imlab
