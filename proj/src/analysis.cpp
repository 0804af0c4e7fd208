#include "imlab/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "imlab/dynamics.hpp"
#include "imlab/expert.hpp"
#include "imlab/learners.hpp"

namespace imlab {

namespace {

double step_cost(const TabularMdp& mdp, std::span<const double> dist, const ActionTable& table, int t) {
  double total = 0.0;
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (dist[s] == 0.0) continue;
    double c = 0.0;
    for (ActionId a = 0; a < mdp.num_actions(); ++a) c += table(t, s, a) * mdp.cost(s, a);
    total += dist[s] * c;
  }
  return total;
}

/// E_{s ~ dist} sum_a table(t, s, a) q(t, s, a).
double expected_q(std::span<const double> dist, const ActionTable& table, const QTable& q, int t) {
  double total = 0.0;
  for (StateId s = 0; s < q.num_states(); ++s) {
    if (dist[s] == 0.0) continue;
    double v = 0.0;
    for (ActionId a = 0; a < q.num_actions(); ++a) v += table(t, s, a) * q(t, s, a);
    total += dist[s] * v;
  }
  return total;
}

ActionTable blend(double wa, const ActionTable& a, double wb, const ActionTable& b) {
  ActionTable out(a.horizon(), a.num_states(), a.num_actions());
  for (int t = 0; t < a.horizon(); ++t) {
    for (StateId s = 0; s < a.num_states(); ++s) {
      for (ActionId k = 0; k < a.num_actions(); ++k) out(t, s, k) = wa * a(t, s, k) + wb * b(t, s, k);
    }
  }
  return out;
}

double scalar_or_throw(const RunTrace& trace, const std::string& key, int theorem) {
  const auto it = trace.scalars.find(key);
  if (it == trace.scalars.end()) {
    throw std::invalid_argument("theorem " + std::to_string(theorem) + ": trace is missing '" + key + "'");
  }
  return it->second;
}

std::string echo_value(const RunTrace& trace, const std::string& key) {
  for (const auto& [k, v] : trace.hyperparameters) {
    if (k == key) return v;
  }
  return "";
}

MixingMode trace_mixing(const RunTrace& trace) {
  const std::string v = echo_value(trace, "mixing");
  return v.empty() ? MixingMode::Trajectory : mixing_mode_from_string(v);
}

void finish(BoundReport& r) {
  r.slack = r.rhs - r.lhs;
  r.holds = r.slack >= -kBoundTol;
}

/// 1 - (1/(N T)) sum_s max_a agree[s][a]: the loss of the best stationary
/// deterministic policy against the accumulated labels.
double best_stationary_loss(const std::vector<double>& agree, int S, int A, double normalizer) {
  double kept = 0.0;
  for (StateId s = 0; s < S; ++s) {
    double m = 0.0;
    for (ActionId a = 0; a < A; ++a) m = std::max(m, agree[static_cast<std::size_t>(s) * A + a]);
    kept += m;
  }
  return std::max(0.0, 1.0 - kept / normalizer);
}

void dagger_bound(int theorem, const TabularMdp& mdp, const Policy& expert, const RunTrace& trace,
                  const PolicyStore& store, BoundReport& r) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const ActionTable et = action_table(expert, T);
  std::vector<double> agree_expert(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<double> agree_target(static_cast<std::size_t>(S) * A, 0.0);
  for (const auto& rec : trace.iterations) {
    const auto d = exact_state_distributions(mdp, store.get(rec.executed_policy_id));
    const bool hope = !rec.targets.empty();
    if (hope && rec.targets.size() != static_cast<std::size_t>(T) * S) {
      throw std::invalid_argument("theorem 6: hope targets have the wrong size");
    }
    for (int t = 0; t < T; ++t) {
      for (StateId s = 0; s < S; ++s) {
        const double m = d.per_step[t][s];
        if (m == 0.0) continue;
        for (ActionId a = 0; a < A; ++a) agree_expert[static_cast<std::size_t>(s) * A + a] += m * et(t, s, a);
        if (hope) {
          const int a = rec.targets[static_cast<std::size_t>(t) * S + s];
          agree_target[static_cast<std::size_t>(s) * A + a] += m;
        } else {
          for (ActionId a = 0; a < A; ++a) agree_target[static_cast<std::size_t>(s) * A + a] += m * et(t, s, a);
        }
      }
    }
  }
  const double N = static_cast<double>(trace.iterations.size());
  if (N == 0) throw std::invalid_argument("theorem " + std::to_string(theorem) + ": trace has no iterations");
  const double eps_N = best_stationary_loss(agree_expert, S, A, N * T);
  const double eps_tilde = best_stationary_loss(agree_target, S, A, N * T);
  const Policy& final_policy = store.get(trace.final_policy_id);
  const double u = compute_u(mdp, expert);
  const double eps_self = measured_eps(mdp, final_policy, expert, exact_state_distributions(mdp, final_policy));
  const double J_star = r.constituents["J_expert"];
  const double reference = theorem == 5 ? eps_N : eps_tilde;
  const double o1 = u * T * std::max(0.0, eps_self - reference);
  r.lhs = exact_cost(mdp, final_policy);
  r.rhs = J_star + u * T * eps_self;
  r.eps_distribution = "own";
  r.constituents["u"] = u;
  r.constituents["eps"] = eps_self;
  r.constituents["eps_N"] = eps_N;
  r.constituents["eps_tilde_N"] = eps_tilde;
  r.constituents["N"] = N;
  r.constituents["o1_slack"] = o1;
  r.constituents["o1_within_uT"] = o1 <= u * T + kBoundTol ? 1.0 : 0.0;
  r.note = std::string("asserted term is J* + u T eps with eps under the returned policy's own distribution; ") +
           (theorem == 5 ? "eps_N" : "eps_tilde_N") + " term plus the measured o1_slack is reported";
}

/// SEARN (interpolation) and SMILe (expert-share) chains of per-step tables.
void mixture_bound(int theorem, const TabularMdp& mdp, const Policy& expert, const RunTrace& trace,
                   const PolicyStore& store, BoundReport& r) {
  const int T = mdp.horizon();
  const MixingMode mode = trace_mixing(trace);
  const auto& ids = trace.mixture_ids;
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw std::invalid_argument("theorem " + std::to_string(theorem) + ": trace has no mixture components");
  const double J_star = r.constituents["J_expert"];
  const ActionTable et = action_table(expert, T);
  const double rate = scalar_or_throw(trace, theorem == 3 ? "beta" : "alpha", theorem);
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("theorem " + std::to_string(theorem) + ": mixing rate outside (0,1]");
  }

  ActionTable current = et;
  ActionTable learned(T, mdp.num_states(), mdp.num_actions());
  double w0 = 1.0;
  std::vector<double> comp_w;
  std::vector<double> comp_J;
  double sum_A1 = 0.0;
  double sum_A2 = 0.0;
  double eps_weighted = 0.0;
  const auto expert_sched = exact_state_distributions(mdp, et);
  std::vector<std::vector<double>> learned_sched(T, std::vector<double>(mdp.num_states(), 0.0));
  for (int j = 1; j <= n; ++j) {
    const Policy& pj = store.get(ids[j - 1]);
    const ActionTable tj = markov_table(pj, T);
    if (theorem == 3) {
      sum_A1 += policy_disadvantage(mdp, current, tj, 1).value;
      current = blend(1.0 - rate, current, rate, tj);
      for (double& w : comp_w) w *= 1.0 - rate;
      w0 *= 1.0 - rate;
      comp_w.push_back(rate);
    } else {
      // Distribution of pi^{j-1} for the eps-tilde weighting.
      StateDistributionSchedule prev;
      if (mode == MixingMode::PerStep) {
        prev = exact_state_distributions(mdp, current);
      } else {
        std::vector<std::vector<double>> steps(learned_sched);
        for (int t = 0; t < T; ++t) {
          for (StateId s = 0; s < mdp.num_states(); ++s) steps[t][s] += w0 * expert_sched.per_step[t][s];
        }
        prev = StateDistributionSchedule::from_steps(std::move(steps));
      }
      eps_weighted += std::pow(1.0 - rate, j - 1) * measured_eps(mdp, pj, expert, prev);
      const ActionTable substitute = blend(1.0, learned, w0, tj);
      sum_A1 += policy_disadvantage(mdp, current, substitute, 1).value;
      if (T >= 2) sum_A2 += policy_disadvantage(mdp, current, substitute, 2).value;
      const double wj = rate * w0;
      learned = blend(1.0, learned, wj, tj);
      w0 *= 1.0 - rate;
      current = blend(1.0, learned, w0, et);
      comp_w.push_back(wj);
      if (mode == MixingMode::Trajectory) {
        const auto sj = exact_state_distributions(mdp, pj);
        for (int t = 0; t < T; ++t) {
          for (StateId s = 0; s < mdp.num_states(); ++s) learned_sched[t][s] += wj * sj.per_step[t][s];
        }
      }
    }
    comp_J.push_back(exact_cost(mdp, pj));
  }

  double lhs = 0.0;
  if (mode == MixingMode::PerStep) {
    lhs = exact_cost(mdp, current);
  } else {
    lhs = w0 * J_star;
    for (int j = 0; j < n; ++j) lhs += comp_w[j] * comp_J[j];
  }
  const double Td = T;
  r.lhs = lhs;
  r.eps_distribution = "previous_mixture";
  r.asserted = mode == MixingMode::PerStep;
  r.constituents["N"] = n;
  r.constituents["A1"] = sum_A1;
  r.constituents["A1_mean"] = sum_A1 / n;
  r.constituents["expert_weight"] = w0;
  const double J_unmixed = exact_cost(mdp, store.get(trace.final_policy_id));
  r.constituents["J_unmixed"] = J_unmixed;
  if (theorem == 3) {
    r.constituents["beta"] = rate;
    r.rhs = J_star + Td * rate * std::pow(1.0 - rate, T - 1) * sum_A1 + n * rate * rate * Td * Td * (Td - 1) / 2;
  } else {
    r.constituents["alpha"] = rate;
    r.constituents["A2"] = sum_A2;
    const double choose3 = Td * (Td - 1) * (Td - 2) / 6;
    r.rhs = J_star + rate * Td * std::pow(1.0 - rate, T - 1) * sum_A1 +
            rate * rate * Td * (Td - 1) / 2 * std::pow(1.0 - rate, std::max(0, T - 2)) * sum_A2 +
            n * rate * rate * rate * Td * choose3;
    const double eps_tilde = rate / (1.0 - std::pow(1.0 - rate, n)) * eps_weighted;
    r.constituents["eps"] = eps_tilde;
    r.constituents["eps_tilde"] = eps_tilde;
    r.constituents["unmix_gap"] = J_unmixed - lhs;
    r.constituents["unmix_lemma_holds"] = J_unmixed <= lhs + 1.0 + kBoundTol ? 1.0 : 0.0;
  }
  r.note = r.asserted ? "lhs is the expert-carrying mixture; per-step mixing makes the expansion exact"
                      : "trajectory mixing: disadvantages use the collapsed per-step tables, reported only";
}

void aggrevate_bound(const TabularMdp& mdp, const Policy& expert, const RunTrace& trace, const PolicyStore& store,
                     BoundReport& r) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const ActionTable et = action_table(expert, T);
  const QTable q = q_values(mdp, et);
  const auto v = state_values(q, et);
  std::vector<double> mass(static_cast<std::size_t>(S) * A, 0.0);
  double online = 0.0;
  for (const auto& rec : trace.iterations) {
    const auto it = rec.extra.find("learner_policy_id");
    if (it == rec.extra.end()) throw std::invalid_argument("theorem 7: record is missing learner_policy_id");
    const auto d = exact_state_distributions(mdp, store.get(rec.executed_policy_id));
    const ActionTable lt = markov_table(store.get(static_cast<int>(it->second)), T);
    for (int t = 0; t < T; ++t) {
      for (StateId s = 0; s < S; ++s) {
        const double m = d.per_step[t][s];
        if (m == 0.0) continue;
        for (ActionId a = 0; a < A; ++a) {
          const double adv = q(t, s, a) - v[t][s];
          mass[static_cast<std::size_t>(s) * A + a] += m * adv;
          online += m * lt(t, s, a) * adv;
        }
      }
    }
  }
  const double N = static_cast<double>(trace.iterations.size());
  if (N == 0) throw std::invalid_argument("theorem 7: trace has no iterations");
  double best = 0.0;
  for (StateId s = 0; s < S; ++s) {
    double m = mass[static_cast<std::size_t>(s) * A];
    for (ActionId a = 1; a < A; ++a) m = std::min(m, mass[static_cast<std::size_t>(s) * A + a]);
    best += m;
  }
  const double eps_class = best / (N * T);
  const double eps_regret = online / (N * T) - eps_class;
  const std::string alpha_echo = echo_value(trace, "alpha");
  const double alpha = alpha_echo.empty() || alpha_echo == "default" ? default_alpha(T) : std::stod(alpha_echo);
  const double Q_max = q.max_value();
  const double Td = T;
  r.lhs = exact_cost(mdp, store.get(trace.final_policy_id));
  r.rhs = r.constituents["J_expert"] + Td * (eps_class + eps_regret) + Td * std::log(Td) * Q_max / (alpha * N);
  r.asserted = false;
  r.eps_distribution = "executed";
  r.constituents["eps_class"] = eps_class;
  r.constituents["eps_regret"] = eps_regret;
  r.constituents["Q_max"] = Q_max;
  r.constituents["alpha"] = alpha;
  r.constituents["N"] = N;
  r.note = "losses are expert cost-to-go disadvantages; alpha is the configured value (1/T^2 when unset); reported only";
}

}  // namespace

Algorithm theorem_algorithm(int theorem) {
  switch (theorem) {
    case 1:
      return Algorithm::SupervisedBC;
    case 2:
      return Algorithm::ForwardTraining;
    case 3:
      return Algorithm::Searn;
    case 4:
      return Algorithm::Smile;
    case 5:
    case 6:
      return Algorithm::Dagger;
    case 7:
      return Algorithm::Aggrevate;
    default:
      throw std::invalid_argument("theorem id must be between 1 and 7, got " + std::to_string(theorem));
  }
}

bool theorem_applies(int theorem, Algorithm algo) { return theorem_algorithm(theorem) == algo; }

BoundReport bound_theorem(int theorem, const TabularMdp& mdp, const Policy& expert, const RunTrace& trace,
                          const PolicyStore& store) {
  if (!theorem_applies(theorem, trace.algorithm)) {
    throw std::invalid_argument("theorem " + std::to_string(theorem) + " does not apply to " +
                                to_string(trace.algorithm) + " (it belongs to " +
                                to_string(theorem_algorithm(theorem)) + ")");
  }
  check_compatible(mdp, expert);
  if (trace.final_policy_id < 0 || static_cast<std::size_t>(trace.final_policy_id) >= store.size()) {
    throw std::invalid_argument("trace final policy id is not in the store");
  }
  BoundReport r;
  r.theorem = theorem;
  const int T = mdp.horizon();
  const double J_star = exact_cost(mdp, expert);
  r.constituents["T"] = T;
  r.constituents["J_expert"] = J_star;
  const Policy& final_policy = store.get(trace.final_policy_id);
  switch (theorem) {
    case 1: {
      const double eps = measured_eps(mdp, final_policy, expert, exact_state_distributions(mdp, expert));
      r.lhs = exact_cost(mdp, final_policy);
      r.rhs = J_star + static_cast<double>(T) * T * eps;
      r.eps_distribution = "expert";
      r.constituents["eps"] = eps;
      break;
    }
    case 2: {
      const double u = compute_u(mdp, expert);
      const double eps = measured_eps(mdp, final_policy, expert, exact_state_distributions(mdp, final_policy));
      r.lhs = exact_cost(mdp, final_policy);
      r.rhs = J_star + u * T * eps;
      r.eps_distribution = "own";
      r.constituents["u"] = u;
      r.constituents["eps"] = eps;
      break;
    }
    case 3:
    case 4:
      mixture_bound(theorem, mdp, expert, trace, store, r);
      break;
    case 5:
    case 6:
      dagger_bound(theorem, mdp, expert, trace, store, r);
      break;
    case 7:
      aggrevate_bound(mdp, expert, trace, store, r);
      break;
  }
  finish(r);
  return r;
}

PolicyDisadvantage policy_disadvantage(const TabularMdp& mdp, const ActionTable& base,
                                       const ActionTable& replacement, int k) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  if (k != 1 && k != 2) throw std::invalid_argument("policy_disadvantage: k must be 1 or 2");
  if (k > T) throw std::invalid_argument("policy_disadvantage: k exceeds the horizon");
  for (const ActionTable* t : {&base, &replacement}) {
    if (t->horizon() != T || t->num_states() != S || t->num_actions() != mdp.num_actions()) {
      throw std::invalid_argument("policy_disadvantage: table does not match the MDP");
    }
  }
  const QTable q = q_values(mdp, base);
  const auto d = exact_state_distributions(mdp, base);
  std::vector<double> prefix(T + 1, 0.0);
  for (int t = 0; t < T; ++t) prefix[t + 1] = prefix[t] + step_cost(mdp, d.per_step[t], base, t);

  PolicyDisadvantage out;
  out.k = k;
  out.J_base = prefix[T];
  // Substituting a rule for itself changes nothing; skip the summation so
  // rounding cannot make the identity inexact.
  bool same = true;
  for (int t = 0; t < T && same; ++t) {
    for (StateId s = 0; s < S && same; ++s) {
      const auto a = base.row(t, s);
      const auto b = replacement.row(t, s);
      same = std::equal(a.begin(), a.end(), b.begin());
    }
  }
  if (same) {
    out.J_bar = out.J_base;
    return out;
  }
  double total = 0.0;
  if (k == 1) {
    for (int t = 0; t < T; ++t) total += prefix[t] + expected_q(d.per_step[t], replacement, q, t);
    out.J_bar = total / T;
  } else {
    for (int t1 = 0; t1 + 1 < T; ++t1) {
      double running = prefix[t1] + step_cost(mdp, d.per_step[t1], replacement, t1);
      std::vector<double> mu = propagate(mdp, d.per_step[t1], replacement, t1);
      for (int t2 = t1 + 1; t2 < T; ++t2) {
        total += running + expected_q(mu, replacement, q, t2);
        running += step_cost(mdp, mu, base, t2);
        if (t2 + 1 < T) mu = propagate(mdp, mu, base, t2);
      }
    }
    out.J_bar = total / (static_cast<double>(T) * (T - 1) / 2);
  }
  out.value = out.J_bar - out.J_base;
  return out;
}

PolicyDisadvantage policy_disadvantage(const TabularMdp& mdp, const Policy& base, const Policy& replacement,
                                       int k) {
  check_compatible(mdp, base);
  check_compatible(mdp, replacement);
  const ActionTable rt = markov_table(replacement, mdp.horizon());
  if (!base.is_trajectory_mixture()) {
    return policy_disadvantage(mdp, action_table(base, mdp.horizon()), rt, k);
  }
  PolicyDisadvantage out;
  out.k = k;
  for (std::size_t c = 0; c < base.components().size(); ++c) {
    const PolicyDisadvantage part = policy_disadvantage(mdp, base.components()[c], replacement, k);
    const double w = base.weights()[c];
    out.J_bar += w * part.J_bar;
    out.J_base += w * part.J_base;
  }
  out.value = out.J_bar - out.J_base;
  return out;
}

namespace {

struct ChainMass {
  std::vector<std::vector<double>> agree;
  std::vector<std::vector<double>> erred;
  std::vector<double> p;
};

/// Joint (state, no-mistake flag) chain following the expert's actions,
/// where the flag drops with the learner's probability of disagreeing.
ChainMass chain_mass(const TabularMdp& mdp, const ActionTable& learned, const ActionTable& expert,
                     const std::vector<ActionId>& expert_action) {
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  ChainMass m;
  m.agree.assign(T, std::vector<double>(S, 0.0));
  m.erred.assign(T, std::vector<double>(S, 0.0));
  m.p.assign(T + 1, 0.0);
  m.agree[0].assign(mdp.initial().begin(), mdp.initial().end());
  for (int t = 0; t < T; ++t) {
    std::vector<double> keep(S, 0.0);
    std::vector<double> lost(S, 0.0);
    double p = 0.0;
    for (StateId s = 0; s < S; ++s) {
      const ActionId a = expert_action[static_cast<std::size_t>(t) * S + s];
      const double q = learned(t, s, a);
      keep[s] = m.agree[t][s] * q;
      lost[s] = m.erred[t][s] + m.agree[t][s] * (1.0 - q);
      p += m.agree[t][s];
    }
    m.p[t] = p;
    if (t + 1 < T) {
      m.agree[t + 1] = propagate(mdp, keep, expert, t);
      m.erred[t + 1] = propagate(mdp, lost, expert, t);
    } else {
      double last = 0.0;
      for (double v : keep) last += v;
      m.p[T] = last;
    }
  }
  return m;
}

}  // namespace

MistakeDecomposition mistake_decomposition(const TabularMdp& mdp, const Policy& learned, const Policy& expert) {
  check_compatible(mdp, learned);
  check_compatible(mdp, expert);
  if (!expert.is_deterministic() || expert.is_trajectory_mixture()) {
    throw std::invalid_argument("mistake_decomposition: the expert must be deterministic");
  }
  const int T = mdp.horizon();
  const int S = mdp.num_states();
  const ActionTable et = action_table(expert, T);
  std::vector<ActionId> expert_action(static_cast<std::size_t>(T) * S);
  for (int t = 0; t < T; ++t) {
    for (StateId s = 0; s < S; ++s) expert_action[static_cast<std::size_t>(t) * S + s] = expert.action(t, s);
  }

  std::vector<const Policy*> parts;
  std::vector<double> weights;
  if (learned.is_trajectory_mixture()) {
    for (std::size_t c = 0; c < learned.components().size(); ++c) {
      parts.push_back(&learned.components()[c]);
      weights.push_back(learned.weights()[c]);
    }
  } else {
    parts.push_back(&learned);
    weights.push_back(1.0);
  }
  ChainMass total;
  total.agree.assign(T, std::vector<double>(S, 0.0));
  total.erred.assign(T, std::vector<double>(S, 0.0));
  total.p.assign(T + 1, 0.0);
  for (std::size_t c = 0; c < parts.size(); ++c) {
    // Nested mixtures are collapsed per step; the chain is linear in each
    // component only at the top level.
    const ChainMass m = chain_mass(mdp, markov_table(*parts[c], T), et, expert_action);
    for (int t = 0; t < T; ++t) {
      for (StateId s = 0; s < S; ++s) {
        total.agree[t][s] += weights[c] * m.agree[t][s];
        total.erred[t][s] += weights[c] * m.erred[t][s];
      }
    }
    for (int t = 0; t <= T; ++t) total.p[t] += weights[c] * m.p[t];
  }

  MistakeDecomposition out;
  out.p = total.p;
  out.p[0] = 1.0;
  const auto d_star = exact_state_distributions(mdp, et);
  const auto dis = disagreement_table(learned, expert, T);
  out.no_mistake.assign(T, std::vector<double>(S, 0.0));
  out.after_mistake.assign(T, std::vector<double>(S, 0.0));
  out.eps.assign(T, 0.0);
  double eps_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const double p = out.p[t];
    const double q = 1.0 - p;
    for (StateId s = 0; s < S; ++s) {
      if (p > 0.0) out.no_mistake[t][s] = total.agree[t][s] / p;
      if (q > 0.0) out.after_mistake[t][s] = total.erred[t][s] / q;
      const double rebuilt = p * out.no_mistake[t][s] + q * out.after_mistake[t][s];
      out.identity_residual = std::max(out.identity_residual, std::abs(d_star.per_step[t][s] - rebuilt));
      out.eps[t] += d_star.per_step[t][s] * dis[t][s];
    }
    out.union_bound_violation = std::max(out.union_bound_violation, 1.0 - eps_sum - p);
    eps_sum += out.eps[t];
  }
  out.union_bound_violation = std::max(out.union_bound_violation, 1.0 - eps_sum - out.p[T]);
  out.union_bound_violation = std::max(0.0, out.union_bound_violation);
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
  LineFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return fit;
  fit.defined = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_std_error = std::sqrt(rss / (n - 2) / sxx);
  }
  return fit;
}

CompoundingFit compounding_fit(const CompoundingSetup& setup) {
  const std::set<int> distinct(setup.horizons.begin(), setup.horizons.end());
  if (distinct.size() < 4) throw std::invalid_argument("compounding_fit: needs at least 4 distinct horizons");
  if (setup.seeds.size() < 10) throw std::invalid_argument("compounding_fit: needs at least 10 seeds");
  if (!(setup.flip_rate >= 0.0 && setup.flip_rate <= 1.0)) {
    throw std::invalid_argument("compounding_fit: flip_rate must lie in [0,1]");
  }
  for (int T : setup.horizons) {
    if (T < 1) throw std::invalid_argument("compounding_fit: horizons must be positive");
  }
  CompoundingFit out;
  const std::size_t n_seeds = setup.seeds.size();
  out.samples.resize(setup.horizons.size() * n_seeds);
  const auto inner = std::make_shared<TabularLearner>();
  const ErrorInjectedLearner learner(inner, setup.flip_rate);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t job = next++; job < out.samples.size(); job = next++) {
      try {
        const int T = setup.horizons[job / n_seeds];
        const std::uint64_t seed = setup.seeds[job % n_seeds];
        EnvSpec env = setup.env;
        env.horizon = T;
        env.seed = seed;
        const TabularMdp mdp = build_env(env);
        ExpertOracle expert = optimal_expert(mdp);
        Hyperparameters hp = setup.hp;
        hp.seed = seed;
        const RunResult run = run_algorithm(setup.algorithm, mdp, expert, learner, hp);
        out.samples[job] = {T, seed, exact_cost(mdp, run.final_policy()) - exact_cost(mdp, expert.policy())};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(setup.jobs, static_cast<int>(out.samples.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<double> x;
  std::vector<double> y;
  for (const auto& s : out.samples) {
    if (s.regret <= 1e-12) {
      ++out.dropped;
      continue;
    }
    x.push_back(std::log(static_cast<double>(s.horizon)));
    y.push_back(std::log(s.regret));
  }
  out.fit = fit_line(x, y);
  return out;
}

}  // namespace imlab
