#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's dynamics code: policies are read only through
// Policy::probability, and MDPs only through their raw tables.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"

namespace oracle {

using imlab::ActionId;
using imlab::Policy;
using imlab::StateId;
using imlab::TabularMdp;

/// pi(a | s, t) as a plain callable, so the enumerators can mix policies.
using Rule = std::function<double(int t, StateId s, ActionId a)>;

inline Rule rule_of(const Policy& p) {
  return [p](int t, StateId s, ActionId a) { return p.probability(t, s, a); };
}

struct Enumerated {
  double cost = 0.0;
  std::vector<std::vector<double>> dist;
  std::uint64_t sequences = 0;
};

/// Sums over every state sequence s_0..s_{T-1}. The action at each step is
/// marginalized jointly with the next state, so the work is S^T sequences.
inline Enumerated enumerate(const TabularMdp& mdp, const Rule& pi) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int T = mdp.horizon();
  Enumerated out;
  out.dist.assign(T, std::vector<double>(S, 0.0));
  std::function<void(int, StateId, double, double)> walk = [&](int t, StateId s, double prob, double cost) {
    out.dist[t][s] += prob;
    if (t == T - 1) {
      double c = 0.0;
      for (ActionId a = 0; a < A; ++a) c += pi(t, s, a) * mdp.cost(s, a);
      out.cost += cost + prob * c;
      ++out.sequences;
      return;
    }
    for (StateId n = 0; n < S; ++n) {
      double m = 0.0;
      double w = 0.0;
      for (ActionId a = 0; a < A; ++a) {
        const double pa = pi(t, s, a) * mdp.transition(s, a, n);
        m += pa;
        w += pa * mdp.cost(s, a);
      }
      if (m == 0.0) continue;
      walk(t + 1, n, prob * m, cost * m + prob * w);
    }
  };
  for (StateId s = 0; s < S; ++s) {
    if (mdp.initial()[s] > 0.0) walk(0, s, mdp.initial()[s], 0.0);
  }
  return out;
}

/// Trajectory mixtures are evaluated component by component.
inline Enumerated enumerate(const TabularMdp& mdp, const Policy& p) {
  if (!p.is_trajectory_mixture()) return enumerate(mdp, rule_of(p));
  Enumerated total;
  total.dist.assign(mdp.horizon(), std::vector<double>(mdp.num_states(), 0.0));
  for (std::size_t k = 0; k < p.components().size(); ++k) {
    const Enumerated part = enumerate(mdp, p.components()[k]);
    const double w = p.weights()[k];
    total.cost += w * part.cost;
    for (int t = 0; t < mdp.horizon(); ++t) {
      for (StateId s = 0; s < mdp.num_states(); ++s) total.dist[t][s] += w * part.dist[t][s];
    }
    total.sequences += part.sequences;
  }
  return total;
}

/// Plain forward evaluation of a deterministic step-indexed action table
/// (act[t * S + s]); used where enumeration would be too slow.
inline double forward_cost(const TabularMdp& mdp, const std::vector<int>& act) {
  const int S = mdp.num_states();
  std::vector<double> d(mdp.initial().begin(), mdp.initial().end());
  double J = 0.0;
  for (int t = 0; t < mdp.horizon(); ++t) {
    std::vector<double> next(S, 0.0);
    for (StateId s = 0; s < S; ++s) {
      if (d[s] == 0.0) continue;
      const ActionId a = act[static_cast<std::size_t>(t) * S + s];
      J += d[s] * mdp.cost(s, a);
      for (StateId n = 0; n < S; ++n) next[n] += d[s] * mdp.transition(s, a, n);
    }
    d.swap(next);
  }
  return J;
}

/// Minimum cost over all A^(S T) deterministic non-stationary policies.
inline double exhaustive_optimum(const TabularMdp& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const std::size_t n = static_cast<std::size_t>(S) * mdp.horizon();
  std::vector<int> act(n, 0);
  double best = INFINITY;
  while (true) {
    best = std::min(best, forward_cost(mdp, act));
    std::size_t i = 0;
    while (i < n && ++act[i] == A) act[i++] = 0;
    if (i == n) break;
  }
  return best;
}

/// Average, over every k-subset of steps, of the enumerated cost when
/// `replacement` acts on the subset and `base` elsewhere.
inline double naive_substitution_cost(const TabularMdp& mdp, const Rule& base, const Rule& replacement, int k) {
  const int T = mdp.horizon();
  double total = 0.0;
  int subsets = 0;
  std::vector<char> on(T, 0);
  std::function<void(int, int)> choose = [&](int from, int left) {
    if (left == 0) {
      const Rule mixed = [&](int t, StateId s, ActionId a) { return on[t] ? replacement(t, s, a) : base(t, s, a); };
      total += enumerate(mdp, mixed).cost;
      ++subsets;
      return;
    }
    for (int t = from; t < T; ++t) {
      on[t] = 1;
      choose(t + 1, left - 1);
      on[t] = 0;
    }
  };
  choose(0, k);
  return total / subsets;
}

// Hand-rolled generators on a separate engine (std::mt19937_64), so the
// tests do not share a random stream with the code under test.

inline std::vector<double> random_simplex(std::mt19937_64& gen, int n, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) {
    x = u(gen) < zero_prob ? 0.0 : 0.05 + u(gen);
    total += x;
  }
  if (total == 0.0) {
    w[std::uniform_int_distribution<int>(0, n - 1)(gen)] = 1.0;
    return w;
  }
  for (double& x : w) x /= total;
  return w;
}

inline TabularMdp random_mdp(std::mt19937_64& gen, int S, int A, int T, double zero_prob = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> transition;
  for (int sa = 0; sa < S * A; ++sa) {
    const auto row = random_simplex(gen, S, zero_prob);
    transition.insert(transition.end(), row.begin(), row.end());
  }
  std::vector<double> cost(static_cast<std::size_t>(S) * A);
  for (double& c : cost) c = u(gen) < 0.2 ? 0.0 : u(gen);
  return TabularMdp(S, A, T, std::move(transition), std::move(cost), random_simplex(gen, S, zero_prob));
}

/// Every (s, a) row is a point mass.
inline TabularMdp random_deterministic_mdp(std::mt19937_64& gen, int S, int A, int T) {
  std::uniform_int_distribution<int> pick(0, S - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S, 0.0);
  for (int sa = 0; sa < S * A; ++sa) transition[static_cast<std::size_t>(sa) * S + pick(gen)] = 1.0;
  std::vector<double> cost(static_cast<std::size_t>(S) * A);
  for (double& c : cost) c = u(gen);
  std::vector<double> initial(S, 0.0);
  initial[pick(gen)] = 1.0;
  return TabularMdp(S, A, T, std::move(transition), std::move(cost), std::move(initial));
}

inline Policy random_stochastic(std::mt19937_64& gen, int S, int A) {
  std::vector<double> p;
  for (int s = 0; s < S; ++s) {
    const auto row = random_simplex(gen, A, 0.3);
    p.insert(p.end(), row.begin(), row.end());
  }
  return Policy::stochastic(S, A, std::move(p));
}

inline Policy random_deterministic(std::mt19937_64& gen, int S, int A) {
  std::uniform_int_distribution<int> pick(0, A - 1);
  std::vector<ActionId> a(S);
  for (auto& x : a) x = pick(gen);
  return Policy::deterministic(A, std::move(a));
}

/// Any of the four policy kinds, chosen at random.
inline Policy random_policy(std::mt19937_64& gen, int S, int A, int T) {
  const int kind = std::uniform_int_distribution<int>(0, 4)(gen);
  switch (kind) {
    case 0:
      return random_deterministic(gen, S, A);
    case 1:
      return random_stochastic(gen, S, A);
    case 2: {
      std::vector<Policy> steps;
      for (int t = 0; t < T; ++t) {
        steps.push_back(t % 2 ? random_stochastic(gen, S, A) : random_deterministic(gen, S, A));
      }
      return Policy::non_stationary(std::move(steps));
    }
    default: {
      const auto w = random_simplex(gen, 3);
      std::vector<Policy> comps = {random_deterministic(gen, S, A), random_stochastic(gen, S, A),
                                   random_deterministic(gen, S, A)};
      return Policy::mixture(w, std::move(comps),
                             kind == 3 ? imlab::MixingMode::Trajectory : imlab::MixingMode::PerStep);
    }
  }
}

}  // namespace oracle
