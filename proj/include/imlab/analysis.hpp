#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imlab/algorithms.hpp"
#include "imlab/environments.hpp"
#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"

namespace imlab {

/// One regret inequality evaluated on a finished run.
struct BoundReport {
  int theorem = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = false;
  /// False when the inequality is only reported (loose or proxy forms).
  bool asserted = true;
  /// Which state distribution eps was measured under.
  std::string eps_distribution;
  std::map<std::string, double> constituents;
  std::string note;
};

constexpr double kBoundTol = 1e-9;

/// Algorithm each theorem id belongs to: 1 supervised_bc, 2 forward_training,
/// 3 searn, 4 smile, 5 and 6 dagger, 7 aggrevate.
Algorithm theorem_algorithm(int theorem);
bool theorem_applies(int theorem, Algorithm algo);

/// Recomputes every constituent from the MDP, the expert policy and the
/// stored policies, so a trace edited after the run is caught.
BoundReport bound_theorem(int theorem, const TabularMdp& mdp, const Policy& expert, const RunTrace& trace,
                          const PolicyStore& store);

/// Expected cost when `replacement` acts at k uniformly chosen steps and
/// `base` acts at all others.
struct PolicyDisadvantage {
  int k = 1;
  double J_bar = 0.0;
  double J_base = 0.0;
  /// J_bar - J_base.
  double value = 0.0;
};

PolicyDisadvantage policy_disadvantage(const TabularMdp& mdp, const Policy& base, const Policy& replacement, int k);
PolicyDisadvantage policy_disadvantage(const TabularMdp& mdp, const ActionTable& base,
                                       const ActionTable& replacement, int k);

/// Couples a learned policy with a deterministic expert along the expert's
/// own trajectories. Steps are 0-based: p[t] is the probability that the
/// learner agreed with the expert at steps 0..t-1, so p[0] = 1 and p has T+1
/// entries. no_mistake[t] and after_mistake[t] are the expert's step-t state
/// distribution conditioned on each case (zero rows when the case has no mass).
struct MistakeDecomposition {
  std::vector<double> p;
  std::vector<std::vector<double>> no_mistake;
  std::vector<std::vector<double>> after_mistake;
  /// Per-step disagreement under the expert's distribution.
  std::vector<double> eps;
  /// Largest componentwise |d^t - p[t] no_mistake[t] - (1 - p[t]) after_mistake[t]|.
  double identity_residual = 0.0;
  /// Largest violation of p[t] >= 1 - sum_{i<t} eps[i] (0 when it holds).
  double union_bound_violation = 0.0;
  bool identity_holds(double tol = 1e-9) const { return identity_residual <= tol; }
  bool union_bound_holds(double tol = 1e-9) const { return union_bound_violation <= tol; }
};

MistakeDecomposition mistake_decomposition(const TabularMdp& mdp, const Policy& learned, const Policy& expert);

/// Least-squares line through (x, y).
struct LineFit {
  bool defined = false;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  std::size_t points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CompoundingSample {
  int horizon = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
};

struct CompoundingFit {
  /// log(regret) against log(T); zero-regret samples are left out and
  /// `fit.defined` is false when nothing remains.
  LineFit fit;
  std::vector<CompoundingSample> samples;
  std::size_t dropped = 0;
};

struct CompoundingSetup {
  EnvSpec env;
  Algorithm algorithm = Algorithm::SupervisedBC;
  Hyperparameters hp;
  std::vector<int> horizons;
  double flip_rate = 0.0;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
};

/// Runs the algorithm with an error-injected tabular learner for every
/// (T, seed), then fits the log-log slope of exact regret. The seed feeds
/// both the run and, for random MDPs, the environment. Needs at least four
/// distinct horizons and ten seeds.
CompoundingFit compounding_fit(const CompoundingSetup& setup);

}  // namespace imlab
