// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [work_dir]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "imlab/algorithms.hpp"
#include "imlab/analysis.hpp"
#include "imlab/dynamics.hpp"
#include "imlab/environments.hpp"
#include "imlab/experiment.hpp"
#include "imlab/expert.hpp"
#include "imlab/json_io.hpp"
#include "imlab/learners.hpp"
#include "imlab/rollout.hpp"
#include "oracles.hpp"

using namespace imlab;
namespace fs = std::filesystem;

namespace {

fs::path g_work;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::shared_ptr<const Learner> flipped(double rate, bool sampled) {
  return std::make_shared<ErrorInjectedLearner>(std::make_shared<TabularLearner>(), rate, sampled);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int exit_code_of(const std::string& args) {
  const std::string cmd = std::string(IMLAB_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::vector<int> kHorizons = {5, 10, 20, 40};
const std::vector<double> kFlips = {0.02, 0.05, 0.1};
constexpr int kGridSeeds = 20;

/// Runs `algo` over the cliff-walk grid and checks one asserted bound per run.
Outcome cliff_grid(Algorithm algo, int theorem, const Hyperparameters& base_hp) {
  Outcome out;
  int runs = 0;
  int violations = 0;
  double min_slack = INFINITY;
  int o1_over = 0;
  for (int T : kHorizons) {
    const TabularMdp mdp = build_cliffwalk({25, 1.0, true}, T);
    for (double flip : kFlips) {
      const auto learner = flipped(flip, true);
      for (int seed = 0; seed < kGridSeeds; ++seed) {
        ExpertOracle expert = optimal_expert(mdp);
        Hyperparameters hp = base_hp;
        hp.seed = static_cast<std::uint64_t>(seed);
        const RunResult run = run_algorithm(algo, mdp, expert, *learner, hp);
        const BoundReport r = bound_theorem(theorem, mdp, run.store.get(0), run.trace, run.store);
        ++runs;
        if (!r.asserted || !r.holds) ++violations;
        min_slack = std::min(min_slack, r.slack);
        if (theorem == 5 && r.constituents.at("o1_within_uT") != 1.0) ++o1_over;
      }
    }
  }
  out.require(runs == 240, "expected 240 runs");
  out.require(violations == 0, std::to_string(violations) + " violations");
  out.note(std::to_string(runs) + " " + to_string(algo) + " runs, theorem " + std::to_string(theorem) +
           ", violations " + std::to_string(violations) + ", min slack " + fmt("%.4g", min_slack));
  if (theorem == 5) out.note("reported: O(1) residue exceeded u*T on " + std::to_string(o1_over) + " runs");
  return out;
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out = cliff_grid(Algorithm::SupervisedBC, 1, Hyperparameters{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(secs < 60.0, "suite took " + fmt("%.1f", secs) + " s");
  out.note("elapsed " + fmt("%.2f", secs) + " s");
  return out;
}

Outcome criterion2() {
  Hyperparameters ft;
  ft.rollouts_per_iter = 20;
  Outcome a = cliff_grid(Algorithm::ForwardTraining, 2, ft);
  Outcome b = cliff_grid(Algorithm::Dagger, 5, Hyperparameters{});
  Outcome out;
  out.pass = a.pass && b.pass;
  for (auto* part : {&a, &b}) out.notes.insert(out.notes.end(), part->notes.begin(), part->notes.end());
  return out;
}

Outcome criterion3() {
  Outcome out;
  const std::pair<Algorithm, bool> cases[] = {
      {Algorithm::SupervisedBC, true}, {Algorithm::ForwardTraining, false}, {Algorithm::Dagger, false}};
  for (const auto& [algo, superlinear] : cases) {
    CompoundingSetup setup;
    setup.env.family = EnvFamily::Cliffwalk;
    setup.env.cliffwalk = {25, 1.0, true};
    setup.algorithm = algo;
    setup.horizons = kHorizons;
    setup.flip_rate = 0.05;
    for (std::uint64_t s = 0; s < 10; ++s) setup.seeds.push_back(s);
    if (algo == Algorithm::ForwardTraining) setup.hp.rollouts_per_iter = 100;
    const CompoundingFit fit = compounding_fit(setup);
    const std::string name = to_string(algo);
    out.require(fit.fit.defined, name + " exponent undefined");
    if (!fit.fit.defined) continue;
    out.note(name + ": slope " + fmt("%.4f", fit.fit.slope) + " (se " + fmt("%.4f", fit.fit.slope_std_error) +
             ", " + std::to_string(fit.fit.points) + " points, " + std::to_string(fit.dropped) + " dropped)");
    if (superlinear) {
      out.require(fit.fit.slope >= 1.8, name + " slope below 1.8");
    } else {
      out.require(fit.fit.slope <= 1.2, name + " slope above 1.2");
    }
    out.require(fit.fit.slope_std_error < 0.15, name + " slope standard error not below 0.15");
  }
  return out;
}

struct GridCsv {
  std::map<std::string, std::map<std::uint64_t, double>> final_J;
  std::map<std::uint64_t, std::vector<double>> dagger_curve;
};

GridCsv run_config(const std::string& name) {
  const fs::path dir = g_work / name;
  fs::remove_all(dir);
  const ExperimentConfig cfg =
      load_config(fs::path(IMLAB_CONFIG_DIR) / (name + ".yaml"), {"outputs.dir=" + dir.string()});
  const ExperimentOutcome run = run_experiment(cfg);
  GridCsv out;
  for (const CsvRow& r : read_results_csv(run.csv_path)) {
    if (r.iter == "final") {
      out.final_J[r.algo][r.seed] = r.J_exact;
    } else if (r.algo == "dagger") {
      out.dagger_curve[r.seed].push_back(r.J_exact);
    }
  }
  return out;
}

Outcome criterion4() {
  Outcome out;
  const GridCsv g = run_config("acceptance_gridworld");
  const auto mean = [](const std::map<std::uint64_t, double>& m) {
    double s = 0.0;
    for (const auto& [seed, J] : m) s += J;
    return m.empty() ? NAN : s / m.size();
  };
  out.require(g.final_J.count("dagger") == 1, "no dagger rows");
  if (!out.pass) return out;
  const auto& dagger = g.final_J.at("dagger");
  out.require(dagger.size() == 50, "expected 50 dagger seeds");
  const double dagger_mean = mean(dagger);
  std::string line = "mean J: dagger " + fmt("%.4f", dagger_mean);
  for (const char* other : {"supervised_bc", "smile", "searn"}) {
    const auto it = g.final_J.find(other);
    out.require(it != g.final_J.end() && it->second.size() == 50, std::string("missing rows for ") + other);
    if (it == g.final_J.end()) continue;
    const double m = mean(it->second);
    line += std::string(", ") + other + " " + fmt("%.4f", m);
    out.require(dagger_mean < m, std::string("dagger mean not below ") + other);
  }
  out.note(line);
  int wins = 0;
  for (const auto& [seed, J] : dagger) {
    const auto& bc = g.final_J.at("supervised_bc");
    if (bc.count(seed) && J < bc.at(seed)) ++wins;
  }
  out.note("dagger beats supervised_bc on " + std::to_string(wins) + " of " + std::to_string(dagger.size()) + " seeds");
  out.require(wins >= 0.8 * dagger.size(), "per-seed win rate below 80%");
  return out;
}

Outcome criterion5() {
  Outcome out;
  const GridCsv g = run_config("dagger_convergence");
  int ok = 0;
  int worst = 0;
  for (const auto& [seed, curve] : g.dagger_curve) {
    // Smallest 1-based i0 such that J is non-increasing from i0 on.
    int i0 = static_cast<int>(curve.size());
    while (i0 > 1 && curve[i0 - 2] >= curve[i0 - 1] - 1e-9) --i0;
    if (i0 <= 30) ++ok;
    worst = std::max(worst, i0);
  }
  const std::size_t n = g.dagger_curve.size();
  out.require(n == 50, "expected 50 seeds");
  out.require(ok >= 0.9 * n, "monotone tail by iteration 30 on fewer than 90% of seeds");
  out.note("monotone tail with i0 <= 30 on " + std::to_string(ok) + " of " + std::to_string(n) +
           " seeds (latest i0 " + std::to_string(worst) + ")");
  return out;
}

Outcome criterion6() {
  Outcome out;
  double worst = 0.0;
  for (double alpha : {1.0 / 64, 0.01, 0.1, 0.3}) {
    for (int n = 1; n <= 200; ++n) {
      const auto w = smile_weights(alpha, n);
      double independent = 1.0;
      for (int k = 0; k < n; ++k) independent *= 1.0 - alpha;
      worst = std::max(worst, std::abs(w[0] - independent));
      double factor = 1.0;
      for (int j = 1; j <= n; ++j) {
        worst = std::max(worst, std::abs(w[j] - alpha * factor));
        factor *= 1.0 - alpha;
      }
      const auto un = unmix_weights(w);
      double sum = 0.0;
      for (double x : un) sum += x;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  out.require(worst <= 1e-12, "closed-form weights off by " + fmt("%.3g", worst));

  // Weights carried by an actual run with N = 200.
  const TabularMdp small = build_cliffwalk({10, 1.0, true}, 5);
  Hyperparameters hp;
  hp.iterations = 200;
  hp.alpha = 0.02;
  {
    ExpertOracle expert = optimal_expert(small);
    const RunResult run = smile(small, expert, *flipped(0.1, false), hp);
    const auto closed = unmix_weights(smile_weights(0.02, 200));
    double d = std::abs(run.trace.scalars.at("expert_weight_final") - std::pow(0.98, 200));
    for (std::size_t k = 0; k < closed.size(); ++k) d = std::max(d, std::abs(run.trace.mixture_weights[k] - closed[k]));
    out.require(d <= 1e-12, "run weights off by " + fmt("%.3g", d));
    worst = std::max(worst, d);
  }
  out.note("largest weight error " + fmt("%.3g", worst));

  // Perfect classifier: the unmixed policy behaves like the expert.
  double gap = 0.0;
  for (MixingMode mode : {MixingMode::Trajectory, MixingMode::PerStep}) {
    const TabularMdp mdp = build_cliffwalk({25, 1.0, true}, 8);
    Hyperparameters p;
    p.mixing = mode;
    ExpertOracle expert = optimal_expert(mdp);
    const RunResult run = smile(mdp, expert, TabularLearner(), p);
    gap = std::max(gap, std::abs(exact_cost(mdp, run.final_policy()) - exact_cost(mdp, expert.policy())));
  }
  out.require(gap <= 1e-9, "perfect-learner unmixed policy differs from the expert by " + fmt("%.3g", gap));

  // Unmixing costs at most one: every run here, both mixing modes.
  int runs = 0;
  int failed = 0;
  double largest_gap = -INFINITY;
  for (MixingMode mode : {MixingMode::Trajectory, MixingMode::PerStep}) {
    for (double flip : {0.05, 0.2}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const TabularMdp mdp = build_cliffwalk({25, 1.0, true}, 8);
        Hyperparameters p;
        p.mixing = mode;
        p.seed = seed;
        ExpertOracle expert = optimal_expert(mdp);
        const RunResult run = smile(mdp, expert, *flipped(flip, true), p);
        const BoundReport r = bound_theorem(4, mdp, run.store.get(0), run.trace, run.store);
        ++runs;
        if (r.constituents.at("unmix_lemma_holds") != 1.0) ++failed;
        largest_gap = std::max(largest_gap, r.constituents.at("unmix_gap"));
        if (mode == MixingMode::PerStep && !r.holds) ++failed;
      }
    }
  }
  out.require(failed == 0, std::to_string(failed) + " unmixing or bound failures");
  out.note(std::to_string(runs) + " SMILe runs (N = " + std::to_string(default_iterations(Algorithm::Smile, 8)) +
           "), largest J(unmixed) - J(mixture) " + fmt("%.4g", largest_gap));
  return out;
}

Outcome criterion7() {
  Outcome out;
  std::mt19937_64 gen(7007);
  double residual = 0.0;
  double oracle_residual = 0.0;
  int union_failures = 0;
  for (int c = 0; c < 100; ++c) {
    const int S = 1 + static_cast<int>(gen() % 5);
    const int A = 2 + static_cast<int>(gen() % 3);
    const int T = 1 + static_cast<int>(gen() % 8);
    const TabularMdp mdp = oracle::random_mdp(gen, S, A, T);
    const Policy star = optimal_policy(mdp);
    Policy learned = oracle::random_policy(gen, S, A, T);
    if (learned.is_trajectory_mixture()) learned = flip_policy(star, 0.2);
    const MistakeDecomposition m = mistake_decomposition(mdp, learned, star);
    residual = std::max(residual, m.identity_residual);
    // Recombine against the enumerated expert distribution as well.
    const auto d = oracle::enumerate(mdp, star).dist;
    double cumulative = 0.0;
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        const double mix = m.p[t] * m.no_mistake[t][s] + (1.0 - m.p[t]) * m.after_mistake[t][s];
        oracle_residual = std::max(oracle_residual, std::abs(d[t][s] - mix));
      }
      if (m.p[t + 1] < 1.0 - (cumulative + m.eps[t]) - 1e-12) ++union_failures;
      cumulative += m.eps[t];
    }
  }
  out.require(residual <= 1e-9, "identity residual " + fmt("%.3g", residual));
  out.require(oracle_residual <= 1e-9, "residual against enumeration " + fmt("%.3g", oracle_residual));
  out.require(union_failures == 0, std::to_string(union_failures) + " union-bound failures");
  out.note("100 cases: residual " + fmt("%.3g", residual) + ", against enumeration " + fmt("%.3g", oracle_residual) +
           ", union-bound failures " + std::to_string(union_failures));
  return out;
}

Outcome criterion8() {
  Outcome out;
  std::mt19937_64 gen(8008);
  // Enumeration suite: every (S, T) with S^T <= 1e5 for S <= 5 and T <= 12,
  // three action counts each, plus the pinned fixture and small named envs.
  std::vector<TabularMdp> suite;
  for (int S = 1; S <= 5; ++S) {
    for (int T = 1; T <= 12; ++T) {
      if (std::pow(S, T) > 1e5) continue;
      for (int A = 1; A <= 3; ++A) suite.push_back(oracle::random_mdp(gen, S, A, T));
    }
  }
  suite.push_back(build_random_mdp({3, 2, 1.0, 1.0}, 42, 6));
  suite.push_back(build_cliffwalk({3, 0.5, true}, 6));
  GridworldParams g;
  g.width = 2;
  g.height = 2;
  suite.push_back(build_gridworld(g, 8));
  double worst = 0.0;
  for (const TabularMdp& mdp : suite) {
    for (int k = 0; k < 3; ++k) {
      const Policy p = oracle::random_policy(gen, mdp.num_states(), mdp.num_actions(), mdp.horizon());
      const auto brute = oracle::enumerate(mdp, p);
      worst = std::max(worst, std::abs(exact_cost(mdp, p) - brute.cost));
      const auto dist = exact_state_distributions(mdp, p);
      for (int t = 0; t < mdp.horizon(); ++t) {
        for (int s = 0; s < mdp.num_states(); ++s) {
          worst = std::max(worst, std::abs(dist.per_step[t][s] - brute.dist[t][s]));
        }
      }
    }
  }
  out.require(worst <= 1e-9, "enumeration mismatch " + fmt("%.3g", worst));
  out.note(std::to_string(suite.size()) + " instances x 3 policies vs enumeration, max error " + fmt("%.3g", worst));

  int mc_fail = 0;
  double worst_z = 0.0;
  for (int c = 0; c < 30; ++c) {
    const int S = 2 + c % 4;
    const int A = 1 + c % 3;
    const int T = 3 + c % 6;
    const TabularMdp mdp = oracle::random_mdp(gen, S, A, T);
    const Policy p = oracle::random_policy(gen, S, A, T);
    const MonteCarloEstimate mc = monte_carlo_cost(mdp, p, 5000, 9000 + c);
    const double exact = exact_cost(mdp, p);
    const double z = mc.std_error > 0 ? std::abs(mc.mean - exact) / mc.std_error : (mc.mean == exact ? 0.0 : INFINITY);
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++mc_fail;
  }
  out.require(mc_fail == 0, std::to_string(mc_fail) + " Monte-Carlo cases outside 3 standard errors");
  out.note("30 Monte-Carlo cases, largest |z| " + fmt("%.3f", worst_z));

  const int shapes[][3] = {{2, 2, 5}, {3, 2, 6}, {2, 3, 3}, {4, 2, 4}, {1, 4, 9},
                           {3, 3, 2}, {2, 2, 9}, {5, 2, 3}, {2, 4, 4}, {3, 2, 5}};
  double opt_gap = 0.0;
  for (const auto& sh : shapes) {
    const TabularMdp mdp = oracle::random_mdp(gen, sh[0], sh[1], sh[2], 0.4);
    opt_gap = std::max(opt_gap, std::abs(exact_cost(mdp, optimal_policy(mdp)) - oracle::exhaustive_optimum(mdp)));
  }
  out.require(opt_gap <= 1e-9, "optimal policy off the exhaustive optimum by " + fmt("%.3g", opt_gap));
  out.note("10 exhaustive optimal-policy checks, max gap " + fmt("%.3g", opt_gap));
  return out;
}

Outcome criterion9() {
  Outcome out;
  std::mt19937_64 gen(9009);
  std::size_t checked = 0;
  int mismatched = 0;
  for (int c = 0; c < 10; ++c) {
    const TabularMdp mdp = oracle::random_deterministic_mdp(gen, 4 + c % 3, 3, 6 + c % 3);
    ExpertOracle expert = optimal_expert(mdp);
    const QTable q = q_values(mdp, expert.policy());
    Hyperparameters hp;
    hp.seed = static_cast<std::uint64_t>(c);
    hp.iterations = 3;
    hp.samples_per_iter = 100;
    const RunResult run = aggrevate(mdp, expert, TabularLearner(), hp);
    for (const Record& r : run.dataset->records()) {
      for (int a = 0; a < mdp.num_actions(); ++a) {
        if (std::isnan(r.costs[a])) continue;
        ++checked;
        if (r.costs[a] != q(r.step, r.state, a)) ++mismatched;
      }
    }
  }
  out.require(mismatched == 0, std::to_string(mismatched) + " recorded samples differ from q_values");
  out.note(std::to_string(checked) + " recorded cost-to-go samples on deterministic MDPs, " +
           std::to_string(mismatched) + " mismatches");

  int outside = 0;
  double worst_z = 0.0;
  const TabularMdp stochastic[] = {build_random_mdp({3, 2, 1.0, 1.0}, 42, 6), build_gridworld({}, 10),
                                   oracle::random_mdp(gen, 5, 3, 8)};
  for (const TabularMdp& mdp : stochastic) {
    ExpertOracle expert = optimal_expert(mdp);
    const QTable q = q_values(mdp, expert.policy());
    for (int k = 0; k < 4; ++k) {
      const int t = k % mdp.horizon();
      const StateId s = static_cast<StateId>(gen() % mdp.num_states());
      const ActionId a = static_cast<ActionId>(gen() % mdp.num_actions());
      const int n = 10000;
      double sum = 0.0;
      double sq = 0.0;
      for (int i = 0; i < n; ++i) {
        CounterRng rng(derive_seed(99, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i)}));
        const double x = sample_cost_to_go(mdp, expert, t, s, a, rng);
        sum += x;
        sq += x * x;
      }
      const double mean = sum / n;
      const double se = std::sqrt(std::max(0.0, sq / n - mean * mean) / (n - 1));
      const double diff = std::abs(mean - q(t, s, a));
      const double z = se > 0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++outside;
    }
  }
  out.require(outside == 0, std::to_string(outside) + " stochastic cases outside 3 standard errors");
  out.note("12 stochastic (t, s, a) cases with 10^4 samples, largest |z| " + fmt("%.3f", worst_z));
  return out;
}

Outcome criterion10() {
  Outcome out;
  const fs::path dir = g_work / "interfaces";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string config = (fs::path(IMLAB_CONFIG_DIR) / "gridworld_compare.yaml").string();
  const int first = exit_code_of("run -c " + config + " --out-dir " + (dir / "one").string());
  const int second = exit_code_of("run -c " + config + " --out-dir " + (dir / "two").string() + " --jobs 2");
  const std::string a = slurp(dir / "one" / "results.csv");
  const std::string b = slurp(dir / "two" / "results.csv");
  out.require(first == 0 && second == 0, "run exited " + std::to_string(first) + "/" + std::to_string(second));
  out.require(!a.empty() && a == b, "CSV differs between identical runs");
  out.note("CSV byte-identical across two runs (" + std::to_string(a.size()) + " bytes)");

  // Round trips.
  std::mt19937_64 gen(1010);
  bool trips = true;
  for (int c = 0; c < 25; ++c) {
    const int S = 1 + c % 5;
    const int A = 1 + c % 3;
    const int T = 1 + c % 6;
    const TabularMdp mdp = oracle::random_mdp(gen, S, A, T);
    trips = trips && mdp_from_json(Json::parse(to_json(mdp).dump())) == mdp;
    const Policy p = oracle::random_policy(gen, S, A, T);
    trips = trips && policy_from_json(Json::parse(to_json(p).dump())) == p;
    Dataset d(S, A, "round trip");
    for (int i = 0; i < 10; ++i) {
      std::vector<double> costs(A);
      for (double& x : costs) x = (gen() % 4 == 0) ? NAN : std::ldexp(static_cast<double>(gen() % 1000003), -20);
      d.add(static_cast<int>(gen() % S), static_cast<int>(gen() % T), static_cast<int>(gen() % A), costs);
    }
    trips = trips && dataset_from_json(Json::parse(to_json(d).dump())) == d;
  }
  out.require(trips, "a JSON round trip changed a value");
  out.note("MDP, policy and dataset JSON round trips value-exact on 25 cases each");

  // Negative paths.
  std::ofstream(dir / "invalid.yaml") << "env:\n  family: gridworld\n  horizon: -3\nalgo:\n  name: dagger\n";
  const int invalid = exit_code_of("run -c " + (dir / "invalid.yaml").string());
  out.require(invalid == 2, "invalid config exited " + std::to_string(invalid));

  const std::string trace = (dir / "one" / "traces" / "dagger_seed0.json").string();
  const int mismatch = exit_code_of("bounds " + trace + " --theorem 2");
  out.require(mismatch == 2, "mismatched theorem exited " + std::to_string(mismatch));

  // A 50/50 expert on a one-state problem: the learner always takes the
  // costly action, which the u-bound does not cover for stochastic experts.
  const TabularMdp coin(1, 2, 4, {1, 1}, {0, 1}, {1});
  PolicyStore store(Policy::stochastic(1, 2, {0.5, 0.5}));
  const int learned = store.add(Policy::non_stationary(std::vector<Policy>(4, constant_policy(1, 2, 1))));
  RunTrace tr;
  tr.algorithm = Algorithm::ForwardTraining;
  tr.learner = "handcrafted";
  tr.expert_label = "coin";
  IterationRecord rec;
  rec.iteration = 1;
  rec.policy_id = learned;
  rec.executed_policy_id = 0;
  rec.eps_distribution = "own";
  tr.iterations.push_back(rec);
  tr.final_policy_id = learned;
  write_json_file(dir / "coin_trace.json", to_json(RunArtifact{"coin", coin, tr, store}));
  const int violated = exit_code_of("bounds " + (dir / "coin_trace.json").string() + " -t 2");
  out.require(violated == 1, "stochastic-expert trace exited " + std::to_string(violated));
  out.note("exit codes: invalid config " + std::to_string(invalid) + ", mismatched theorem " +
           std::to_string(mismatch) + ", violated bound " + std::to_string(violated));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "imlab_acceptance";
  fs::create_directories(g_work);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 theorem-1 bound on the cliff-walk grid", criterion1},
      {"2 linear bounds for forward training and DAgger", criterion2},
      {"3 compounding separation", criterion3},
      {"4 gridworld dominance of DAgger", criterion4},
      {"5 DAgger convergence tail", criterion5},
      {"6 SMILe mixture algebra", criterion6},
      {"7 mistake decomposition", criterion7},
      {"8 oracle equivalence", criterion8},
      {"9 AggreVaTe cost-to-go fidelity", criterion9},
      {"10 determinism and interfaces", criterion10},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
