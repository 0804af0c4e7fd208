#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "imlab/algorithms.hpp"
#include "imlab/dynamics.hpp"
#include "imlab/environments.hpp"
#include "imlab/expert.hpp"
#include "imlab/learners.hpp"
#include "oracles.hpp"

using namespace imlab;

namespace {

const Algorithm kAll[] = {Algorithm::SupervisedBC, Algorithm::ForwardTraining, Algorithm::Searn, Algorithm::Smile,
                          Algorithm::Rail,         Algorithm::Dagger,          Algorithm::Aggrevate};

Hyperparameters small_hp(Algorithm algo, int T) {
  Hyperparameters hp;
  hp.seed = 12;
  hp.rollouts_per_iter = 20;
  hp.samples_per_iter = 200;
  if (algo == Algorithm::Smile) hp.iterations = 30;
  if (algo == Algorithm::Dagger) hp.iterations = 6;
  if (algo == Algorithm::Aggrevate) hp.iterations = 4;
  (void)T;
  return hp;
}

}  // namespace

TEST_CASE("names round trip and unknown names are rejected") {
  for (Algorithm a : kAll) CHECK(algorithm_from_string(to_string(a)) == a);
  CHECK(algorithm_from_string("bc") == Algorithm::SupervisedBC);
  CHECK_THROWS_AS(algorithm_from_string("reinforce"), std::invalid_argument);
}

TEST_CASE("default iteration counts") {
  CHECK(default_iterations(Algorithm::SupervisedBC, 9) == 1);
  CHECK(default_iterations(Algorithm::ForwardTraining, 9) == 9);
  CHECK(default_iterations(Algorithm::Rail, 9) == 9);
  CHECK(default_iterations(Algorithm::Smile, 8) == static_cast<int>(std::ceil(2 * 64 * std::log(8.0))));
  CHECK(default_iterations(Algorithm::Smile, 1) == 1);
  CHECK(default_alpha(8) == 1.0 / 64);
}

TEST_CASE("perfect learner reaches the optimum with every algorithm") {
  // Cliff walk with T <= length: the optimal policy is stationary in the
  // state, so a tabular learner can represent it.
  const TabularMdp mdp = build_cliffwalk({12, 1.0, true}, 10);
  const double J_star = exact_cost(mdp, optimal_policy(mdp));
  for (Algorithm algo : kAll) {
    CAPTURE(to_string(algo));
    ExpertOracle expert = optimal_expert(mdp);
    const RunResult run = run_algorithm(algo, mdp, expert, TabularLearner(), small_hp(algo, 10));
    CHECK(std::abs(exact_cost(mdp, run.final_policy()) - J_star) <= 1e-9);
    CHECK(run.store.get(0) == expert.policy());
    CHECK(run.trace.algorithm == algo);
    CHECK(run.trace.expert_label == "optimal");
  }
}

TEST_CASE("perfect learner on a single-state problem") {
  std::mt19937_64 gen(4);
  const TabularMdp mdp = oracle::random_mdp(gen, 1, 4, 6);
  const double J_star = exact_cost(mdp, optimal_policy(mdp));
  for (Algorithm algo : kAll) {
    CAPTURE(to_string(algo));
    ExpertOracle expert = optimal_expert(mdp);
    const RunResult run = run_algorithm(algo, mdp, expert, TabularLearner(), small_hp(algo, 6));
    CHECK(std::abs(exact_cost(mdp, run.final_policy()) - J_star) <= 1e-9);
  }
}

TEST_CASE("expert queries are counted and recorded") {
  const TabularMdp mdp = build_gridworld({}, 8);
  Hyperparameters hp;
  hp.rollouts_per_iter = 7;
  hp.seed = 2;
  ExpertOracle bc_expert = optimal_expert(mdp);
  const RunResult bc = supervised_bc(mdp, bc_expert, TabularLearner(), hp);
  REQUIRE(bc.trace.iterations.size() == 1);
  CHECK(bc.trace.iterations[0].expert_queries == 7u * 8u);
  CHECK(bc.trace.iterations[0].dataset_size == 56);
  CHECK(bc_expert.query_count() == 56);
  CHECK(bc.trace.iterations[0].eps_distribution == "expert");

  hp.iterations = 5;
  ExpertOracle dg_expert = optimal_expert(mdp);
  const RunResult dg = dagger(mdp, dg_expert, TabularLearner(), hp);
  REQUIRE(dg.trace.iterations.size() == 5);
  std::uint64_t prev = 0;
  for (const auto& rec : dg.trace.iterations) {
    CHECK(rec.expert_queries > prev);
    prev = rec.expert_queries;
    CHECK(rec.dataset_size == static_cast<std::size_t>(rec.iteration) * 7 * 8);
  }
  CHECK(prev == dg_expert.query_count());
  REQUIRE(dg.dataset.has_value());
  CHECK(dg.dataset->size() == 5u * 7u * 8u);
}

TEST_CASE("dagger executes the expert first, then its own previous policy") {
  const TabularMdp mdp = build_gridworld({}, 8);
  Hyperparameters hp;
  hp.iterations = 4;
  hp.seed = 9;
  ExpertOracle expert = optimal_expert(mdp);
  const RunResult run = dagger(mdp, expert, ErrorInjectedLearner(std::make_shared<TabularLearner>(), 0.1), hp);
  CHECK(run.trace.iterations[0].executed_policy_id == 0);
  for (std::size_t i = 1; i < run.trace.iterations.size(); ++i) {
    CHECK(run.trace.iterations[i].executed_policy_id == run.trace.iterations[i - 1].policy_id);
  }
  double best = INFINITY;
  for (const auto& rec : run.trace.iterations) best = std::min(best, rec.J_exact);
  CHECK(exact_cost(mdp, run.final_policy()) == best);
  CHECK(run.trace.scalars.at("eps_N") >= 0.0);
  CHECK(run.trace.scalars.at("eps_N") <= 1.0);
  CHECK(run.trace.scalars.at("eps_tilde_N") == run.trace.scalars.at("eps_N"));
}

TEST_CASE("dagger coaching stores hope targets and the lambda schedule") {
  const TabularMdp mdp = build_gridworld({}, 6);
  Hyperparameters hp;
  hp.iterations = 3;
  hp.coaching = true;
  hp.lambda0 = 2.0;
  hp.lambda_decay = 0.5;
  ExpertOracle expert = optimal_expert(mdp);
  const RunResult run = dagger(mdp, expert, TabularLearner(), hp);
  CHECK(run.trace.iterations[0].targets.empty());
  CHECK(run.trace.iterations[1].targets.size() == 6u * 25u);
  CHECK(run.trace.iterations[2].extra.at("lambda") == doctest::Approx(0.5));
  for (int a : run.trace.iterations[1].targets) {
    CHECK(a >= 0);
    CHECK(a < 4);
  }
}

TEST_CASE("forward training needs exactly T iterations and with T = 1 equals behaviour cloning") {
  const TabularMdp mdp = build_gridworld({}, 5);
  Hyperparameters hp;
  hp.iterations = 4;
  ExpertOracle expert = optimal_expert(mdp);
  CHECK_THROWS_AS(forward_training(mdp, expert, TabularLearner(), hp), std::invalid_argument);
  CHECK_THROWS_AS(rail(mdp, expert, TabularLearner(), hp), std::invalid_argument);

  const TabularMdp one = build_gridworld({}, 1);
  Hyperparameters hp1;
  hp1.rollouts_per_iter = 6;
  ExpertOracle e1 = optimal_expert(one);
  ExpertOracle e2 = optimal_expert(one);
  const RunResult ft = forward_training(one, e1, TabularLearner(), hp1);
  const RunResult bc = supervised_bc(one, e2, TabularLearner(), hp1);
  CHECK(exact_cost(one, ft.final_policy()) == exact_cost(one, bc.final_policy()));
  CHECK(ft.trace.iterations.size() == 1);
}

TEST_CASE("forward training freezes earlier steps") {
  const TabularMdp mdp = build_cliffwalk({8, 1.0, true}, 6);
  Hyperparameters hp;
  hp.rollouts_per_iter = 10;
  ExpertOracle expert = optimal_expert(mdp);
  const RunResult run = forward_training(mdp, expert, ErrorInjectedLearner(std::make_shared<TabularLearner>(), 0.2), hp);
  REQUIRE(run.trace.iterations.size() == 6);
  for (std::size_t i = 1; i < 6; ++i) {
    const Policy& before = run.store.get(run.trace.iterations[i - 1].policy_id);
    const Policy& after = run.store.get(run.trace.iterations[i].policy_id);
    for (int t = 0; t < static_cast<int>(i); ++t) CHECK(before.step_policy(t) == after.step_policy(t));
  }
}

TEST_CASE("smile weights follow the closed form") {
  const double alpha = 0.07;
  for (int n : {1, 5, 50, 200}) {
    const auto w = smile_weights(alpha, n);
    REQUIRE(w.size() == static_cast<std::size_t>(n) + 1);
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(std::abs(w[0] - std::pow(1 - alpha, n)) <= 1e-12);
    const auto un = unmix_weights(w);
    double un_sum = 0.0;
    for (double x : un) un_sum += x;
    CHECK(std::abs(un_sum - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(unmix_weights({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(unmix_weights({1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("smile run keeps its mixture weights on the closed form") {
  const TabularMdp mdp = build_cliffwalk({10, 1.0, true}, 6);
  for (MixingMode mode : {MixingMode::Trajectory, MixingMode::PerStep}) {
    Hyperparameters hp;
    hp.iterations = 25;
    hp.alpha = 0.1;
    hp.mixing = mode;
    ExpertOracle expert = optimal_expert(mdp);
    const RunResult run = smile(mdp, expert, ErrorInjectedLearner(std::make_shared<TabularLearner>(), 0.1), hp);
    const auto closed = unmix_weights(smile_weights(0.1, 25));
    REQUIRE(run.trace.mixture_weights.size() == closed.size());
    for (std::size_t k = 0; k < closed.size(); ++k) CHECK(std::abs(run.trace.mixture_weights[k] - closed[k]) <= 1e-12);
    CHECK(std::abs(run.trace.scalars.at("expert_weight_final") - std::pow(0.9, 25)) <= 1e-12);
    CHECK(exact_cost(mdp, run.final_policy()) <= run.trace.scalars.at("J_mixture_final") + 1.0);
  }
}

TEST_CASE("searn interpolates geometrically and validates its knobs") {
  const TabularMdp mdp = build_gridworld({}, 6);
  Hyperparameters hp;
  hp.iterations = 4;
  hp.beta = 0.4;
  ExpertOracle expert = optimal_expert(mdp);
  const RunResult run = searn(mdp, expert, TabularLearner(), hp);
  CHECK(std::abs(run.trace.scalars.at("expert_weight_final") - std::pow(0.6, 4)) <= 1e-12);
  CHECK(run.trace.iterations[0].eps_distribution == "current_mixture");
  CHECK(run.trace.scalars.at("exact_cost_to_go") == 1.0);
  double sum = 0.0;
  for (double w : run.trace.mixture_weights) sum += w;
  CHECK(std::abs(sum - 1.0) <= 1e-12);

  Hyperparameters bad = hp;
  bad.beta = 0.0;
  CHECK_THROWS_AS(searn(mdp, expert, TabularLearner(), bad), std::invalid_argument);
  bad = hp;
  bad.iterations = 0;
  CHECK_THROWS_AS(searn(mdp, expert, TabularLearner(), bad), std::invalid_argument);
  bad = hp;
  bad.rollouts_per_iter = 0;
  CHECK_THROWS_AS(supervised_bc(mdp, expert, TabularLearner(), bad), std::invalid_argument);
}

TEST_CASE("searn falls back to sampled continuations on large problems") {
  const TabularMdp mdp = build_gridworld({}, 6);
  Hyperparameters hp;
  hp.iterations = 2;
  hp.searn_exact_threshold = 10;
  hp.searn_continuations = 3;
  ExpertOracle expert = optimal_expert(mdp);
  const RunResult run = searn(mdp, expert, TabularLearner(), hp);
  CHECK(run.trace.scalars.at("exact_cost_to_go") == 0.0);
  CHECK(exact_cost(mdp, run.final_policy()) >= exact_cost(mdp, expert.policy()) - 1e-12);
}

TEST_CASE("cost-to-go samples equal the expert's Q on deterministic problems") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMdp mdp = oracle::random_deterministic_mdp(gen, 5, 3, 7);
    ExpertOracle expert = optimal_expert(mdp);
    const QTable q = q_values(mdp, expert.policy());
    CounterRng rng(trial);
    for (int t = 0; t < 7; ++t) {
      for (int s = 0; s < 5; ++s) {
        for (int a = 0; a < 3; ++a) CHECK(sample_cost_to_go(mdp, expert, t, s, a, rng) == q(t, s, a));
      }
    }
    CHECK_THROWS_AS(sample_cost_to_go(mdp, expert, 7, 0, 0, rng), std::out_of_range);
  }
}

TEST_CASE("aggrevate records one explored action per sample") {
  const TabularMdp mdp = build_gridworld({}, 6);
  Hyperparameters hp;
  hp.iterations = 3;
  hp.samples_per_iter = 50;
  hp.beta_schedule = "geometric";
  ExpertOracle expert = optimal_expert(mdp);
  const RunResult run = aggrevate(mdp, expert, TabularLearner(), hp);
  REQUIRE(run.dataset.has_value());
  CHECK(run.dataset->size() == 150);
  for (const auto& r : run.dataset->records()) {
    int observed = 0;
    for (double c : r.costs) observed += !std::isnan(c);
    CHECK(observed == 1);
    CHECK(!std::isnan(r.costs[r.action]));
  }
  CHECK(run.trace.iterations[0].extra.at("beta") == 1.0);
  CHECK(run.trace.iterations[2].extra.at("beta") == 0.25);
  CHECK(run.trace.iterations[0].executed_policy_id == 0);
  hp.beta_schedule = "sometimes";
  CHECK_THROWS_AS(aggrevate(mdp, expert, TabularLearner(), hp), std::invalid_argument);
}

TEST_CASE("rail labels the previous policy's distribution") {
  const TabularMdp mdp = build_cliffwalk({6, 1.0, true}, 5);
  Hyperparameters hp;
  hp.samples_per_iter = 40;
  ExpertOracle expert = optimal_expert(mdp);
  const RunResult run = rail(mdp, expert, TabularLearner(), hp);
  CHECK(run.trace.iterations.size() == 5);
  CHECK(expert.query_count() == 200);
  CHECK(run.trace.iterations[2].extra.at("delta_t") == doctest::Approx(0.1 / 3));
  CHECK(run.trace.iterations[0].eps_distribution == "previous_policy");
  hp.rail_init = "expert";
  ExpertOracle e2 = optimal_expert(mdp);
  CHECK(rail(mdp, e2, TabularLearner(), hp).trace.iterations[0].executed_policy_id == 0);
}

TEST_CASE("runs are reproducible from the seed") {
  const TabularMdp mdp = build_gridworld({}, 8);
  const ErrorInjectedLearner learner(std::make_shared<TabularLearner>(), 0.1, true);
  for (Algorithm algo : kAll) {
    CAPTURE(to_string(algo));
    Hyperparameters hp = small_hp(algo, 8);
    hp.rollouts_per_iter = 4;
    hp.samples_per_iter = 40;
    if (algo == Algorithm::Smile) hp.iterations = 8;
    ExpertOracle e1 = optimal_expert(mdp);
    ExpertOracle e2 = optimal_expert(mdp);
    const RunResult a = run_algorithm(algo, mdp, e1, learner, hp);
    const RunResult b = run_algorithm(algo, mdp, e2, learner, hp);
    CHECK(a.final_policy() == b.final_policy());
    REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
    for (std::size_t i = 0; i < a.trace.iterations.size(); ++i) {
      CHECK(a.trace.iterations[i].J_exact == b.trace.iterations[i].J_exact);
      CHECK(a.trace.iterations[i].expert_queries == b.trace.iterations[i].expert_queries);
    }
    CHECK(a.trace.hyperparameters == hp.echo());
  }
}
