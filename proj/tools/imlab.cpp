#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imlab/analysis.hpp"
#include "imlab/dynamics.hpp"
#include "imlab/experiment.hpp"
#include "imlab/json_io.hpp"
#include "imlab/rollout.hpp"

using namespace imlab;

namespace {

constexpr int kOk = 0;
constexpr int kBoundViolation = 1;
constexpr int kConfigError = 2;

/// Turns leftover "--section.key=value" / "--section.key value" arguments
/// into override strings.
std::vector<std::string> collect_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() <= 2) {
      throw ConfigError("unexpected argument '" + arg + "' (overrides look like --section.key=value)");
    }
    std::string item = arg.substr(2);
    if (item.find('=') == std::string::npos) {
      if (i + 1 >= extras.size()) throw ConfigError("override '" + arg + "' has no value");
      item += "=" + extras[++i];
    }
    out.push_back(std::move(item));
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int jobs,
            const std::vector<std::string>& extras) {
  std::vector<std::string> overrides = collect_overrides(extras);
  if (!out_dir.empty()) overrides.push_back("outputs.dir=" + out_dir);
  if (jobs > 0) overrides.push_back("run.jobs=" + std::to_string(jobs));
  const ExperimentConfig cfg = load_config(config_path, overrides, env_default_seed());
  const ExperimentOutcome outcome = run_experiment(cfg);
  std::cout << "wrote " << outcome.csv_path.string() << " (" << outcome.cells.size() << " runs, "
            << outcome.bound_paths.size() << " bound reports)\n";
  if (!outcome.violations.empty()) {
    for (const auto& p : outcome.violations) std::cerr << "bound violated: " << p.string() << '\n';
    return kBoundViolation;
  }
  return kOk;
}

int cmd_bounds(const std::vector<std::string>& traces, std::vector<int> theorems, const std::string& out_dir) {
  int status = kOk;
  for (const auto& path : traces) {
    const RunArtifact run = run_from_json(read_json_file(path));
    std::vector<int> ids = theorems;
    if (ids.empty()) {
      for (int t = 1; t <= 7; ++t) {
        if (theorem_applies(t, run.trace.algorithm)) ids.push_back(t);
      }
    }
    for (int id : ids) {
      if (id < 1 || id > 7 || !theorem_applies(id, run.trace.algorithm)) {
        throw ConfigError("theorem " + std::to_string(id) + " does not apply to " + to_string(run.trace.algorithm) +
                          " (" + path + ")");
      }
      const BoundReport report = bound_theorem(id, run.mdp, run.store.get(0), run.trace, run.store);
      const Json j = to_json(report);
      std::string where = path;
      if (!out_dir.empty()) {
        const auto stem = std::filesystem::path(path).stem().string();
        const auto target = std::filesystem::path(out_dir) / (stem + "_thm" + std::to_string(id) + ".json");
        write_json_file(target, j);
        where = target.string();
      }
      std::printf("%s theorem %d: lhs=%s rhs=%s slack=%s %s%s\n", path.c_str(), id, format_number(report.lhs).c_str(),
                  format_number(report.rhs).c_str(), format_number(report.slack).c_str(),
                  report.holds ? "holds" : "VIOLATED", report.asserted ? "" : " (reported only)");
      if (report.asserted && !report.holds) {
        std::cerr << "bound violated: " << where << '\n';
        status = kBoundViolation;
      }
    }
  }
  return status;
}

int cmd_compare(const std::vector<std::string>& csvs, const std::string& out_dir) {
  std::vector<CsvRow> rows;
  for (const auto& path : csvs) {
    auto part = read_results_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const CompareReport report = compare_results(rows);
  std::cout << format_summary(report);
  const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "regret_vs_iteration.dat") << report.regret_vs_iteration;
  std::ofstream(dir / "regret_vs_T.dat") << report.regret_vs_T;
  return kOk;
}

int cmd_gen_env(const std::string& config_path, const std::string& family, int horizon, long long seed,
                const std::string& out, const std::vector<std::string>& extras) {
  std::vector<std::string> overrides = collect_overrides(extras);
  if (!family.empty()) overrides.push_back("env.family=" + family);
  if (horizon > 0) overrides.push_back("env.horizon=" + std::to_string(horizon));
  const auto default_seed = env_default_seed();
  if (seed >= 0) {
    overrides.push_back("env.seed=" + std::to_string(seed));
  } else if (default_seed) {
    overrides.push_back("env.seed=" + std::to_string(*default_seed));
  }
  // gen-env needs no algorithm; supply one so the shared parser accepts the file.
  overrides.push_back("algo.name=supervised_bc");
  overrides.push_back("bound_checks=[]");
  const ExperimentConfig cfg =
      config_path.empty() ? parse_config("", overrides, default_seed) : load_config(config_path, overrides, default_seed);
  const Json j = to_json(build_env(cfg.env));
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out, j);
  }
  return kOk;
}

int cmd_eval(const std::string& mdp_path, const std::string& policy_path, int rollouts, std::uint64_t seed) {
  const TabularMdp mdp = mdp_from_json(read_json_file(mdp_path));
  const Policy policy = policy_from_json(read_json_file(policy_path));
  check_compatible(mdp, policy);
  std::printf("J_exact %s\n", format_number(exact_cost(mdp, policy)).c_str());
  if (rollouts > 0) {
    const MonteCarloEstimate mc = monte_carlo_cost(mdp, policy, rollouts, seed);
    std::printf("J_mc %s std_error %s\n", format_number(mc.mean).c_str(), format_number(mc.std_error).c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imlab: tabular imitation-learning experiments with exact evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "Run every (algorithm, seed) cell of a config");
  run->add_option("-c,--config", config_path, "YAML config file")->required();
  run->add_option("--out-dir", out_dir, "Artifact root (overrides outputs.dir)");
  run->add_option("-j,--jobs", jobs, "Parallel cells (overrides run.jobs)");
  run->allow_extras();

  std::vector<std::string> traces;
  std::vector<int> theorems;
  std::string bounds_out;
  auto* bounds = app.add_subcommand("bounds", "Recheck regret bounds on stored run traces");
  bounds->add_option("trace,--trace", traces, "Trace JSON files")->required();
  bounds->add_option("-t,--theorem", theorems, "Theorem ids (default: all that apply)");
  bounds->add_option("--out-dir", bounds_out, "Write BoundReport JSON files here");

  std::vector<std::string> csvs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Aggregate results CSVs and write plot data");
  compare->add_option("csv,--csv", csvs, "Results CSV files")->required();
  compare->add_option("--out-dir", compare_out, "Directory for the .dat files (default: .)");

  std::string gen_config;
  std::string family;
  int horizon = 0;
  long long env_seed = -1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-env", "Write an environment as MDP JSON");
  gen->add_option("-c,--config", gen_config, "YAML config whose env section is used");
  gen->add_option("--family", family, "gridworld, cliffwalk or random");
  gen->add_option("--horizon", horizon, "Horizon T");
  gen->add_option("--seed", env_seed, "Environment seed (default: IMLAB_SEED, then 0)");
  gen->add_option("-o,--out", gen_out, "Output path (default: stdout)");
  gen->allow_extras();

  std::string mdp_path;
  std::string policy_path;
  int rollouts = 0;
  std::uint64_t eval_seed = env_default_seed().value_or(0);
  auto* eval = app.add_subcommand("eval", "Exact cost of a stored policy on a stored MDP");
  eval->add_option("--mdp", mdp_path, "MDP JSON")->required();
  eval->add_option("--policy", policy_path, "Policy JSON")->required();
  eval->add_option("--rollouts", rollouts, "Also estimate by this many Monte-Carlo rollouts");
  eval->add_option("--seed", eval_seed, "Rollout seed (default: IMLAB_SEED, then 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, jobs, run->remaining());
    if (*bounds) return cmd_bounds(traces, theorems, bounds_out);
    if (*compare) return cmd_compare(csvs, compare_out);
    if (*gen) return cmd_gen_env(gen_config, family, horizon, env_seed, gen_out, gen->remaining());
    if (*eval) return cmd_eval(mdp_path, policy_path, rollouts, eval_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const JsonFormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
