#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "imlab/algorithms.hpp"
#include "imlab/analysis.hpp"
#include "imlab/environments.hpp"
#include "imlab/json_io.hpp"
#include "imlab/learners.hpp"

namespace imlab {

/// Invalid configuration. The message already carries the line number (or
/// the offending override) when one is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearnerSpec {
  TabularConfig tabular;
  /// Probability that the trained classifier deviates on a seen state.
  double flip_rate = 0.0;
  /// Draw one flipped deterministic policy instead of the exact stochastic one.
  bool sampled_flips = false;
};

struct ExpertSpec {
  /// Probability that the expert oracle answers with another action.
  double corruption = 0.0;
};

struct ExperimentConfig {
  EnvSpec env;
  /// When false the environment seed follows each run seed.
  bool env_seed_fixed = false;
  std::vector<Algorithm> algorithms;
  Hyperparameters hp;
  LearnerSpec learner;
  ExpertSpec expert;
  std::vector<std::uint64_t> seeds;
  std::vector<int> bound_checks;
  std::filesystem::path out_dir = "imlab_out";
  std::string csv_name = "results.csv";
  bool write_traces = true;
  bool record_timing = false;
  int jobs = 1;
};

/// Parses YAML text. `overrides` are "section.key=value" pairs applied on top
/// of the file; values are read as YAML scalars or flow sequences.
/// `default_seed` is used when the file names no seeds.
ExperimentConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides = {},
                              std::optional<std::uint64_t> default_seed = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {},
                             std::optional<std::uint64_t> default_seed = std::nullopt);

/// Seed from the IMLAB_SEED environment variable, if set and numeric.
std::optional<std::uint64_t> env_default_seed();

/// Bit-exact CSV header of the results table.
inline constexpr const char* kCsvHeader =
    "algo,env,T,seed,iter,J_exact,J_expert,eps,bound_id,bound_rhs,slack,expert_queries,dataset_size,wall_ms";

/// %.12g.
std::string format_number(double v);

struct CellOutcome {
  Algorithm algorithm = Algorithm::SupervisedBC;
  std::uint64_t seed = 0;
  std::vector<std::string> rows;
  std::vector<BoundReport> bounds;
  /// Kept so the caller can write the trace.
  std::optional<RunArtifact> artifact;
};

struct ExperimentOutcome {
  std::vector<CellOutcome> cells;
  std::vector<std::filesystem::path> trace_paths;
  std::vector<std::filesystem::path> bound_paths;
  std::filesystem::path csv_path;
  /// Asserted bound checks that failed, as paths to their reports.
  std::vector<std::filesystem::path> violations;
};

/// Runs every (algorithm, seed) cell, writes traces, bound reports and the
/// CSV under cfg.out_dir. Rows are written in config order whatever the
/// completion order.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// One (algorithm, seed) cell; writes nothing.
CellOutcome run_cell(const ExperimentConfig& cfg, Algorithm algo, std::uint64_t seed);

struct CsvRow {
  std::string algo;
  std::string env;
  int T = 0;
  std::uint64_t seed = 0;
  std::string iter;
  double J_exact = 0.0;
  double J_expert = 0.0;
  double eps = 0.0;
  std::string bound_id;
  std::string bound_rhs;
  std::string slack;
  std::uint64_t expert_queries = 0;
  std::size_t dataset_size = 0;
  double wall_ms = 0.0;
};

/// Reads a results CSV. Throws ConfigError on a header that differs from
/// kCsvHeader or on malformed rows.
std::vector<CsvRow> read_results_csv(const std::filesystem::path& path);

struct AlgorithmSummary {
  std::string algo;
  std::string env;
  int T = 0;
  std::size_t runs = 0;
  double mean_J = 0.0;
  double std_J = 0.0;
  double mean_regret = 0.0;
  double mean_queries = 0.0;
};

struct CompareReport {
  std::vector<AlgorithmSummary> summaries;
  /// Whitespace-separated "iteration mean_regret" blocks, one per algorithm.
  std::string regret_vs_iteration;
  /// "T mean_regret" blocks, one per algorithm.
  std::string regret_vs_T;
};

/// Aggregates the final-policy rows (iter = final) per (algo, env, T).
CompareReport compare_results(const std::vector<CsvRow>& rows);
std::string format_summary(const CompareReport& report);

}  // namespace imlab
