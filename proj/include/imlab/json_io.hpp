#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "imlab/algorithms.hpp"
#include "imlab/analysis.hpp"
#include "imlab/learners.hpp"
#include "imlab/mdp.hpp"
#include "imlab/policy.hpp"

namespace imlab {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent JSON input.
class JsonFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Doubles are written with 17 significant digits, so reading back is exact.
// NaN is written as null.

/// {"num_states", "num_actions", "horizon", "initial", "cost": [s][a],
///  "transition": [s][a][s']}. Reading validates the MDP.
Json to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const Json& j);

/// Tagged by "kind": deterministic, stochastic, non_stationary, mixture.
Json to_json(const Policy& policy);
Policy policy_from_json(const Json& j);

/// {"provenance", "num_states", "num_actions", "records": [{"s", "t", "a", "q"?}]}.
/// "t" is 1-based in the file and 0-based in memory.
Json to_json(const Dataset& data);
Dataset dataset_from_json(const Json& j);

Json to_json(const BoundReport& report);
BoundReport bound_report_from_json(const Json& j);

/// Everything `bounds` needs to recheck a run: the MDP, every policy the run
/// produced (index 0 is the expert) and the trace itself.
struct RunArtifact {
  std::string env;
  TabularMdp mdp;
  RunTrace trace;
  PolicyStore store;
};

Json to_json(const RunArtifact& run);
RunArtifact run_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace imlab
