#include "imlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "imlab/dynamics.hpp"
#include "imlab/expert.hpp"

namespace imlab {

namespace {

std::string where(const YAML::Node& node, const std::string& path) {
  const YAML::Mark m = node.Mark();
  if (m.is_null() || m.line < 0) return "override '" + path + "'";
  return "line " + std::to_string(m.line + 1) + " ('" + path + "')";
}

template <class T>
T read(const YAML::Node& node, const std::string& path, const char* type) {
  if (!node.IsScalar()) throw ConfigError(where(node, path) + ": expected " + type);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(node, path) + ": expected " + type + ", got '" + node.Scalar() + "'");
  }
}

/// Rejects keys outside `allowed` and calls `handle` for each entry.
void each_key(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed,
              const std::function<void(const std::string&, const YAML::Node&)>& handle) {
  if (!map || map.IsNull()) return;
  if (!map.IsMap()) throw ConfigError(where(map, section) + ": expected a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    const std::string path = section.empty() ? key : section + "." + key;
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(where(kv.first, path) + ": unknown key (expected one of: " + list + ")");
    }
    handle(key, kv.second);
  }
}

std::vector<YAML::Node> as_list(const YAML::Node& node) {
  std::vector<YAML::Node> out;
  if (node.IsSequence()) {
    for (const auto& n : node) out.push_back(n);
  } else {
    out.push_back(node);
  }
  return out;
}

void apply_override(YAML::Node& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + item + "': expected key=value");
  }
  std::string key = item.substr(0, eq);
  const std::string value = item.substr(eq + 1);
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t dot = key.find('.'); ; dot = key.find('.', start)) {
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  YAML::Node cur;
  cur.reset(root);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError("override '" + item + "': empty key segment");
    if (cur[parts[i]] && !cur[parts[i]].IsMap() && !cur[parts[i]].IsNull()) {
      throw ConfigError("override '" + item + "': '" + parts[i] + "' is not a section");
    }
    if (!cur[parts[i]] || cur[parts[i]].IsNull()) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
    YAML::Node next = cur[parts[i]];
    cur.reset(next);
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + item + "': " + e.msg);
  }
  if (!parsed || parsed.IsNull()) parsed = YAML::Node(value);
  cur[parts.back()] = parsed;
}

void parse_env(const YAML::Node& n, ExperimentConfig& cfg) {
  std::optional<std::string> family_path;
  each_key(n, "env", {"family", "horizon", "seed", "gridworld", "cliffwalk", "random"},
           [&](const std::string& key, const YAML::Node& v) {
             const std::string path = "env." + key;
             if (key == "family") {
               try {
                 cfg.env.family = env_family_from_string(read<std::string>(v, path, "a string"));
               } catch (const std::invalid_argument& e) {
                 throw ConfigError(where(v, path) + ": " + e.what());
               }
             } else if (key == "horizon") {
               cfg.env.horizon = read<int>(v, path, "an integer");
               if (cfg.env.horizon < 1) throw ConfigError(where(v, path) + ": horizon must be at least 1");
             } else if (key == "seed") {
               cfg.env.seed = read<std::uint64_t>(v, path, "a non-negative integer");
               cfg.env_seed_fixed = true;
             } else if (key == "gridworld") {
               auto& g = cfg.env.gridworld;
               each_key(v, path, {"width", "height", "goal_x", "goal_y", "start_x", "start_y", "slip", "step_cost"},
                        [&](const std::string& k, const YAML::Node& x) {
                          const std::string p = path + "." + k;
                          if (k == "width") g.width = read<int>(x, p, "an integer");
                          if (k == "height") g.height = read<int>(x, p, "an integer");
                          if (k == "goal_x") g.goal_x = read<int>(x, p, "an integer");
                          if (k == "goal_y") g.goal_y = read<int>(x, p, "an integer");
                          if (k == "start_x") g.start_x = read<int>(x, p, "an integer");
                          if (k == "start_y") g.start_y = read<int>(x, p, "an integer");
                          if (k == "slip") g.slip = read<double>(x, p, "a number");
                          if (k == "step_cost") g.step_cost = read<double>(x, p, "a number");
                        });
             } else if (key == "cliffwalk") {
               auto& c = cfg.env.cliffwalk;
               each_key(v, path, {"length", "fall_cost", "recoverable"}, [&](const std::string& k, const YAML::Node& x) {
                 const std::string p = path + "." + k;
                 if (k == "length") c.length = read<int>(x, p, "an integer");
                 if (k == "fall_cost") c.fall_cost = read<double>(x, p, "a number");
                 if (k == "recoverable") c.recoverable = read<bool>(x, p, "true or false");
               });
             } else if (key == "random") {
               auto& r = cfg.env.random;
               each_key(v, path, {"num_states", "num_actions", "density", "cost_density"},
                        [&](const std::string& k, const YAML::Node& x) {
                          const std::string p = path + "." + k;
                          if (k == "num_states") r.num_states = read<int>(x, p, "an integer");
                          if (k == "num_actions") r.num_actions = read<int>(x, p, "an integer");
                          if (k == "density") r.density = read<double>(x, p, "a number");
                          if (k == "cost_density") r.cost_density = read<double>(x, p, "a number");
                        });
             }
           });
  try {
    (void)build_env(cfg.env);
  } catch (const std::invalid_argument& e) {
    throw ConfigError((n ? where(n, "env") : std::string("env")) + ": " + e.what());
  }
}

void parse_algo(const YAML::Node& n, ExperimentConfig& cfg) {
  Hyperparameters& hp = cfg.hp;
  each_key(n, "algo",
           {"name", "iterations", "alpha", "beta", "beta_schedule", "beta_decay", "rollouts_per_iter", "coaching",
            "lambda0", "lambda_decay", "samples_per_iter", "searn_continuations", "searn_exact_threshold", "rail_eps",
            "rail_delta", "rail_init", "rollout_validation", "validation_rollouts", "mixing"},
           [&](const std::string& key, const YAML::Node& v) {
             const std::string p = "algo." + key;
             if (key == "name") {
               cfg.algorithms.clear();
               for (const auto& item : as_list(v)) {
                 try {
                   cfg.algorithms.push_back(algorithm_from_string(read<std::string>(item, p, "an algorithm name")));
                 } catch (const std::invalid_argument& e) {
                   throw ConfigError(where(item, p) + ": " + e.what());
                 }
               }
             } else if (key == "iterations") {
               hp.iterations = read<int>(v, p, "an integer");
             } else if (key == "alpha") {
               hp.alpha = read<double>(v, p, "a number");
             } else if (key == "beta") {
               hp.beta = read<double>(v, p, "a number");
             } else if (key == "beta_schedule") {
               hp.beta_schedule = read<std::string>(v, p, "first or geometric");
               if (hp.beta_schedule != "first" && hp.beta_schedule != "geometric") {
                 throw ConfigError(where(v, p) + ": expected first or geometric");
               }
             } else if (key == "beta_decay") {
               hp.beta_decay = read<double>(v, p, "a number");
             } else if (key == "rollouts_per_iter") {
               hp.rollouts_per_iter = read<int>(v, p, "an integer");
             } else if (key == "coaching") {
               hp.coaching = read<bool>(v, p, "true or false");
             } else if (key == "lambda0") {
               hp.lambda0 = read<double>(v, p, "a number");
             } else if (key == "lambda_decay") {
               hp.lambda_decay = read<double>(v, p, "a number");
             } else if (key == "samples_per_iter") {
               hp.samples_per_iter = read<int>(v, p, "an integer");
             } else if (key == "searn_continuations") {
               hp.searn_continuations = read<int>(v, p, "an integer");
             } else if (key == "searn_exact_threshold") {
               hp.searn_exact_threshold = read<int>(v, p, "an integer");
             } else if (key == "rail_eps") {
               hp.rail_eps = read<double>(v, p, "a number");
             } else if (key == "rail_delta") {
               hp.rail_delta = read<double>(v, p, "a number");
             } else if (key == "rail_init") {
               hp.rail_init = read<std::string>(v, p, "default or expert");
               if (hp.rail_init != "default" && hp.rail_init != "expert") {
                 throw ConfigError(where(v, p) + ": expected default or expert");
               }
             } else if (key == "rollout_validation") {
               hp.rollout_validation = read<bool>(v, p, "true or false");
             } else if (key == "validation_rollouts") {
               hp.validation_rollouts = read<int>(v, p, "an integer");
             } else if (key == "mixing") {
               try {
                 hp.mixing = mixing_mode_from_string(read<std::string>(v, p, "trajectory or per_step"));
               } catch (const std::invalid_argument& e) {
                 throw ConfigError(where(v, p) + ": " + e.what());
               }
             }
           });
}

void parse_learner(const YAML::Node& n, ExperimentConfig& cfg) {
  each_key(n, "learner", {"kind", "flip_rate", "sampled_flips", "smoothing", "default_action", "uniform_fallback"},
           [&](const std::string& key, const YAML::Node& v) {
             const std::string p = "learner." + key;
             if (key == "kind") {
               if (read<std::string>(v, p, "a string") != "tabular") {
                 throw ConfigError(where(v, p) + ": only the tabular learner is available");
               }
             } else if (key == "flip_rate") {
               cfg.learner.flip_rate = read<double>(v, p, "a number");
               if (!(cfg.learner.flip_rate >= 0.0 && cfg.learner.flip_rate <= 1.0)) {
                 throw ConfigError(where(v, p) + ": flip_rate must lie in [0,1]");
               }
             } else if (key == "sampled_flips") {
               cfg.learner.sampled_flips = read<bool>(v, p, "true or false");
             } else if (key == "smoothing") {
               cfg.learner.tabular.smoothing = read<double>(v, p, "a number");
             } else if (key == "default_action") {
               cfg.learner.tabular.default_action = read<int>(v, p, "an integer");
             } else if (key == "uniform_fallback") {
               cfg.learner.tabular.uniform_fallback = read<bool>(v, p, "true or false");
             }
           });
}

void parse_expert(const YAML::Node& n, ExperimentConfig& cfg) {
  each_key(n, "expert", {"kind", "corruption"}, [&](const std::string& key, const YAML::Node& v) {
    const std::string p = "expert." + key;
    if (key == "kind") {
      if (read<std::string>(v, p, "a string") != "optimal") {
        throw ConfigError(where(v, p) + ": the expert is computed by backward induction; kind must be optimal");
      }
    } else if (key == "corruption") {
      cfg.expert.corruption = read<double>(v, p, "a number");
      if (!(cfg.expert.corruption >= 0.0 && cfg.expert.corruption <= 1.0)) {
        throw ConfigError(where(v, p) + ": corruption must lie in [0,1]");
      }
    }
  });
}

void parse_seeds(const YAML::Node& n, ExperimentConfig& cfg) {
  cfg.seeds.clear();
  if (n.IsMap()) {
    std::uint64_t first = 0;
    std::uint64_t count = 0;
    bool has_count = false;
    each_key(n, "seeds", {"start", "count"}, [&](const std::string& key, const YAML::Node& v) {
      if (key == "start") first = read<std::uint64_t>(v, "seeds.start", "a non-negative integer");
      if (key == "count") {
        count = read<std::uint64_t>(v, "seeds.count", "a non-negative integer");
        has_count = true;
      }
    });
    if (!has_count) throw ConfigError(where(n, "seeds") + ": a seed range needs 'count'");
    for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(first + i);
    return;
  }
  for (const auto& item : as_list(n)) cfg.seeds.push_back(read<std::uint64_t>(item, "seeds", "a non-negative integer"));
}

void parse_outputs(const YAML::Node& n, ExperimentConfig& cfg) {
  each_key(n, "outputs", {"dir", "csv", "traces", "record_timing"}, [&](const std::string& key, const YAML::Node& v) {
    const std::string p = "outputs." + key;
    if (key == "dir") cfg.out_dir = read<std::string>(v, p, "a path");
    if (key == "csv") cfg.csv_name = read<std::string>(v, p, "a file name");
    if (key == "traces") cfg.write_traces = read<bool>(v, p, "true or false");
    if (key == "record_timing") cfg.record_timing = read<bool>(v, p, "true or false");
  });
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::string cell_stem(Algorithm algo, std::uint64_t seed) { return to_string(algo) + "_seed" + std::to_string(seed); }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::optional<std::uint64_t> env_default_seed() {
  const char* raw = std::getenv("IMLAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') return std::nullopt;
  return static_cast<std::uint64_t>(v);
}

ExperimentConfig parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides,
                              std::optional<std::uint64_t> default_seed) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError(where(root, "") + ": the config must be a mapping of sections");
  for (const auto& item : overrides) apply_override(root, item);

  ExperimentConfig cfg;
  YAML::Node bound_node;
  each_key(root, "", {"env", "algo", "learner", "expert", "seeds", "bound_checks", "outputs", "run"},
           [&](const std::string& key, const YAML::Node& v) {
             if (key == "env") parse_env(v, cfg);
             if (key == "algo") parse_algo(v, cfg);
             if (key == "learner") parse_learner(v, cfg);
             if (key == "expert") parse_expert(v, cfg);
             if (key == "seeds") parse_seeds(v, cfg);
             if (key == "outputs") parse_outputs(v, cfg);
             if (key == "run") {
               each_key(v, "run", {"jobs"}, [&](const std::string&, const YAML::Node& j) {
                 cfg.jobs = read<int>(j, "run.jobs", "an integer");
                 if (cfg.jobs < 1) throw ConfigError(where(j, "run.jobs") + ": jobs must be at least 1");
               });
             }
             if (key == "bound_checks") {
               bound_node.reset(v);
               cfg.bound_checks.clear();
               if (v.IsNull()) return;
               for (const auto& item : as_list(v)) {
                 const int id = read<int>(item, "bound_checks", "a theorem id");
                 if (id < 1 || id > 7) throw ConfigError(where(item, "bound_checks") + ": theorem ids run from 1 to 7");
                 cfg.bound_checks.push_back(id);
               }
             }
           });
  if (!root["env"]) parse_env(YAML::Node(), cfg);

  if (cfg.algorithms.empty()) throw ConfigError("algo.name: at least one algorithm is required");
  if (cfg.seeds.empty()) {
    if (root["seeds"]) throw ConfigError(where(root["seeds"], "seeds") + ": seed list is empty");
    cfg.seeds.push_back(default_seed.value_or(0));
  }
  for (int id : cfg.bound_checks) {
    const bool used = std::any_of(cfg.algorithms.begin(), cfg.algorithms.end(),
                                  [&](Algorithm a) { return theorem_applies(id, a); });
    if (!used) {
      throw ConfigError(where(bound_node, "bound_checks") + ": theorem " + std::to_string(id) + " belongs to " +
                        to_string(theorem_algorithm(id)) + ", which is not among the configured algorithms");
    }
  }
  for (Algorithm a : cfg.algorithms) {
    if ((a == Algorithm::ForwardTraining || a == Algorithm::Rail) && cfg.hp.iterations &&
        *cfg.hp.iterations != cfg.env.horizon) {
      throw ConfigError("algo.iterations: " + to_string(a) + " runs exactly one iteration per step (horizon " +
                        std::to_string(cfg.env.horizon) + ")");
    }
  }
  if (cfg.hp.rollouts_per_iter < 1) throw ConfigError("algo.rollouts_per_iter: must be at least 1");
  if (cfg.hp.iterations && *cfg.hp.iterations < 1) throw ConfigError("algo.iterations: must be at least 1");
  if (cfg.learner.tabular.default_action < 0 ||
      cfg.learner.tabular.default_action >= build_env(cfg.env).num_actions()) {
    throw ConfigError("learner.default_action: not an action of the environment");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                             std::optional<std::uint64_t> default_seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), overrides, default_seed);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

CellOutcome run_cell(const ExperimentConfig& cfg, Algorithm algo, std::uint64_t seed) {
  EnvSpec env = cfg.env;
  if (!cfg.env_seed_fixed) env.seed = seed;
  TabularMdp mdp = build_env(env);
  const Policy optimal = optimal_policy(mdp);
  ExpertOracle expert = cfg.expert.corruption > 0.0
                            ? corrupt_expert(optimal, cfg.expert.corruption, derive_seed(seed, {0xE0}))
                            : ExpertOracle(optimal, "optimal");
  const auto tabular = std::make_shared<TabularLearner>(cfg.learner.tabular);
  std::shared_ptr<const Learner> learner = tabular;
  if (cfg.learner.flip_rate > 0.0) {
    learner = std::make_shared<ErrorInjectedLearner>(tabular, cfg.learner.flip_rate, cfg.learner.sampled_flips);
  }
  Hyperparameters hp = cfg.hp;
  hp.seed = seed;

  const auto started = std::chrono::steady_clock::now();
  RunResult run = run_algorithm(algo, mdp, expert, *learner, hp);
  const double wall_ms =
      cfg.record_timing
          ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count()
          : 0.0;

  const Policy& expert_policy = expert.policy();
  const double J_expert = exact_cost(mdp, expert_policy);
  const std::string name = to_string(algo);
  const std::string env_tag = env_name(env);
  const std::string T = std::to_string(mdp.horizon());
  const std::string seed_s = std::to_string(seed);
  const std::string wall = format_number(wall_ms);

  CellOutcome out;
  out.algorithm = algo;
  out.seed = seed;
  for (const auto& r : run.trace.iterations) {
    out.rows.push_back(csv_line({name, env_tag, T, seed_s, std::to_string(r.iteration), format_number(r.J_exact),
                                 format_number(J_expert), format_number(r.eps), "", "", "",
                                 std::to_string(r.expert_queries), std::to_string(r.dataset_size), wall}));
  }
  const Policy& final_policy = run.final_policy();
  const double J_final = exact_cost(mdp, final_policy);
  const std::uint64_t queries = expert.query_count();
  const std::size_t dataset = run.trace.iterations.empty() ? 0 : run.trace.iterations.back().dataset_size;
  const double eps_own = measured_eps(mdp, final_policy, expert_policy, exact_state_distributions(mdp, final_policy));
  bool any_bound = false;
  for (int id : cfg.bound_checks) {
    if (!theorem_applies(id, algo)) continue;
    any_bound = true;
    BoundReport report = bound_theorem(id, mdp, expert_policy, run.trace, run.store);
    const auto eps_it = report.constituents.find("eps");
    out.rows.push_back(csv_line({name, env_tag, T, seed_s, "final", format_number(J_final), format_number(J_expert),
                                 format_number(eps_it == report.constituents.end() ? eps_own : eps_it->second),
                                 std::to_string(id), format_number(report.rhs), format_number(report.slack),
                                 std::to_string(queries), std::to_string(dataset), wall}));
    out.bounds.push_back(std::move(report));
  }
  if (!any_bound) {
    out.rows.push_back(csv_line({name, env_tag, T, seed_s, "final", format_number(J_final), format_number(J_expert),
                                 format_number(eps_own), "", "", "", std::to_string(queries), std::to_string(dataset),
                                 wall}));
  }
  out.artifact.emplace(RunArtifact{env_tag, std::move(mdp), std::move(run.trace), std::move(run.store)});
  return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  std::vector<std::pair<Algorithm, std::uint64_t>> grid;
  for (Algorithm a : cfg.algorithms) {
    for (std::uint64_t s : cfg.seeds) grid.emplace_back(a, s);
  }
  ExperimentOutcome out;
  out.cells.resize(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        out.cells[i] = run_cell(cfg, grid[i].first, grid[i].second);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::filesystem::create_directories(cfg.out_dir);
  for (auto& cell : out.cells) {
    const std::string stem = cell_stem(cell.algorithm, cell.seed);
    if (cfg.write_traces) {
      const auto path = cfg.out_dir / "traces" / (stem + ".json");
      write_json_file(path, to_json(*cell.artifact));
      out.trace_paths.push_back(path);
    }
    for (const auto& report : cell.bounds) {
      const auto path = cfg.out_dir / "bounds" / (stem + "_thm" + std::to_string(report.theorem) + ".json");
      write_json_file(path, to_json(report));
      out.bound_paths.push_back(path);
      if (report.asserted && !report.holds) out.violations.push_back(path);
    }
  }
  out.csv_path = cfg.out_dir / cfg.csv_name;
  std::ofstream csv(out.csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + out.csv_path.string());
  csv << kCsvHeader << '\n';
  for (const auto& cell : out.cells) {
    for (const auto& row : cell.rows) csv << row << '\n';
  }
  return out;
}

std::vector<CsvRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError(path.string() + ": header does not match the results schema");
  }
  std::vector<CsvRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t comma = line.find(','); ; comma = line.find(',', start)) {
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 14) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                        " fields, expected 14");
    }
    try {
      CsvRow r;
      r.algo = f[0];
      r.env = f[1];
      r.T = std::stoi(f[2]);
      r.seed = std::stoull(f[3]);
      r.iter = f[4];
      r.J_exact = std::stod(f[5]);
      r.J_expert = std::stod(f[6]);
      r.eps = f[7].empty() ? std::nan("") : std::stod(f[7]);
      r.bound_id = f[8];
      r.bound_rhs = f[9];
      r.slack = f[10];
      r.expert_queries = std::stoull(f[11]);
      r.dataset_size = std::stoull(f[12]);
      r.wall_ms = std::stod(f[13]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) + " is malformed");
    }
  }
  return rows;
}

CompareReport compare_results(const std::vector<CsvRow>& rows) {
  struct Group {
    AlgorithmSummary s;
    std::vector<double> J;
    std::vector<double> regret;
    std::vector<double> queries;
  };
  std::vector<Group> groups;
  std::set<std::tuple<std::string, std::string, int, std::uint64_t>> seen_runs;
  // algo -> (env, T, iteration) -> regrets; insertion order kept by vectors.
  std::vector<std::string> algo_order;
  std::map<std::string, std::map<std::tuple<std::string, int, int>, std::vector<double>>> per_iter;
  std::map<std::string, std::map<int, std::vector<double>>> per_T;
  for (const auto& r : rows) {
    if (std::find(algo_order.begin(), algo_order.end(), r.algo) == algo_order.end()) algo_order.push_back(r.algo);
    const double regret = r.J_exact - r.J_expert;
    if (r.iter != "final") {
      per_iter[r.algo][{r.env, r.T, std::stoi(r.iter)}].push_back(regret);
      continue;
    }
    if (!seen_runs.insert({r.algo, r.env, r.T, r.seed}).second) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.s.algo == r.algo && g.s.env == r.env && g.s.T == r.T;
    });
    if (it == groups.end()) {
      groups.push_back(Group{});
      it = groups.end() - 1;
      it->s.algo = r.algo;
      it->s.env = r.env;
      it->s.T = r.T;
    }
    it->J.push_back(r.J_exact);
    it->regret.push_back(regret);
    it->queries.push_back(static_cast<double>(r.expert_queries));
    per_T[r.algo][r.T].push_back(regret);
  }
  const auto mean = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return v.empty() ? 0.0 : m / static_cast<double>(v.size());
  };
  CompareReport report;
  for (auto& g : groups) {
    g.s.runs = g.J.size();
    g.s.mean_J = mean(g.J);
    g.s.mean_regret = mean(g.regret);
    g.s.mean_queries = mean(g.queries);
    if (g.J.size() > 1) {
      double ss = 0.0;
      for (double x : g.J) ss += (x - g.s.mean_J) * (x - g.s.mean_J);
      g.s.std_J = std::sqrt(ss / static_cast<double>(g.J.size() - 1));
    }
    report.summaries.push_back(g.s);
  }
  std::ostringstream iter_out;
  std::ostringstream t_out;
  for (const auto& algo : algo_order) {
    if (per_iter.count(algo)) {
      std::string block;
      for (const auto& [key, v] : per_iter[algo]) {
        const std::string header = "# " + algo + " " + std::get<0>(key) + " T=" + std::to_string(std::get<1>(key));
        if (header != block) {
          if (!block.empty()) iter_out << "\n\n";
          iter_out << header << '\n';
          block = header;
        }
        iter_out << std::get<2>(key) << ' ' << format_number(mean(v)) << '\n';
      }
      iter_out << "\n\n";
    }
    if (per_T.count(algo)) {
      t_out << "# " << algo << '\n';
      for (const auto& [T, v] : per_T[algo]) t_out << T << ' ' << format_number(mean(v)) << '\n';
      t_out << "\n\n";
    }
  }
  report.regret_vs_iteration = iter_out.str();
  report.regret_vs_T = t_out.str();
  return report;
}

std::string format_summary(const CompareReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-16s %5s %6s %14s %14s %14s %14s\n", "algo", "env", "T", "runs", "mean_J",
                "std_J", "mean_regret", "mean_queries");
  out << line;
  for (const auto& s : report.summaries) {
    std::snprintf(line, sizeof line, "%-18s %-16s %5d %6zu %14s %14s %14s %14s\n", s.algo.c_str(), s.env.c_str(), s.T,
                  s.runs, format_number(s.mean_J).c_str(), format_number(s.std_J).c_str(),
                  format_number(s.mean_regret).c_str(), format_number(s.mean_queries).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace imlab
