#include "imlab/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace imlab {

namespace {

const Json& field(const Json& j, const char* key, const char* what) {
  if (!j.is_object()) throw JsonFormatError(std::string(what) + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw JsonFormatError(std::string(what) + ": missing key '" + key + "'");
  return *it;
}

Json number(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

double read_number(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw JsonFormatError("expected a number, got " + j.dump());
  return j.get<double>();
}

std::vector<double> read_numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw JsonFormatError(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(read_number(v));
  return out;
}

Json numbers(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const JsonFormatError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw JsonFormatError(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw JsonFormatError(std::string(what) + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw JsonFormatError(std::string(what) + ": " + e.what());
  }
}

Json record_to_json(const IterationRecord& r) {
  Json j;
  j["iteration"] = r.iteration;
  j["policy_id"] = r.policy_id;
  j["executed_policy_id"] = r.executed_policy_id;
  j["J_exact"] = number(r.J_exact);
  j["eps"] = number(r.eps);
  j["eps_distribution"] = r.eps_distribution;
  j["expert_queries"] = r.expert_queries;
  j["dataset_size"] = r.dataset_size;
  Json extra = Json::object();
  for (const auto& [k, v] : r.extra) extra[k] = number(v);
  j["extra"] = std::move(extra);
  if (!r.targets.empty()) j["targets"] = r.targets;
  return j;
}

IterationRecord record_from_json(const Json& j) {
  IterationRecord r;
  r.iteration = field(j, "iteration", "iteration record").get<int>();
  r.policy_id = field(j, "policy_id", "iteration record").get<int>();
  r.executed_policy_id = field(j, "executed_policy_id", "iteration record").get<int>();
  r.J_exact = read_number(field(j, "J_exact", "iteration record"));
  r.eps = read_number(field(j, "eps", "iteration record"));
  r.eps_distribution = field(j, "eps_distribution", "iteration record").get<std::string>();
  r.expert_queries = field(j, "expert_queries", "iteration record").get<std::uint64_t>();
  r.dataset_size = field(j, "dataset_size", "iteration record").get<std::size_t>();
  for (const auto& [k, v] : field(j, "extra", "iteration record").items()) r.extra[k] = read_number(v);
  if (j.contains("targets")) r.targets = j.at("targets").get<std::vector<int>>();
  return r;
}

}  // namespace

Json to_json(const TabularMdp& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  Json j;
  j["num_states"] = S;
  j["num_actions"] = A;
  j["horizon"] = mdp.horizon();
  j["initial"] = numbers(mdp.initial());
  Json cost = Json::array();
  Json transition = Json::array();
  for (StateId s = 0; s < S; ++s) {
    Json crow = Json::array();
    Json trow = Json::array();
    for (ActionId a = 0; a < A; ++a) {
      crow.push_back(number(mdp.cost(s, a)));
      trow.push_back(numbers(mdp.successors(s, a)));
    }
    cost.push_back(std::move(crow));
    transition.push_back(std::move(trow));
  }
  j["cost"] = std::move(cost);
  j["transition"] = std::move(transition);
  return j;
}

TabularMdp mdp_from_json(const Json& j) {
  return guarded("mdp", [&] {
    const int S = field(j, "num_states", "mdp").get<int>();
    const int A = field(j, "num_actions", "mdp").get<int>();
    const int T = field(j, "horizon", "mdp").get<int>();
    if (S < 1 || A < 1 || T < 1) throw JsonFormatError("mdp: sizes must be positive");
    std::vector<double> initial = read_numbers(field(j, "initial", "mdp"), "mdp.initial");
    const Json& cj = field(j, "cost", "mdp");
    const Json& tj = field(j, "transition", "mdp");
    if (!cj.is_array() || cj.size() != static_cast<std::size_t>(S) || !tj.is_array() ||
        tj.size() != static_cast<std::size_t>(S)) {
      throw JsonFormatError("mdp: cost and transition need one row per state");
    }
    std::vector<double> cost;
    std::vector<double> transition;
    for (StateId s = 0; s < S; ++s) {
      const auto crow = read_numbers(cj[s], "mdp.cost");
      if (crow.size() != static_cast<std::size_t>(A) || !tj[s].is_array() ||
          tj[s].size() != static_cast<std::size_t>(A)) {
        throw JsonFormatError("mdp: state " + std::to_string(s) + " needs one entry per action");
      }
      cost.insert(cost.end(), crow.begin(), crow.end());
      for (ActionId a = 0; a < A; ++a) {
        const auto trow = read_numbers(tj[s][a], "mdp.transition");
        if (trow.size() != static_cast<std::size_t>(S)) {
          throw JsonFormatError("mdp: transition row (" + std::to_string(s) + "," + std::to_string(a) +
                                ") needs one entry per state");
        }
        transition.insert(transition.end(), trow.begin(), trow.end());
      }
    }
    TabularMdp mdp(S, A, T, std::move(transition), std::move(cost), std::move(initial));
    const auto violations = validate_mdp(mdp);
    if (!violations.empty()) throw JsonFormatError("mdp: " + violations.front().message());
    return mdp;
  });
}

Json to_json(const Policy& policy) {
  Json j;
  j["kind"] = std::string(to_string(policy.kind()));
  switch (policy.kind()) {
    case PolicyKind::DeterministicStationary:
      j["num_states"] = policy.num_states();
      j["num_actions"] = policy.num_actions();
      j["actions"] = std::vector<int>(policy.actions().begin(), policy.actions().end());
      break;
    case PolicyKind::StochasticStationary: {
      const int S = policy.num_states();
      const int A = policy.num_actions();
      j["num_states"] = S;
      j["num_actions"] = A;
      Json rows = Json::array();
      const auto p = policy.probabilities();
      for (StateId s = 0; s < S; ++s) rows.push_back(numbers(p.subspan(static_cast<std::size_t>(s) * A, A)));
      j["probabilities"] = std::move(rows);
      break;
    }
    case PolicyKind::NonStationary: {
      Json steps = Json::array();
      for (const auto& p : policy.steps()) steps.push_back(to_json(p));
      j["steps"] = std::move(steps);
      break;
    }
    case PolicyKind::Mixture: {
      j["mixing"] = std::string(to_string(policy.mixing()));
      j["weights"] = numbers(policy.weights());
      Json comps = Json::array();
      for (const auto& p : policy.components()) comps.push_back(to_json(p));
      j["components"] = std::move(comps);
      break;
    }
  }
  return j;
}

Policy policy_from_json(const Json& j) {
  return guarded("policy", [&] {
    const std::string kind = field(j, "kind", "policy").get<std::string>();
    if (kind == "deterministic") {
      const int A = field(j, "num_actions", "policy").get<int>();
      auto actions = field(j, "actions", "policy").get<std::vector<int>>();
      if (j.contains("num_states") && j.at("num_states").get<std::size_t>() != actions.size()) {
        throw JsonFormatError("policy: num_states does not match the action list");
      }
      return Policy::deterministic(A, std::move(actions));
    }
    if (kind == "stochastic") {
      const int S = field(j, "num_states", "policy").get<int>();
      const int A = field(j, "num_actions", "policy").get<int>();
      const Json& rows = field(j, "probabilities", "policy");
      if (!rows.is_array() || rows.size() != static_cast<std::size_t>(S)) {
        throw JsonFormatError("policy: probabilities need one row per state");
      }
      std::vector<double> probs;
      for (const auto& row : rows) {
        const auto r = read_numbers(row, "policy.probabilities");
        if (r.size() != static_cast<std::size_t>(A)) throw JsonFormatError("policy: row length differs from num_actions");
        probs.insert(probs.end(), r.begin(), r.end());
      }
      return Policy::stochastic(S, A, std::move(probs));
    }
    if (kind == "non_stationary") {
      std::vector<Policy> steps;
      for (const auto& s : field(j, "steps", "policy")) steps.push_back(policy_from_json(s));
      return Policy::non_stationary(std::move(steps));
    }
    if (kind == "mixture") {
      const MixingMode mode = mixing_mode_from_string(field(j, "mixing", "policy").get<std::string>());
      auto weights = read_numbers(field(j, "weights", "policy"), "policy.weights");
      std::vector<Policy> comps;
      for (const auto& c : field(j, "components", "policy")) comps.push_back(policy_from_json(c));
      return Policy::mixture(std::move(weights), std::move(comps), mode);
    }
    throw JsonFormatError("policy: unknown kind '" + kind + "'");
  });
}

Json to_json(const Dataset& data) {
  Json j;
  j["provenance"] = data.provenance();
  j["num_states"] = data.num_states();
  j["num_actions"] = data.num_actions();
  Json records = Json::array();
  for (const auto& r : data.records()) {
    Json rec;
    rec["s"] = r.state;
    rec["t"] = r.step + 1;
    rec["a"] = r.action;
    if (!r.costs.empty()) rec["q"] = numbers(r.costs);
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  return j;
}

Dataset dataset_from_json(const Json& j) {
  return guarded("dataset", [&] {
    Dataset data(field(j, "num_states", "dataset").get<int>(), field(j, "num_actions", "dataset").get<int>(),
                 j.contains("provenance") ? j.at("provenance").get<std::string>() : std::string());
    for (const auto& rec : field(j, "records", "dataset")) {
      const int s = field(rec, "s", "dataset record").get<int>();
      const int t = field(rec, "t", "dataset record").get<int>();
      const int a = field(rec, "a", "dataset record").get<int>();
      if (t < 1) throw JsonFormatError("dataset: record step 't' is 1-based and must be at least 1");
      if (rec.contains("q")) {
        data.add(s, t - 1, a, read_numbers(rec.at("q"), "dataset.q"));
      } else {
        data.add(s, t - 1, a);
      }
    }
    return data;
  });
}

Json to_json(const BoundReport& r) {
  Json j;
  j["theorem"] = r.theorem;
  j["lhs"] = number(r.lhs);
  j["rhs"] = number(r.rhs);
  j["slack"] = number(r.slack);
  j["holds"] = r.holds;
  j["asserted"] = r.asserted;
  j["eps_distribution"] = r.eps_distribution;
  Json c = Json::object();
  for (const auto& [k, v] : r.constituents) c[k] = number(v);
  j["constituents"] = std::move(c);
  j["note"] = r.note;
  return j;
}

BoundReport bound_report_from_json(const Json& j) {
  return guarded("bound report", [&] {
    BoundReport r;
    r.theorem = field(j, "theorem", "bound report").get<int>();
    r.lhs = read_number(field(j, "lhs", "bound report"));
    r.rhs = read_number(field(j, "rhs", "bound report"));
    r.slack = read_number(field(j, "slack", "bound report"));
    r.holds = field(j, "holds", "bound report").get<bool>();
    r.asserted = field(j, "asserted", "bound report").get<bool>();
    r.eps_distribution = field(j, "eps_distribution", "bound report").get<std::string>();
    for (const auto& [k, v] : field(j, "constituents", "bound report").items()) r.constituents[k] = read_number(v);
    if (j.contains("note")) r.note = j.at("note").get<std::string>();
    return r;
  });
}

Json to_json(const RunArtifact& run) {
  const RunTrace& t = run.trace;
  Json j;
  j["algorithm"] = to_string(t.algorithm);
  j["env"] = run.env;
  j["learner"] = t.learner;
  j["expert_label"] = t.expert_label;
  Json hp = Json::object();
  for (const auto& [k, v] : t.hyperparameters) hp[k] = v;
  j["hyperparameters"] = std::move(hp);
  Json iters = Json::array();
  for (const auto& r : t.iterations) iters.push_back(record_to_json(r));
  j["iterations"] = std::move(iters);
  j["final_policy_id"] = t.final_policy_id;
  j["final_policy"] = to_json(run.store.get(t.final_policy_id));
  Json scalars = Json::object();
  for (const auto& [k, v] : t.scalars) scalars[k] = number(v);
  j["scalars"] = std::move(scalars);
  j["mixture_ids"] = t.mixture_ids;
  j["mixture_weights"] = numbers(t.mixture_weights);
  j["mdp"] = to_json(run.mdp);
  Json policies = Json::array();
  for (const auto& p : run.store.all()) policies.push_back(to_json(p));
  j["policies"] = std::move(policies);
  return j;
}

RunArtifact run_from_json(const Json& j) {
  return guarded("trace", [&] {
    const Json& pj = field(j, "policies", "trace");
    if (!pj.is_array() || pj.empty()) throw JsonFormatError("trace: 'policies' must hold at least the expert");
    PolicyStore store(policy_from_json(pj[0]));
    for (std::size_t i = 1; i < pj.size(); ++i) store.add(policy_from_json(pj[i]));
    RunTrace t;
    t.algorithm = algorithm_from_string(field(j, "algorithm", "trace").get<std::string>());
    t.learner = field(j, "learner", "trace").get<std::string>();
    t.expert_label = field(j, "expert_label", "trace").get<std::string>();
    for (const auto& [k, v] : field(j, "hyperparameters", "trace").items()) {
      t.hyperparameters.emplace_back(k, v.get<std::string>());
    }
    for (const auto& r : field(j, "iterations", "trace")) t.iterations.push_back(record_from_json(r));
    t.final_policy_id = field(j, "final_policy_id", "trace").get<int>();
    if (t.final_policy_id < 0 || static_cast<std::size_t>(t.final_policy_id) >= store.size()) {
      throw JsonFormatError("trace: final_policy_id is not a stored policy");
    }
    if (j.contains("scalars")) {
      for (const auto& [k, v] : j.at("scalars").items()) t.scalars[k] = read_number(v);
    }
    if (j.contains("mixture_ids")) t.mixture_ids = j.at("mixture_ids").get<std::vector<int>>();
    if (j.contains("mixture_weights")) t.mixture_weights = read_numbers(j.at("mixture_weights"), "trace.mixture_weights");
    for (const auto& r : t.iterations) {
      for (int id : {r.policy_id, r.executed_policy_id}) {
        if (id >= static_cast<int>(store.size())) {
          throw JsonFormatError("trace: iteration " + std::to_string(r.iteration) + " refers to unknown policy " +
                                std::to_string(id));
        }
      }
    }
    for (int id : t.mixture_ids) {
      if (id < 0 || id >= static_cast<int>(store.size())) throw JsonFormatError("trace: unknown mixture component");
    }
    TabularMdp mdp = mdp_from_json(field(j, "mdp", "trace"));
    for (const auto& p : store.all()) check_compatible(mdp, p);
    return RunArtifact{j.contains("env") ? j.at("env").get<std::string>() : std::string(), std::move(mdp),
                       std::move(t), std::move(store)};
  });
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw JsonFormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw JsonFormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace imlab
