#include "imlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace imlab {

namespace {

struct DeterministicRule {
  int num_actions;
  std::vector<ActionId> actions;
};

struct StochasticRule {
  int num_states;
  int num_actions;
  std::vector<double> probs;
};

struct NonStationaryRule {
  std::vector<Policy> steps;
};

struct MixtureRule {
  std::vector<double> weights;
  std::vector<Policy> components;
  MixingMode mode;
};

void require_distribution(std::span<const double> p, const char* what) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument(std::string(what) + ": negative probability");
    }
    total += v;
  }
  if (!(std::abs(total - 1.0) <= kConstructionTol)) {
    throw std::invalid_argument(std::string(what) + ": probabilities do not sum to 1");
  }
}

}  // namespace

struct Policy::Rep {
  std::variant<DeterministicRule, StochasticRule, NonStationaryRule, MixtureRule> rule;
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  bool deterministic = false;
};

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::DeterministicStationary:
      return "deterministic";
    case PolicyKind::StochasticStationary:
      return "stochastic";
    case PolicyKind::NonStationary:
      return "non_stationary";
    case PolicyKind::Mixture:
      return "mixture";
  }
  return "unknown";
}

std::string_view to_string(MixingMode mode) {
  return mode == MixingMode::Trajectory ? "trajectory" : "per_step";
}

MixingMode mixing_mode_from_string(std::string_view name) {
  if (name == "trajectory") return MixingMode::Trajectory;
  if (name == "per_step") return MixingMode::PerStep;
  throw std::invalid_argument("unknown mixing mode '" + std::string(name) + "'");
}

Policy Policy::deterministic(int num_actions, std::vector<ActionId> actions) {
  if (num_actions < 1 || actions.empty()) {
    throw std::invalid_argument("Policy::deterministic: empty state or action space");
  }
  for (ActionId a : actions) {
    if (a < 0 || a >= num_actions) {
      throw std::invalid_argument("Policy::deterministic: action out of range");
    }
  }
  auto rep = std::make_shared<Rep>();
  rep->num_states = static_cast<int>(actions.size());
  rep->num_actions = num_actions;
  rep->deterministic = true;
  rep->rule = DeterministicRule{num_actions, std::move(actions)};
  return Policy(std::move(rep));
}

Policy Policy::stochastic(int num_states, int num_actions, std::vector<double> probs) {
  if (num_states < 1 || num_actions < 1 ||
      probs.size() != static_cast<std::size_t>(num_states) * num_actions) {
    throw std::invalid_argument("Policy::stochastic: table must have S*A entries");
  }
  bool point_masses = true;
  for (int s = 0; s < num_states; ++s) {
    std::span<const double> row(probs.data() + static_cast<std::size_t>(s) * num_actions,
                                static_cast<std::size_t>(num_actions));
    require_distribution(row, "Policy::stochastic");
    for (double v : row) {
      point_masses = point_masses && (v == 0.0 || v == 1.0);
    }
  }
  auto rep = std::make_shared<Rep>();
  rep->num_states = num_states;
  rep->num_actions = num_actions;
  rep->deterministic = point_masses;
  rep->rule = StochasticRule{num_states, num_actions, std::move(probs)};
  return Policy(std::move(rep));
}

Policy Policy::uniform(int num_states, int num_actions) {
  return stochastic(num_states, num_actions,
                    std::vector<double>(static_cast<std::size_t>(num_states) * num_actions,
                                        1.0 / num_actions));
}

Policy Policy::non_stationary(std::vector<Policy> steps) {
  if (steps.empty()) {
    throw std::invalid_argument("Policy::non_stationary: needs at least one step");
  }
  const int S = steps.front().num_states();
  const int A = steps.front().num_actions();
  bool deterministic = true;
  for (const auto& p : steps) {
    if (!p.is_stationary() || p.is_trajectory_mixture()) {
      throw std::invalid_argument("Policy::non_stationary: sub-policies must be stationary and Markov");
    }
    if (p.num_states() != S || p.num_actions() != A) {
      throw std::invalid_argument("Policy::non_stationary: sub-policies disagree on spaces");
    }
    deterministic = deterministic && p.is_deterministic();
  }
  auto rep = std::make_shared<Rep>();
  rep->num_states = S;
  rep->num_actions = A;
  rep->horizon = static_cast<int>(steps.size());
  rep->deterministic = deterministic;
  rep->rule = NonStationaryRule{std::move(steps)};
  return Policy(std::move(rep));
}

Policy Policy::mixture(std::vector<double> weights, std::vector<Policy> components, MixingMode mode) {
  if (weights.size() != components.size() || components.empty()) {
    throw std::invalid_argument("Policy::mixture: weights and components must be non-empty and aligned");
  }
  require_distribution(weights, "Policy::mixture weights");
  const int S = components.front().num_states();
  const int A = components.front().num_actions();
  int horizon = 0;
  std::vector<double> flat_weights;
  std::vector<Policy> flat_components;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const Policy& c = components[i];
    if (c.num_states() != S || c.num_actions() != A) {
      throw std::invalid_argument("Policy::mixture: components disagree on spaces");
    }
    if (c.horizon() != 0) {
      if (horizon != 0 && horizon != c.horizon()) {
        throw std::invalid_argument("Policy::mixture: components disagree on horizon");
      }
      horizon = c.horizon();
    }
    if (c.kind() == PolicyKind::Mixture) {
      if (c.mixing() != mode) {
        if (mode == MixingMode::PerStep) {
          throw std::invalid_argument("Policy::mixture: trajectory mixture inside a per-step mixture");
        }
        flat_weights.push_back(weights[i]);
        flat_components.push_back(c);
        continue;
      }
      const auto inner_w = c.weights();
      const auto& inner_c = c.components();
      for (std::size_t j = 0; j < inner_c.size(); ++j) {
        flat_weights.push_back(weights[i] * inner_w[j]);
        flat_components.push_back(inner_c[j]);
      }
      continue;
    }
    flat_weights.push_back(weights[i]);
    flat_components.push_back(c);
  }
  bool deterministic = flat_components.size() == 1 && flat_components.front().is_deterministic();
  auto rep = std::make_shared<Rep>();
  rep->num_states = S;
  rep->num_actions = A;
  rep->horizon = horizon;
  rep->deterministic = deterministic;
  rep->rule = MixtureRule{std::move(flat_weights), std::move(flat_components), mode};
  return Policy(std::move(rep));
}

PolicyKind Policy::kind() const noexcept { return static_cast<PolicyKind>(rep_->rule.index()); }
int Policy::num_states() const noexcept { return rep_->num_states; }
int Policy::num_actions() const noexcept { return rep_->num_actions; }
int Policy::horizon() const noexcept { return rep_->horizon; }
bool Policy::is_stationary() const noexcept { return rep_->horizon == 0; }
bool Policy::is_deterministic() const noexcept { return rep_->deterministic; }

bool Policy::is_trajectory_mixture() const noexcept {
  const auto* m = std::get_if<MixtureRule>(&rep_->rule);
  return m != nullptr && m->mode == MixingMode::Trajectory;
}

ActionId Policy::action(int step, StateId s) const {
  if (!rep_->deterministic) {
    throw std::logic_error("Policy::action: policy is not deterministic");
  }
  return std::visit(
      [&](const auto& rule) -> ActionId {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, DeterministicRule>) {
          return rule.actions[s];
        } else if constexpr (std::is_same_v<R, StochasticRule>) {
          for (ActionId a = 0; a < rule.num_actions; ++a) {
            if (rule.probs[static_cast<std::size_t>(s) * rule.num_actions + a] == 1.0) return a;
          }
          throw std::logic_error("Policy::action: no point mass");
        } else if constexpr (std::is_same_v<R, NonStationaryRule>) {
          return rule.steps.at(step).action(step, s);
        } else {
          return rule.components.front().action(step, s);
        }
      },
      rep_->rule);
}

double Policy::probability(int step, StateId s, ActionId a) const {
  return std::visit(
      [&](const auto& rule) -> double {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, DeterministicRule>) {
          return rule.actions[s] == a ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<R, StochasticRule>) {
          return rule.probs[static_cast<std::size_t>(s) * rule.num_actions + a];
        } else if constexpr (std::is_same_v<R, NonStationaryRule>) {
          return rule.steps.at(step).probability(step, s, a);
        } else {
          if (rule.mode == MixingMode::Trajectory) {
            throw std::logic_error("Policy::probability: trajectory mixture has no per-step rule");
          }
          double p = 0.0;
          for (std::size_t i = 0; i < rule.components.size(); ++i) {
            p += rule.weights[i] * rule.components[i].probability(step, s, a);
          }
          return p;
        }
      },
      rep_->rule);
}

void Policy::distribution(int step, StateId s, std::span<double> out) const {
  for (ActionId a = 0; a < num_actions(); ++a) {
    out[a] = probability(step, s, a);
  }
}

Policy Policy::step_policy(int step) const {
  if (const auto* ns = std::get_if<NonStationaryRule>(&rep_->rule)) {
    return ns->steps.at(step);
  }
  if (const auto* m = std::get_if<MixtureRule>(&rep_->rule); m != nullptr && rep_->horizon != 0) {
    std::vector<Policy> parts;
    parts.reserve(m->components.size());
    for (const auto& c : m->components) parts.push_back(c.step_policy(step));
    return mixture(m->weights, std::move(parts), m->mode);
  }
  return *this;
}

std::span<const ActionId> Policy::actions() const {
  return std::get<DeterministicRule>(rep_->rule).actions;
}
std::span<const double> Policy::probabilities() const {
  return std::get<StochasticRule>(rep_->rule).probs;
}
const std::vector<Policy>& Policy::steps() const { return std::get<NonStationaryRule>(rep_->rule).steps; }
std::span<const double> Policy::weights() const { return std::get<MixtureRule>(rep_->rule).weights; }
const std::vector<Policy>& Policy::components() const {
  return std::get<MixtureRule>(rep_->rule).components;
}
MixingMode Policy::mixing() const { return std::get<MixtureRule>(rep_->rule).mode; }

bool Policy::operator==(const Policy& other) const {
  if (rep_ == other.rep_) return true;
  if (kind() != other.kind() || num_states() != other.num_states() ||
      num_actions() != other.num_actions() || horizon() != other.horizon()) {
    return false;
  }
  switch (kind()) {
    case PolicyKind::DeterministicStationary:
      return std::ranges::equal(actions(), other.actions());
    case PolicyKind::StochasticStationary:
      return std::ranges::equal(probabilities(), other.probabilities());
    case PolicyKind::NonStationary:
      return steps() == other.steps();
    case PolicyKind::Mixture:
      return mixing() == other.mixing() && std::ranges::equal(weights(), other.weights()) &&
             components() == other.components();
  }
  return false;
}

ActionTable::ActionTable(int horizon, int num_states, int num_actions)
    : horizon_(horizon),
      num_states_(num_states),
      num_actions_(num_actions),
      probs_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

void check_compatible(const TabularMdp& mdp, const Policy& policy) {
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions()) {
    throw std::invalid_argument("policy spaces (" + std::to_string(policy.num_states()) + "x" +
                                std::to_string(policy.num_actions()) + ") do not match MDP (" +
                                std::to_string(mdp.num_states()) + "x" +
                                std::to_string(mdp.num_actions()) + ")");
  }
  if (policy.horizon() != 0 && policy.horizon() != mdp.horizon()) {
    throw std::invalid_argument("non-stationary policy has " + std::to_string(policy.horizon()) +
                                " steps but the MDP horizon is " + std::to_string(mdp.horizon()));
  }
}

ActionTable action_table(const Policy& policy, int horizon) {
  if (policy.is_trajectory_mixture()) {
    throw std::invalid_argument("action_table: trajectory mixtures are not Markov; evaluate components");
  }
  ActionTable table(horizon, policy.num_states(), policy.num_actions());
  for (int t = 0; t < horizon; ++t) {
    const Policy rule = policy.step_policy(policy.horizon() == 0 ? 0 : t);
    for (StateId s = 0; s < policy.num_states(); ++s) {
      rule.distribution(t, s, table.row(t, s));
    }
  }
  return table;
}

Policy constant_policy(int num_states, int num_actions, ActionId action) {
  return Policy::deterministic(num_actions, std::vector<ActionId>(static_cast<std::size_t>(num_states), action));
}

}  // namespace imlab
