#include "imlab/mdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace imlab {

TabularMdp::TabularMdp(int num_states, int num_actions, int horizon, std::vector<double> transition,
                       std::vector<double> cost, std::vector<double> initial)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      transition_(std::move(transition)),
      cost_(std::move(cost)),
      initial_(std::move(initial)) {
  if (num_states_ < 1 || num_actions_ < 1 || horizon_ < 1) {
    throw std::invalid_argument("TabularMdp: num_states, num_actions and horizon must be positive");
  }
  const auto S = static_cast<std::size_t>(num_states_);
  const auto A = static_cast<std::size_t>(num_actions_);
  if (transition_.size() != S * A * S) {
    throw std::invalid_argument("TabularMdp: transition table must have S*A*S entries");
  }
  if (cost_.size() != S * A) {
    throw std::invalid_argument("TabularMdp: cost table must have S*A entries");
  }
  if (initial_.size() != S) {
    throw std::invalid_argument("TabularMdp: initial distribution must have S entries");
  }
}

TabularMdp TabularMdp::with_horizon(int horizon) const {
  return TabularMdp(num_states_, num_actions_, horizon, transition_, cost_, initial_);
}

std::string Violation::message() const {
  std::ostringstream out;
  out << constraint << " at (";
  for (std::size_t i = 0; i < index.size(); ++i) {
    out << (i ? "," : "") << index[i];
  }
  out << ")";
  return out.str();
}

std::vector<Violation> validate_mdp(const TabularMdp& mdp) {
  std::vector<Violation> out;
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      double total = 0.0;
      bool negative = false;
      for (double p : mdp.successors(s, a)) {
        negative = negative || !(p >= 0.0);
        total += p;
      }
      if (negative) {
        out.push_back({"transition entry negative", {s, a}});
      }
      if (!(std::abs(total - 1.0) <= kConstructionTol)) {
        out.push_back({"transition row does not sum to 1", {s, a}});
      }
      const double c = mdp.cost(s, a);
      if (!(c >= 0.0 && c <= 1.0)) {
        out.push_back({"cost outside [0,1]", {s, a}});
      }
    }
  }
  double total = 0.0;
  for (StateId s = 0; s < S; ++s) {
    const double p = mdp.initial()[s];
    if (!(p >= 0.0)) {
      out.push_back({"initial probability negative", {s}});
    }
    total += p;
  }
  if (!(std::abs(total - 1.0) <= kConstructionTol)) {
    out.push_back({"initial distribution does not sum to 1", {}});
  }
  return out;
}

void require_valid(const TabularMdp& mdp) {
  const auto violations = validate_mdp(mdp);
  if (violations.empty()) {
    return;
  }
  std::ostringstream out;
  out << "invalid MDP: " << violations.size() << " violation(s)";
  for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
    out << "; " << violations[i].message();
  }
  throw std::invalid_argument(out.str());
}

}  // namespace imlab
