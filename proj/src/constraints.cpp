#include "rulebench/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rulebench {

namespace {

double product_of(std::span<const double> preds, const Constraint& c) {
  double prod = c.rule_probability;
  for (const std::size_t i : c.premise_indices) prod *= preds[i];
  return prod;
}

void check_coverage(std::span<const double> preds, const Constraint& c) {
  const auto check = [&](std::size_t i) {
    if (i >= preds.size() || !std::isfinite(preds[i])) {
      throw std::invalid_argument("missing prediction for query #" + std::to_string(i));
    }
  };
  check(c.conclusion_index);
  for (const std::size_t i : c.premise_indices) check(i);
}

}  // namespace

AugmentedInstance build_constraints(const Instance& inst, const TemplateSet& templates) {
  AugmentedInstance out;
  out.base_id = inst.id;

  const Closure closure = derive_closure(inst.theory);
  std::vector<GroundAtom> cone = derivation_cone(closure, inst.hypothesis);
  if (cone.empty()) {
    // underivable hypothesis: it is still a query, with the closed-world gold
    out.queries.push_back({inst.question, inst.hypothesis, 0.0, 0});
    return out;
  }

  std::map<GroundAtom, std::size_t> index;
  for (const auto& atom : cone) {
    const DerivedFact& df = closure.derived.at(atom);
    AugmentedQuery q;
    q.text = render_atom_text(atom, templates);
    q.atom = atom;
    q.depth = df.depth;
    q.gold_probability = df.depth == 0 ? df.probability : infer_exact(inst.theory, atom);
    index.emplace(atom, out.queries.size());
    out.queries.push_back(std::move(q));
  }

  for (const auto& atom : cone) {
    const DerivedFact& df = closure.derived.at(atom);
    if (df.depth == 0) continue;  // given facts are premises, never conclusions
    for (const auto& step : df.steps) {
      Constraint c;
      c.rule_probability = step.rule_probability;
      c.conclusion_index = index.at(atom);
      for (const auto& p : step.premises) c.premise_indices.push_back(index.at(p));
      out.constraints.push_back(std::move(c));
    }
  }
  return out;
}

double constraint_violation(std::span<const double> preds, const Constraint& c) {
  check_coverage(preds, c);
  return std::abs(preds[c.conclusion_index] - product_of(preds, c));
}

void add_violation_gradient(std::span<const double> preds, const Constraint& c, double scale,
                            std::span<double> grad) {
  check_coverage(preds, c);
  const double diff = preds[c.conclusion_index] - product_of(preds, c);
  if (diff == 0.0) return;  // subgradient 0 at the kink
  const double sign = diff > 0.0 ? 1.0 : -1.0;
  grad[c.conclusion_index] += scale * sign;
  for (std::size_t j = 0; j < c.premise_indices.size(); ++j) {
    double partial = c.rule_probability;
    for (std::size_t i = 0; i < c.premise_indices.size(); ++i) {
      if (i != j) partial *= preds[c.premise_indices[i]];
    }
    grad[c.premise_indices[j]] -= scale * sign * partial;
  }
}

bool is_satisfied(std::span<const double> preds, const Constraint& c, double threshold) {
  return constraint_violation(preds, c) < threshold;
}

double product_implication_violation(std::span<const double> premise_preds,
                                     double conclusion_pred) {
  double prod = 1.0;
  for (const double p : premise_preds) prod *= p;
  if (prod <= 0.0) return conclusion_pred == 0.0 ? 0.0 : 1.0;
  return std::abs(1.0 - std::min(1.0, conclusion_pred / prod));
}

}  // namespace rulebench
