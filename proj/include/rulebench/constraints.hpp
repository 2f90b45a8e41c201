#pragma once

#include <span>
#include <string>
#include <vector>

#include "rulebench/instance.hpp"
#include "rulebench/textio.hpp"

namespace rulebench {

// One reasoning step as an equality over predicted probabilities:
//   P(conclusion) = rule_probability * prod P(premise_i)
// Indices refer to the owning AugmentedInstance's query list.
struct Constraint {
  std::vector<std::size_t> premise_indices;
  double rule_probability = 1.0;
  std::size_t conclusion_index = 0;

  bool operator==(const Constraint&) const = default;
};

struct AugmentedQuery {
  std::string text;
  GroundAtom atom;
  double gold_probability = 1.0;
  int depth = 0;

  bool operator==(const AugmentedQuery&) const = default;
};

// Everything derivable in the hypothesis's reasoning cone, plus one equality
// constraint per derivation step with an inferred (depth >= 1) conclusion.
struct AugmentedInstance {
  std::string base_id;
  std::vector<AugmentedQuery> queries;
  std::vector<Constraint> constraints;

  bool operator==(const AugmentedInstance&) const = default;
};

// Queries cover the derivation cone of the hypothesis (the hypothesis always
// included, given facts with their stated probability, inferred facts with
// their exact probability). Complex instances contribute one constraint per
// distinct derivation step; no disjunction constraint is asserted.
AugmentedInstance build_constraints(const Instance& inst, const TemplateSet& templates = {});

// C = |P(q) - Pr * prod P(p_i)|, a value in [0,1].
double constraint_violation(std::span<const double> preds, const Constraint& c);

// Adds scale * dC/dpred into grad for every query the constraint touches.
// The subgradient at the absolute value's kink is taken as 0.
void add_violation_gradient(std::span<const double> preds, const Constraint& c, double scale,
                            std::span<double> grad);

// Satisfaction check: violation strictly below the threshold.
bool is_satisfied(std::span<const double> preds, const Constraint& c, double threshold);

// Product-surrogate implication violation |1 - min(1, P(q) / prod P(p_i))|.
// A zero premise product yields 0 when P(q) is 0 and 1 otherwise.
double product_implication_violation(std::span<const double> premise_preds, double conclusion_pred);

}  // namespace rulebench
