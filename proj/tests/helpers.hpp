#pragma once

// Shared fixtures: the two small family/attribute theories used across the
// test suites, plus terse builders for atoms and rules.

#include <optional>
#include <string>
#include <vector>

#include "rulebench/core.hpp"

namespace rulebench::testing {

inline GroundAtom attr(const std::string& name, const std::string& entity) {
  return GroundAtom(Predicate(name, 1), {entity});
}

inline GroundAtom rel(const std::string& name, const std::string& a, const std::string& b) {
  return GroundAtom(Predicate(name, 2), {a, b});
}

inline Rule attr_rule(const std::string& premise, const std::string& conclusion, double p,
                      bool with_adverb = true) {
  const Term x = Term::variable("X");
  std::optional<Adverb> adverb;
  if (with_adverb) adverb = Adverb{adverb_for_probability(p)};
  return Rule({RuleAtom(Predicate(premise, 1), {x})}, RuleAtom(Predicate(conclusion, 1), {x}), p,
              adverb);
}

// two facts, three adverb rules; queries about Dave peak at depth 2
inline Theory attribute_theory() {
  Theory t;
  t.entities = {"Dave", "Erin"};
  t.facts.emplace_back(attr("Big", "Dave"), 1.0);
  t.facts.emplace_back(attr("Sad", "Erin"), 1.0);
  t.rules.push_back(attr_rule("Big", "Green", 0.90));
  t.rules.push_back(attr_rule("Green", "Round", 0.80));
  t.rules.push_back(attr_rule("Sad", "Round", 0.15));
  return t;
}

// same rules but both facts about Dave: two derivation paths into Round(Dave)
inline Theory attribute_theory_two_paths() {
  Theory t = attribute_theory();
  t.facts[1] = Fact(attr("Sad", "Dave"), 1.0);
  t.entities = {"Dave"};
  return t;
}

// random fact/rule generators for the parsing round-trip properties
namespace detail {
inline const std::vector<std::string>& sample_entities() {
  static const std::vector<std::string> v = {"Dave", "Erin", "David", "Ann", "Mike", "Fiona"};
  return v;
}
inline const std::vector<std::string>& sample_attributes() {
  static const std::vector<std::string> v = {"Big", "Green", "Round", "Sad",
                                             "Blue", "Kind",  "Quiet"};
  return v;
}
inline const std::vector<std::string>& sample_relations() {
  static const std::vector<std::string> v = {"Cousin", "Child", "Spouse", "Parent", "Friend"};
  return v;
}
}  // namespace detail

template <class RngT>
Fact random_fact(RngT& rng) {
  const auto& ents = detail::sample_entities();
  if (rng.below(2) == 0) {
    const auto& attrs = detail::sample_attributes();
    return Fact(attr(attrs[rng.below(attrs.size())], ents[rng.below(ents.size())]), 1.0);
  }
  const auto& rels = detail::sample_relations();
  const auto a = ents[rng.below(ents.size())];
  auto b = ents[rng.below(ents.size())];
  while (b == a) b = ents[rng.below(ents.size())];
  return Fact(rel(rels[rng.below(rels.size())], a, b), 1.0);
}

template <class RngT>
Rule random_rule(RngT& rng) {
  const Adverb adverb = adverb_for_probability(rng.unit());
  const double p = adverb.probability;
  if (rng.below(2) == 0) {
    std::vector<std::string> attrs = detail::sample_attributes();
    rng.shuffle(attrs);
    const std::size_t n = 1 + rng.below(3);
    const Term x = Term::variable("X");
    std::vector<RuleAtom> premises;
    for (std::size_t i = 0; i < n; ++i) {
      premises.emplace_back(Predicate(attrs[i], 1), std::vector<Term>{x});
    }
    return Rule(std::move(premises), RuleAtom(Predicate(attrs[n], 1), {x}), p, adverb);
  }
  const auto& rels = detail::sample_relations();
  const Term a = Term::variable("A");
  const Term b = Term::variable("B");
  const Term c = Term::variable("C");
  const auto ratom = [&](Term lhs, Term rhs) {
    return RuleAtom(Predicate(rels[rng.below(rels.size())], 2), {std::move(lhs), std::move(rhs)});
  };
  const std::size_t n = 1 + rng.below(2);
  std::vector<RuleAtom> premises;
  premises.push_back(ratom(a, b));
  if (n == 2) premises.push_back(ratom(c, b));
  return Rule(std::move(premises), ratom(n == 2 ? c : a, b), p, adverb);
}

// cousin/child facts with a two-premise rule; Child(Mike,David) at depth 2
inline Theory relation_theory() {
  const Term a = Term::variable("A");
  const Term b = Term::variable("B");
  const Term c = Term::variable("C");
  Theory t;
  t.entities = {"Ann", "David", "Mike"};
  t.facts.emplace_back(rel("Cousin", "David", "Ann"), 1.0);
  t.facts.emplace_back(rel("Child", "Mike", "Ann"), 1.0);
  t.rules.emplace_back(
      std::vector<RuleAtom>{RuleAtom(Predicate("Spouse", 2), {a, b}),
                            RuleAtom(Predicate("Child", 2), {c, b})},
      RuleAtom(Predicate("Child", 2), {c, a}), 0.90, Adverb{"usually", 0.90});
  t.rules.emplace_back(std::vector<RuleAtom>{RuleAtom(Predicate("Cousin", 2), {a, b})},
                       RuleAtom(Predicate("Spouse", 2), {a, b}), 0.15, Adverb{"seldom", 0.15});
  return t;
}

}  // namespace rulebench::testing
