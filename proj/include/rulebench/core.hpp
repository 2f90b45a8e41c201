#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rulebench {

// Attribute predicates have arity 1 ("Big(Dave)"), relation predicates
// arity 2 ("Cousin(David,Ann)"). Names are capitalized ASCII words.
struct Predicate {
  std::string name;
  int arity = 1;

  Predicate() = default;
  Predicate(std::string name, int arity);

  bool operator==(const Predicate&) const = default;
  auto operator<=>(const Predicate&) const = default;

  // lowercase surface form used in sentences ("Big" -> "big")
  std::string surface() const;
};

// A ground atom: predicate applied to entity names only.
struct GroundAtom {
  Predicate predicate;
  std::vector<std::string> args;

  GroundAtom() = default;
  GroundAtom(Predicate pred, std::vector<std::string> args);

  bool operator==(const GroundAtom&) const = default;
  auto operator<=>(const GroundAtom&) const = default;

  std::string to_string() const;  // "Cousin(David,Ann)"
  static GroundAtom parse(std::string_view s);
};

// A hypothesis is just a ground atom to be queried.
using Hypothesis = GroundAtom;

struct Fact {
  GroundAtom atom;
  double probability = 1.0;

  Fact() = default;
  Fact(GroundAtom atom, double probability);

  bool operator==(const Fact&) const = default;
};

// Rule atom argument: a bound entity or a variable symbol.
// Variables are single uppercase letters; entity names are longer.
struct Term {
  enum class Kind { Entity, Variable };
  Kind kind = Kind::Variable;
  std::string text;

  static Term variable(std::string name);
  static Term entity(std::string name);
  static Term from_text(std::string name);  // classifies by the convention above

  bool is_variable() const { return kind == Kind::Variable; }
  bool operator==(const Term&) const = default;
  auto operator<=>(const Term&) const = default;
};

struct RuleAtom {
  Predicate predicate;
  std::vector<Term> args;

  RuleAtom() = default;
  RuleAtom(Predicate pred, std::vector<Term> args);

  bool operator==(const RuleAtom&) const = default;
  auto operator<=>(const RuleAtom&) const = default;

  std::string to_string() const;  // "Cousin(A,B)"
  static RuleAtom parse(std::string_view s);
};

struct Adverb {
  std::string word;
  double probability = 0.0;

  bool operator==(const Adverb&) const = default;
};

// The eight adverbs of uncertainty, in descending probability order.
const std::array<Adverb, 8>& adverb_table();

// Nearest adverb to p; exact midpoints resolve to the lower probability.
Adverb adverb_for_probability(double p);

// Exact table value for a (case-insensitive) adverb word.
double probability_for_adverb(std::string_view word);

bool is_adverb_word(std::string_view word);

// "usually" when the probability matches a table entry exactly, otherwise a
// two-decimal literal such as "0.37".
std::string canonical_probability_string(double probability);

struct Rule {
  std::vector<RuleAtom> premises;
  RuleAtom conclusion;
  double probability = 1.0;
  std::optional<Adverb> adverb;

  Rule() = default;
  Rule(std::vector<RuleAtom> premises, RuleAtom conclusion, double probability,
       std::optional<Adverb> adverb = std::nullopt);

  bool operator==(const Rule&) const = default;
};

struct Theory {
  std::vector<Fact> facts;
  std::vector<Rule> rules;
  std::vector<std::string> entities;

  bool operator==(const Theory&) const = default;
};

// Throws std::invalid_argument on duplicate facts, unknown entities, or
// arity mismatches.
void validate_theory(const Theory& t);

bool is_identifier(std::string_view s);
bool is_variable_name(std::string_view s);

}  // namespace rulebench
