#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rulebench/core.hpp"

namespace rulebench {

// Sentence templates:
//   attribute fact   "Dave is big."
//   relation fact    "David is a cousin of Ann."   (article per predicate)
//   attribute rule   "If someone is big then they are green."
//   relation rule    "If A is a spouse of B and C is a child of B, then C is a child of A."
//   adverb prefix    "Usually, <rule text>"
//   numeric prefix   "With the probability of 15%, <rule text>"
// The numeric prefix lowercases the leading "if" and always places a comma
// before "then"; the adverb and bare forms keep the attribute template
// comma-free.
struct TemplateSet {
  // relation predicate name -> article; anything unlisted renders with "a"
  std::map<std::string, std::string> relation_article;

  std::string article(const Predicate& p) const;
};

enum class RuleTextStyle { Adverb, Numeric, Bare };

RuleTextStyle rule_text_style_from_string(std::string_view s);
std::string to_string(RuleTextStyle style);

// Parse failures carry the offending span of the input sentence.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::string sentence, std::size_t begin,
             std::size_t end);

  const std::string& sentence() const { return sentence_; }
  std::string span() const { return sentence_.substr(begin_, end_ - begin_); }
  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }

 private:
  std::string sentence_;
  std::size_t begin_;
  std::size_t end_;
};

std::string render_fact(const Fact& f, const TemplateSet& templates = {});
std::string render_atom_text(const GroundAtom& atom, const TemplateSet& templates = {});

// style Adverb requires rule.adverb; style Bare omits the probability.
std::string render_rule(const Rule& r, RuleTextStyle style, const TemplateSet& templates = {});

// All rule and fact sentences (rules first when included), shuffled by seed
// and joined with single spaces.
std::string render_context(const Theory& t, bool include_rules, std::uint64_t seed,
                           RuleTextStyle style = RuleTextStyle::Adverb,
                           const TemplateSet& templates = {});

Fact parse_fact(std::string_view sentence);

// Inverse of render_rule. Numeric sentences restore the adverb when the value
// matches the table exactly; bare sentences parse with probability 1.0.
Rule parse_rule(std::string_view sentence);

// Entities, attribute predicates, and relation predicates available to the
// generator and the feature encoder. Serializable as a plain-text table.
struct Vocabulary {
  std::vector<std::string> entities;
  std::vector<std::string> attributes;  // predicate names, arity 1
  struct Relation {
    std::string name;  // predicate name, arity 2
    std::string article = "a";
    bool operator==(const Relation&) const = default;
  };
  std::vector<Relation> relations;

  bool operator==(const Vocabulary&) const = default;

  TemplateSet templates() const;
  std::vector<Predicate> predicates() const;
  Predicate predicate(std::string_view name) const;

  // one entry per line: "entity Dave" | "attribute Big" | "relation Cousin a"
  std::string to_table() const;
  static Vocabulary from_table(std::string_view text);
  static Vocabulary load_file(const std::string& path);
  void save_file(const std::string& path) const;

  static Vocabulary defaults();
};

}  // namespace rulebench
