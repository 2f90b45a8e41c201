#include "rulebench/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace rulebench {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (unsigned char c : s) {
    if (!std::isalnum(c) && c != '_') return false;
  }
  return true;
}

bool is_variable_name(std::string_view s) {
  return s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z';
}

Predicate::Predicate(std::string name_, int arity_) : name(std::move(name_)), arity(arity_) {
  require(is_identifier(name), "predicate name must be a nonempty ASCII word: '" + name + "'");
  require(arity == 1 || arity == 2, "predicate arity must be 1 or 2");
}

std::string Predicate::surface() const { return lower(name); }

GroundAtom::GroundAtom(Predicate pred, std::vector<std::string> args_)
    : predicate(std::move(pred)), args(std::move(args_)) {
  require(static_cast<int>(args.size()) == predicate.arity,
          "atom argument count must match predicate arity: " + predicate.name);
  for (const auto& a : args) {
    require(is_identifier(a) && !is_variable_name(a),
            "entity name must be an ASCII word of length > 1: '" + a + "'");
  }
}

std::string GroundAtom::to_string() const {
  std::string out = predicate.name;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += args[i];
  }
  out += ')';
  return out;
}

GroundAtom GroundAtom::parse(std::string_view s) {
  const RuleAtom atom = RuleAtom::parse(s);
  std::vector<std::string> args;
  for (const auto& t : atom.args) {
    require(!t.is_variable(), "expected a ground atom, got variable in: " + std::string(s));
    args.push_back(t.text);
  }
  return GroundAtom(atom.predicate, std::move(args));
}

Fact::Fact(GroundAtom atom_, double probability_)
    : atom(std::move(atom_)), probability(probability_) {
  require(std::isfinite(probability) && probability >= 0.0 && probability <= 1.0,
          "fact probability must lie in [0,1]");
}

Term Term::variable(std::string name) {
  require(is_variable_name(name), "variable must be a single uppercase letter: '" + name + "'");
  return Term{Kind::Variable, std::move(name)};
}

Term Term::entity(std::string name) {
  require(is_identifier(name) && !is_variable_name(name),
          "entity name must be an ASCII word of length > 1: '" + name + "'");
  return Term{Kind::Entity, std::move(name)};
}

Term Term::from_text(std::string name) {
  return is_variable_name(name) ? variable(std::move(name)) : entity(std::move(name));
}

RuleAtom::RuleAtom(Predicate pred, std::vector<Term> args_)
    : predicate(std::move(pred)), args(std::move(args_)) {
  require(static_cast<int>(args.size()) == predicate.arity,
          "atom argument count must match predicate arity: " + predicate.name);
}

std::string RuleAtom::to_string() const {
  std::string out = predicate.name;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += args[i].text;
  }
  out += ')';
  return out;
}

RuleAtom RuleAtom::parse(std::string_view s) {
  const auto open = s.find('(');
  require(open != std::string_view::npos && s.back() == ')',
          "malformed atom (expected Name(arg,...)): " + std::string(s));
  const std::string name(s.substr(0, open));
  std::vector<Term> args;
  std::string_view body = s.substr(open + 1, s.size() - open - 2);
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto comma = body.find(',', start);
    const auto piece = body.substr(start, comma == std::string_view::npos ? body.size() - start
                                                                          : comma - start);
    require(!piece.empty(), "empty argument in atom: " + std::string(s));
    args.push_back(Term::from_text(std::string(piece)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  const int arity = static_cast<int>(args.size());
  return RuleAtom(Predicate(name, arity), std::move(args));
}

const std::array<Adverb, 8>& adverb_table() {
  static const std::array<Adverb, 8> table = {{
      {"always", 1.00},
      {"usually", 0.90},
      {"normally", 0.80},
      {"often", 0.65},
      {"sometimes", 0.50},
      {"occasionally", 0.30},
      {"seldom", 0.15},
      {"never", 0.00},
  }};
  return table;
}

Adverb adverb_for_probability(double p) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "probability must lie in [0,1]");
  const auto& table = adverb_table();
  // Scan from the lowest probability up so exact midpoints keep the lower one.
  Adverb best = table.back();
  double best_dist = std::abs(p - best.probability);
  for (auto it = table.rbegin(); it != table.rend(); ++it) {
    const double d = std::abs(p - it->probability);
    if (d < best_dist) {
      best = *it;
      best_dist = d;
    }
  }
  return best;
}

double probability_for_adverb(std::string_view word) {
  const std::string w = lower(word);
  for (const auto& a : adverb_table()) {
    if (a.word == w) return a.probability;
  }
  throw std::invalid_argument("unknown adverb of uncertainty: '" + std::string(word) + "'");
}

bool is_adverb_word(std::string_view word) {
  const std::string w = lower(word);
  for (const auto& a : adverb_table()) {
    if (a.word == w) return true;
  }
  return false;
}

std::string canonical_probability_string(double probability) {
  for (const auto& a : adverb_table()) {
    if (probability == a.probability) return a.word;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", probability);
  return buf;
}

Rule::Rule(std::vector<RuleAtom> premises_, RuleAtom conclusion_, double probability_,
           std::optional<Adverb> adverb_)
    : premises(std::move(premises_)),
      conclusion(std::move(conclusion_)),
      probability(probability_),
      adverb(std::move(adverb_)) {
  require(!premises.empty(), "rule must have at least one premise");
  require(std::isfinite(probability) && probability >= 0.0 && probability <= 1.0,
          "rule probability must lie in [0,1]");
  if (adverb) {
    require(probability == adverb->probability,
            "rule probability must equal its adverb's table value exactly");
    require(probability_for_adverb(adverb->word) == adverb->probability,
            "adverb word/probability pair not in the table");
  }
  // range restriction: every conclusion variable is bound by some premise
  std::set<std::string> bound;
  for (const auto& p : premises) {
    for (const auto& t : p.args) {
      if (t.is_variable()) bound.insert(t.text);
    }
  }
  for (const auto& t : conclusion.args) {
    if (t.is_variable()) {
      require(bound.count(t.text) > 0,
              "conclusion variable '" + t.text + "' does not appear in any premise");
    }
  }
}

void validate_theory(const Theory& t) {
  std::set<std::string> entities(t.entities.begin(), t.entities.end());
  require(entities.size() == t.entities.size(), "duplicate entity in theory");
  std::set<std::string> seen;
  for (const auto& f : t.facts) {
    require(seen.insert(f.atom.to_string()).second,
            "duplicate fact in theory: " + f.atom.to_string());
    for (const auto& a : f.atom.args) {
      require(entities.count(a) > 0, "fact argument '" + a + "' not in the entity list");
    }
  }
  for (const auto& r : t.rules) {
    for (const auto& atom : r.premises) {
      for (const auto& term : atom.args) {
        if (!term.is_variable()) {
          require(entities.count(term.text) > 0,
                  "rule entity '" + term.text + "' not in the entity list");
        }
      }
    }
    for (const auto& term : r.conclusion.args) {
      if (!term.is_variable()) {
        require(entities.count(term.text) > 0,
                "rule entity '" + term.text + "' not in the entity list");
      }
    }
  }
}

}  // namespace rulebench
