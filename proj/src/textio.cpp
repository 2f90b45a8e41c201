#include "rulebench/textio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rulebench/rng.hpp"

namespace rulebench {

namespace {

bool is_lower_word(std::string_view s) {
  if (s.empty()) return false;
  for (unsigned char c : s) {
    if (!std::islower(c)) return false;
  }
  return true;
}

bool is_entity_token(std::string_view s) {
  if (s.size() < 2 || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
  return is_identifier(s);
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string percent_string(double probability) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", probability * 100.0);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == ' ') {
      ++i;
      continue;
    }
    if (s[i] == ',' || s[i] == '.') {
      out.push_back({std::string(1, s[i]), i, i + 1});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != ',' && s[j] != '.') ++j;
    out.push_back({std::string(s.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

// Token cursor over one sentence; all expect_* helpers throw ParseError with
// the offending span.
class Cursor {
 public:
  Cursor(std::string_view sentence) : sentence_(sentence), tokens_(tokenize(sentence)) {}

  bool done() const { return pos_ >= tokens_.size(); }

  const Token& peek() const {
    if (done()) fail("unexpected end of sentence", sentence_.size(), sentence_.size());
    return tokens_[pos_];
  }

  Token take() {
    Token t = peek();
    ++pos_;
    return t;
  }

  bool next_is(std::string_view text) const { return !done() && tokens_[pos_].text == text; }

  Token expect(std::string_view text, const std::string& what) {
    const Token& t = peek();
    if (t.text != text) fail("expected " + what, t.begin, t.end);
    return take();
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t begin, std::size_t end) const {
    throw ParseError(msg, std::string(sentence_), begin, end);
  }

  [[noreturn]] void fail_here(const std::string& msg) const {
    if (done()) fail(msg, sentence_.size(), sentence_.size());
    fail(msg, tokens_[pos_].begin, tokens_[pos_].end);
  }

 private:
  std::string_view sentence_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

const std::string kKeywords[] = {"is", "of", "a", "the", "and", "then", "they",
                                 "are", "someone", "if", "with", "probability"};

bool is_keyword(std::string_view s) {
  for (const auto& k : kKeywords) {
    if (k == s) return true;
  }
  return false;
}

std::string take_adjective(Cursor& c) {
  const Token t = c.peek();
  if (!is_lower_word(t.text) || is_keyword(t.text) || is_adverb_word(t.text)) {
    c.fail("expected an attribute word", t.begin, t.end);
  }
  c.take();
  return t.text;
}

std::string take_relation_word(Cursor& c) {
  const Token t = c.peek();
  if (!is_lower_word(t.text) || is_keyword(t.text)) {
    c.fail("expected a relation word", t.begin, t.end);
  }
  c.take();
  return t.text;
}

std::string take_entity(Cursor& c) {
  const Token t = c.peek();
  if (!is_entity_token(t.text)) c.fail("expected an entity name", t.begin, t.end);
  c.take();
  return t.text;
}

Term take_term(Cursor& c) {
  const Token t = c.peek();
  if (is_variable_name(t.text)) {
    c.take();
    return Term::variable(t.text);
  }
  if (is_entity_token(t.text)) {
    c.take();
    return Term::entity(t.text);
  }
  c.fail("expected a variable or entity name", t.begin, t.end);
}

std::string take_article(Cursor& c) {
  const Token t = c.peek();
  if (t.text != "a" && t.text != "an" && t.text != "the") {
    c.fail("expected 'a', 'an', or 'the'", t.begin, t.end);
  }
  c.take();
  return t.text;
}

double parse_percent(Cursor& c) {
  const Token t = c.peek();
  if (t.text.size() < 2 || t.text.back() != '%') c.fail("expected a percentage", t.begin, t.end);
  const std::string digits = t.text.substr(0, t.text.size() - 1);
  bool dot = false;
  for (char ch : digits) {
    if (ch == '.' && !dot) {
      dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      c.fail("expected a percentage", t.begin, t.end);
    }
  }
  double value = 0.0;
  const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (res.ec != std::errc() || value < 0.0 || value > 100.0) {
    c.fail("percentage out of range", t.begin, t.end);
  }
  c.take();
  return value / 100.0;
}

bool is_attribute_rule(const Rule& r) {
  for (const auto& p : r.premises) {
    if (p.predicate.arity != 1) return false;
  }
  return r.conclusion.predicate.arity == 1;
}

bool is_relation_rule(const Rule& r) {
  for (const auto& p : r.premises) {
    if (p.predicate.arity != 2) return false;
  }
  return r.conclusion.predicate.arity == 2;
}

std::string relation_atom_text(const RuleAtom& atom, const TemplateSet& templates) {
  return atom.args[0].text + " is " + templates.article(atom.predicate) + " " +
         atom.predicate.surface() + " of " + atom.args[1].text;
}

// "someone is big and strong then they are green", with the comma and the
// capitalization of "if" controlled by the rule style
std::string attribute_rule_body(const Rule& r, bool capitalize_if, bool comma_before_then) {
  const Term& var = r.premises[0].args[0];
  for (const auto& p : r.premises) {
    if (!p.args[0].is_variable() || !(p.args[0] == var)) {
      throw std::invalid_argument(
          "attribute rule template requires one shared variable across premises");
    }
  }
  if (!(r.conclusion.args[0] == var)) {
    throw std::invalid_argument("attribute rule conclusion must use the premise variable");
  }
  std::string out = capitalize_if ? "If someone is " : "if someone is ";
  for (std::size_t i = 0; i < r.premises.size(); ++i) {
    if (i) out += " and ";
    out += r.premises[i].predicate.surface();
  }
  out += comma_before_then ? ", then they are " : " then they are ";
  out += r.conclusion.predicate.surface();
  return out;
}

std::string relation_rule_body(const Rule& r, bool capitalize_if, const TemplateSet& templates) {
  std::string out = capitalize_if ? "If " : "if ";
  for (std::size_t i = 0; i < r.premises.size(); ++i) {
    if (i) out += " and ";
    out += relation_atom_text(r.premises[i], templates);
  }
  out += ", then ";
  out += relation_atom_text(r.conclusion, templates);
  return out;
}

std::string rule_body(const Rule& r, RuleTextStyle style, const TemplateSet& templates) {
  if (r.premises.size() > 3) {
    throw std::invalid_argument("rule templates cover at most 3 premises");
  }
  const bool lowercase_if = style == RuleTextStyle::Numeric;
  if (is_attribute_rule(r)) {
    return attribute_rule_body(r, !lowercase_if, /*comma_before_then=*/lowercase_if);
  }
  if (is_relation_rule(r)) {
    return relation_rule_body(r, !lowercase_if, templates);
  }
  throw std::invalid_argument("no sentence template for a mixed-arity rule");
}

}  // namespace

std::string TemplateSet::article(const Predicate& p) const {
  const auto it = relation_article.find(p.name);
  if (it != relation_article.end()) return it->second;
  const std::string surface = p.surface();
  return surface.find_first_of("aeiou") == 0 ? "an" : "a";
}

RuleTextStyle rule_text_style_from_string(std::string_view s) {
  if (s == "adverb") return RuleTextStyle::Adverb;
  if (s == "numeric") return RuleTextStyle::Numeric;
  if (s == "bare") return RuleTextStyle::Bare;
  throw std::invalid_argument("unknown rule text style: '" + std::string(s) + "'");
}

std::string to_string(RuleTextStyle style) {
  switch (style) {
    case RuleTextStyle::Adverb:
      return "adverb";
    case RuleTextStyle::Numeric:
      return "numeric";
    case RuleTextStyle::Bare:
      return "bare";
  }
  return "adverb";
}

ParseError::ParseError(const std::string& message, std::string sentence, std::size_t begin,
                       std::size_t end)
    : std::runtime_error(message + " at '" +
                         (begin < sentence.size() ? sentence.substr(begin, end - begin)
                                                  : std::string("<end>")) +
                         "' in: " + sentence),
      sentence_(std::move(sentence)),
      begin_(begin),
      end_(end) {}

std::string render_atom_text(const GroundAtom& atom, const TemplateSet& templates) {
  if (atom.predicate.arity == 1) {
    return atom.args[0] + " is " + atom.predicate.surface() + ".";
  }
  if (atom.predicate.arity == 2) {
    return atom.args[0] + " is " + templates.article(atom.predicate) + " " +
           atom.predicate.surface() + " of " + atom.args[1] + ".";
  }
  throw std::invalid_argument("no sentence template for arity " +
                              std::to_string(atom.predicate.arity));
}

std::string render_fact(const Fact& f, const TemplateSet& templates) {
  return render_atom_text(f.atom, templates);
}

std::string render_rule(const Rule& r, RuleTextStyle style, const TemplateSet& templates) {
  switch (style) {
    case RuleTextStyle::Bare:
      return rule_body(r, style, templates) + ".";
    case RuleTextStyle::Adverb: {
      if (!r.adverb) {
        throw std::invalid_argument("adverb style requested for a rule without an adverb");
      }
      return capitalize(r.adverb->word) + ", " + rule_body(r, style, templates) + ".";
    }
    case RuleTextStyle::Numeric:
      return "With the probability of " + percent_string(r.probability) + "%, " +
             rule_body(r, style, templates) + ".";
  }
  throw std::invalid_argument("unknown rule text style");
}

std::string render_context(const Theory& t, bool include_rules, std::uint64_t seed,
                           RuleTextStyle style, const TemplateSet& templates) {
  std::vector<std::string> sentences;
  if (include_rules) {
    for (const auto& r : t.rules) sentences.push_back(render_rule(r, style, templates));
  }
  for (const auto& f : t.facts) sentences.push_back(render_fact(f, templates));
  Rng rng(seed);
  rng.shuffle(sentences);
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) out += ' ';
    out += sentences[i];
  }
  return out;
}

Fact parse_fact(std::string_view sentence) {
  Cursor c(sentence);
  const std::string subject = take_entity(c);
  c.expect("is", "'is'");
  if (c.next_is("a") || c.next_is("an") || c.next_is("the")) {
    take_article(c);
    const std::string rel = take_relation_word(c);
    c.expect("of", "'of'");
    const std::string object = take_entity(c);
    c.expect(".", "'.' to end the sentence");
    if (!c.done()) c.fail_here("trailing text after sentence end");
    return Fact(GroundAtom(Predicate(capitalize(rel), 2), {subject, object}), 1.0);
  }
  const std::string attr = take_adjective(c);
  c.expect(".", "'.' to end the sentence");
  if (!c.done()) c.fail_here("trailing text after sentence end");
  return Fact(GroundAtom(Predicate(capitalize(attr), 1), {subject}), 1.0);
}

Rule parse_rule(std::string_view sentence) {
  Cursor c(sentence);

  RuleTextStyle style = RuleTextStyle::Bare;
  double probability = 1.0;
  std::optional<Adverb> adverb;

  if (c.next_is("With")) {
    c.take();
    c.expect("the", "'the'");
    c.expect("probability", "'probability'");
    c.expect("of", "'of'");
    probability = parse_percent(c);
    c.expect(",", "',' after the probability prefix");
    style = RuleTextStyle::Numeric;
    for (const auto& a : adverb_table()) {
      if (a.probability == probability) {
        adverb = a;
        break;
      }
    }
  } else if (!c.done() && !c.next_is("If")) {
    const Token t = c.peek();
    if (t.text == capitalize(t.text) && is_adverb_word(t.text)) {
      c.take();
      c.expect(",", "',' after the adverb");
      style = RuleTextStyle::Adverb;
      const std::string word = std::string(1, std::tolower(static_cast<unsigned char>(t.text[0]))) +
                               t.text.substr(1);
      probability = probability_for_adverb(word);
      adverb = Adverb{word, probability};
    } else {
      c.fail("expected 'If', an adverb of uncertainty, or a probability prefix", t.begin, t.end);
    }
  }

  const bool numeric = style == RuleTextStyle::Numeric;
  c.expect(numeric ? "if" : "If", numeric ? "'if'" : "'If'");

  std::vector<RuleAtom> premises;
  RuleAtom conclusion;

  if (c.next_is("someone")) {
    c.take();
    c.expect("is", "'is'");
    std::vector<std::string> attrs{take_adjective(c)};
    while (c.next_is("and")) {
      c.take();
      attrs.push_back(take_adjective(c));
    }
    // the numeric prefix is the only form with a comma before "then"
    if (numeric) {
      c.expect(",", "',' before 'then'");
    } else if (c.next_is(",")) {
      c.fail_here("unexpected ',' in this rule form");
    }
    c.expect("then", "'then'");
    c.expect("they", "'they'");
    c.expect("are", "'are'");
    const std::string head = take_adjective(c);
    c.expect(".", "'.' to end the sentence");
    if (!c.done()) c.fail_here("trailing text after sentence end");

    const Term var = Term::variable("X");
    for (const auto& a : attrs) {
      premises.emplace_back(Predicate(capitalize(a), 1), std::vector<Term>{var});
    }
    conclusion = RuleAtom(Predicate(capitalize(head), 1), std::vector<Term>{var});
  } else {
    const auto take_relation_atom = [&]() {
      Term lhs = take_term(c);
      c.expect("is", "'is'");
      take_article(c);
      const std::string rel = take_relation_word(c);
      c.expect("of", "'of'");
      Term rhs = take_term(c);
      return RuleAtom(Predicate(capitalize(rel), 2), std::vector<Term>{lhs, rhs});
    };
    premises.push_back(take_relation_atom());
    while (c.next_is("and")) {
      c.take();
      premises.push_back(take_relation_atom());
    }
    c.expect(",", "',' before 'then'");
    c.expect("then", "'then'");
    conclusion = take_relation_atom();
    c.expect(".", "'.' to end the sentence");
    if (!c.done()) c.fail_here("trailing text after sentence end");
  }

  if (premises.size() > 3) {
    throw ParseError("rule templates cover at most 3 premises", std::string(sentence), 0,
                     sentence.size());
  }
  return Rule(std::move(premises), std::move(conclusion), probability, std::move(adverb));
}

TemplateSet Vocabulary::templates() const {
  TemplateSet out;
  for (const auto& r : relations) out.relation_article[r.name] = r.article;
  return out;
}

std::vector<Predicate> Vocabulary::predicates() const {
  std::vector<Predicate> out;
  for (const auto& a : attributes) out.emplace_back(a, 1);
  for (const auto& r : relations) out.emplace_back(r.name, 2);
  return out;
}

Predicate Vocabulary::predicate(std::string_view name) const {
  for (const auto& a : attributes) {
    if (a == name) return Predicate(a, 1);
  }
  for (const auto& r : relations) {
    if (r.name == name) return Predicate(r.name, 2);
  }
  throw std::invalid_argument("predicate '" + std::string(name) + "' not in the vocabulary");
}

std::string Vocabulary::to_table() const {
  std::ostringstream out;
  for (const auto& e : entities) out << "entity " << e << "\n";
  for (const auto& a : attributes) out << "attribute " << a << "\n";
  for (const auto& r : relations) out << "relation " << r.name << " " << r.article << "\n";
  return out.str();
}

Vocabulary Vocabulary::from_table(std::string_view text) {
  Vocabulary v;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind, name, article;
    ls >> kind >> name;
    const std::string where = " (vocabulary line " + std::to_string(lineno) + ")";
    if (kind == "entity") {
      if (!is_identifier(name) || is_variable_name(name)) {
        throw std::invalid_argument("bad entity name '" + name + "'" + where);
      }
      v.entities.push_back(name);
    } else if (kind == "attribute") {
      Predicate check(name, 1);
      v.attributes.push_back(name);
    } else if (kind == "relation") {
      Predicate check(name, 2);
      ls >> article;
      if (article.empty()) article = "a";
      if (article != "a" && article != "an" && article != "the") {
        throw std::invalid_argument("relation article must be 'a', 'an', or 'the'" + where);
      }
      v.relations.push_back({name, article});
    } else {
      throw std::invalid_argument("unknown vocabulary entry kind '" + kind + "'" + where);
    }
  }
  return v;
}

Vocabulary Vocabulary::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_table(buf.str());
}

void Vocabulary::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  out << to_table();
}

Vocabulary Vocabulary::defaults() {
  Vocabulary v;
  v.entities = {"Dave", "Erin", "David", "Ann", "Mike", "Bob", "Fiona", "Gary"};
  v.attributes = {"Big",   "Green", "Round", "Sad",   "Blue", "Kind",
                  "Quiet", "Smart", "Furry", "Young", "Red",  "Cold"};
  for (const char* name :
       {"Cousin", "Child", "Spouse", "Parent", "Guardian", "Relative", "Acquaintance", "Friend"}) {
    v.relations.push_back({name, name[0] == 'A' ? "an" : "a"});
  }
  return v;
}

}  // namespace rulebench
