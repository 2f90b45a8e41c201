#include "rulebench/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rulebench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kHalf = 0.5;

GroundAtom attr_ground(const std::string& attr, const std::string& entity) {
  return GroundAtom(Predicate(attr, 1), {entity});
}

Rule attr_rule(const std::string& premise, const std::string& conclusion, double p,
               std::optional<Adverb> adverb) {
  const Term x = Term::variable("X");
  return Rule({RuleAtom(Predicate(premise, 1), {x})}, RuleAtom(Predicate(conclusion, 1), {x}), p,
              std::move(adverb));
}

std::vector<std::string> mentioned_entities(const Theory& t) {
  std::set<std::string> s;
  for (const auto& f : t.facts) {
    for (const auto& a : f.atom.args) s.insert(a);
  }
  for (const auto& r : t.rules) {
    for (const auto& atom : r.premises) {
      for (const auto& term : atom.args) {
        if (!term.is_variable()) s.insert(term.text);
      }
    }
    for (const auto& term : r.conclusion.args) {
      if (!term.is_variable()) s.insert(term.text);
    }
  }
  return {s.begin(), s.end()};
}

struct BudgetCounter {
  int remaining;
  int target_depth;
  bool target_label;
  NetworkKind target_kind;

  void spend() {
    if (--remaining < 0) {
      throw std::runtime_error("generation budget exhausted for cell depth=" +
                               std::to_string(target_depth) +
                               " label=" + (target_label ? std::string("True") : "False") +
                               " kind=" + to_string(target_kind));
    }
  }
};

// Fills surface forms, oracle outputs, and the proof chain; assumes id,
// theory, and hypothesis are already set.
void finalize_instance(Instance& inst, const GenConfig& cfg, std::uint64_t context_seed) {
  inst.theory.entities = mentioned_entities(inst.theory);
  validate_theory(inst.theory);

  const TemplateSet templates = cfg.vocabulary.templates();
  inst.fact_texts.clear();
  inst.rule_texts.clear();
  for (const auto& f : inst.theory.facts) inst.fact_texts.push_back(render_fact(f, templates));
  for (const auto& r : inst.theory.rules) {
    inst.rule_texts.push_back(render_rule(r, cfg.style, templates));
  }
  inst.context = render_context(inst.theory, cfg.include_rules_in_text, context_seed, cfg.style,
                                templates);
  inst.question = render_atom_text(inst.hypothesis, templates);

  const Closure closure = derive_closure(inst.theory);
  inst.depth = closure.depth_of(inst.hypothesis).value_or(0);
  inst.kind = classify(closure, inst.hypothesis);
  inst.gold_probability = infer_exact(inst.theory, inst.hypothesis);
  inst.gold_label = inst.gold_probability > kHalf;
  inst.proof = minimal_proof_chain(closure, inst.hypothesis);
}

bool matches_cell(const Instance& inst, int target_depth, bool target_label,
                  NetworkKind target_kind) {
  if (inst.depth != target_depth || inst.kind != target_kind) return false;
  if (inst.gold_probability == kHalf) return false;  // keep labels unambiguous
  return inst.gold_label == target_label;
}

Instance generate_attribute_instance(const GenConfig& cfg, int target_depth, bool target_label,
                                     NetworkKind target_kind, Rng& rng, BudgetCounter& budget) {
  const auto& vocab = cfg.vocabulary;
  const int chain_len = std::max(target_depth, 1);
  const bool complex_wanted = target_kind == NetworkKind::Complex;
  const std::size_t attrs_needed = static_cast<std::size_t>(chain_len) + 1 + 2 + 1;
  if (vocab.attributes.size() < attrs_needed) {
    throw std::invalid_argument("vocabulary needs at least " + std::to_string(attrs_needed) +
                                " attributes for depth " + std::to_string(target_depth));
  }
  if (vocab.entities.size() < 2) {
    throw std::invalid_argument("vocabulary needs at least 2 entities");
  }
  if (complex_wanted && target_depth < 1) {
    throw std::invalid_argument("complex instances need depth >= 1");
  }

  while (true) {
    budget.spend();

    std::vector<std::string> entities = vocab.entities;
    rng.shuffle(entities);
    const std::string subject = entities[0];
    const std::string bystander = entities[1];

    std::vector<std::string> attrs = vocab.attributes;
    rng.shuffle(attrs);
    std::size_t next = 0;
    std::vector<std::string> chain(attrs.begin(), attrs.begin() + chain_len + 1);
    next = static_cast<std::size_t>(chain_len) + 1;
    const std::string pivot_src = attrs[next++];
    const std::string noise_a = attrs[next++];
    const std::string noise_b = attrs[next++];

    Theory t;
    t.facts.emplace_back(attr_ground(chain[0], subject), 1.0);
    t.facts.emplace_back(attr_ground(noise_a, bystander), 1.0);
    if (complex_wanted) t.facts.emplace_back(attr_ground(pivot_src, subject), 1.0);

    std::vector<std::size_t> chain_rules;
    if (target_depth >= 1) {
      for (int i = 0; i < target_depth; ++i) {
        chain_rules.push_back(t.rules.size());
        t.rules.push_back(attr_rule(chain[static_cast<std::size_t>(i)],
                                    chain[static_cast<std::size_t>(i) + 1], 1.0, std::nullopt));
      }
      if (complex_wanted) {
        // second one-step path into the first inferred chain fact
        t.rules.push_back(attr_rule(pivot_src, chain[1], 1.0, std::nullopt));
      }
    }
    t.rules.push_back(attr_rule(noise_a, noise_b, 1.0, std::nullopt));

    // depth-0 False asks about an attribute nothing supports
    const std::string& h_attr =
        (target_depth == 0 && !target_label) ? chain[1] : chain[static_cast<std::size_t>(target_depth)];
    const Hypothesis h = attr_ground(h_attr, subject);
    t.entities = mentioned_entities(t);

    Instance inst;
    inst.theory = std::move(t);
    inst.hypothesis = h;

    // resample rule probabilities until the gold lands on the requested side
    bool accepted = false;
    for (int tries = 0; tries < 256 && !accepted; ++tries) {
      budget.spend();
      for (auto& rule : inst.theory.rules) {
        const auto [p, adverb] = sample_rule_probability(rng, cfg.gaussian_mean,
                                                         cfg.gaussian_stddev);
        rule.probability = p;
        rule.adverb = adverb;
      }
      if (target_depth == 0) {
        accepted = true;
        break;
      }
      if (!complex_wanted) {
        double prod = 1.0;
        for (const std::size_t ri : chain_rules) prod *= inst.theory.rules[ri].probability;
        accepted = prod != kHalf && (prod > kHalf) == target_label;
      } else {
        const double exact = infer_exact(inst.theory, inst.hypothesis);
        accepted = exact != kHalf && (exact > kHalf) == target_label;
      }
    }
    if (!accepted) continue;

    finalize_instance(inst, cfg, rng.next_u64());
    if (matches_cell(inst, target_depth, target_label, target_kind)) return inst;
  }
}

Instance generate_relation_instance(const GenConfig& cfg, int target_depth, bool target_label,
                                    NetworkKind target_kind, Rng& rng, BudgetCounter& budget) {
  const auto& vocab = cfg.vocabulary;
  if (vocab.entities.size() < 3) {
    throw std::invalid_argument("relation-pool generation needs at least 3 entities");
  }
  const std::vector<Rule> pool = relation_rule_pool(vocab);
  const std::vector<std::string> base_relations = {"Cousin", "Parent", "Child"};

  while (true) {
    budget.spend();

    std::vector<std::string> entities = vocab.entities;
    rng.shuffle(entities);
    entities.resize(3);

    // ordered pairs of distinct entities
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : entities) {
      for (const auto& b : entities) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }

    Theory t;
    t.rules = pool;
    const std::size_t fact_count = 2 + rng.below(3);
    std::set<std::string> used;
    for (std::size_t i = 0; i < fact_count; ++i) {
      const auto& rel = base_relations[rng.below(base_relations.size())];
      const auto& pair = pairs[rng.below(pairs.size())];
      GroundAtom atom(vocab.predicate(rel), {pair.first, pair.second});
      if (used.insert(atom.to_string()).second) t.facts.emplace_back(std::move(atom), 1.0);
    }
    t.entities = mentioned_entities(t);

    const Closure closure = derive_closure(t);

    std::vector<GroundAtom> candidates;
    if (target_depth == 0 && target_label) {
      for (const auto& f : t.facts) candidates.push_back(f.atom);
    } else if (target_depth == 0) {
      // any pool-vocabulary atom absent from the closure is a closed-world 0
      for (const auto& rel : vocab.relations) {
        for (const auto& pair : pairs) {
          GroundAtom atom(vocab.predicate(rel.name), {pair.first, pair.second});
          if (std::find(t.entities.begin(), t.entities.end(), pair.first) == t.entities.end() ||
              std::find(t.entities.begin(), t.entities.end(), pair.second) == t.entities.end()) {
            continue;
          }
          if (!closure.contains(atom)) candidates.push_back(atom);
        }
      }
    } else {
      for (const auto& [atom, df] : closure.derived) {
        if (df.depth != target_depth) continue;
        if (classify(closure, atom) != target_kind) continue;
        const double exact = infer_exact(t, atom);
        if (exact == kHalf || (exact > kHalf) != target_label) continue;
        candidates.push_back(atom);
      }
    }
    if (candidates.empty()) continue;

    Instance inst;
    inst.theory = t;
    inst.hypothesis = candidates[rng.below(candidates.size())];
    finalize_instance(inst, cfg, rng.next_u64());
    if (matches_cell(inst, target_depth, target_label, target_kind)) return inst;
  }
}

}  // namespace

GenMode gen_mode_from_string(std::string_view s) {
  if (s == "attribute_chains") return GenMode::AttributeChains;
  if (s == "relation_pool") return GenMode::RelationPool;
  throw std::invalid_argument("unknown generation mode: '" + std::string(s) + "'");
}

std::string to_string(GenMode mode) {
  return mode == GenMode::AttributeChains ? "attribute_chains" : "relation_pool";
}

void GenConfig::validate() const {
  if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
  if (static_cast<int>(depth_counts.size()) > max_depth + 1) {
    throw std::invalid_argument("depth_counts has more entries than max_depth + 1");
  }
  for (const auto& q : depth_counts) {
    if (q.true_count < 0 || q.false_count < 0) {
      throw std::invalid_argument("per-depth counts must be >= 0");
    }
  }
  if (!(gaussian_mean >= 0.0 && gaussian_mean <= 1.0)) {
    throw std::invalid_argument("gaussian_mean must lie in [0,1]");
  }
  if (!(gaussian_stddev > 0.0)) throw std::invalid_argument("gaussian_stddev must be > 0");
  if (!(complex_fraction >= 0.0 && complex_fraction <= 1.0)) {
    throw std::invalid_argument("complex_fraction must lie in [0,1]");
  }
  if (attempt_budget <= 0) throw std::invalid_argument("attempt_budget must be > 0");
}

std::pair<double, Adverb> sample_rule_probability(Rng& rng, double mean, double stddev) {
  const double draw = rng.gaussian(mean, stddev);
  const double clipped = std::clamp(draw, 0.0, 1.0);
  const Adverb adverb = adverb_for_probability(clipped);
  return {adverb.probability, adverb};
}

std::vector<Rule> relation_rule_pool(const Vocabulary& vocab) {
  const Term a = Term::variable("A");
  const Term b = Term::variable("B");
  const Term c = Term::variable("C");
  const auto atom = [&](const char* name, Term lhs, Term rhs) {
    return RuleAtom(vocab.predicate(name), {std::move(lhs), std::move(rhs)});
  };
  const auto with_adverb = [](double p) { return adverb_for_probability(p); };

  std::vector<Rule> pool;
  pool.emplace_back(std::vector<RuleAtom>{atom("Cousin", a, b)}, atom("Spouse", a, b), 0.15,
                    with_adverb(0.15));
  pool.emplace_back(std::vector<RuleAtom>{atom("Spouse", a, b), atom("Child", c, b)},
                    atom("Child", c, a), 0.90, with_adverb(0.90));
  pool.emplace_back(std::vector<RuleAtom>{atom("Parent", a, b)}, atom("Guardian", a, b), 0.90,
                    with_adverb(0.90));
  pool.emplace_back(std::vector<RuleAtom>{atom("Guardian", a, b)}, atom("Relative", a, b), 0.80,
                    with_adverb(0.80));
  pool.emplace_back(std::vector<RuleAtom>{atom("Spouse", a, b)}, atom("Relative", a, b), 0.65,
                    with_adverb(0.65));
  pool.emplace_back(std::vector<RuleAtom>{atom("Relative", a, b)}, atom("Acquaintance", a, b),
                    0.90, with_adverb(0.90));
  pool.emplace_back(std::vector<RuleAtom>{atom("Child", a, b)}, atom("Friend", a, b), 0.30,
                    with_adverb(0.30));
  pool.emplace_back(std::vector<RuleAtom>{atom("Cousin", a, b)}, atom("Friend", a, b), 0.15,
                    with_adverb(0.15));
  pool.emplace_back(std::vector<RuleAtom>{atom("Parent", a, b)}, atom("Friend", a, b), 0.65,
                    with_adverb(0.65));
  return pool;
}

Instance generate_instance(const GenConfig& cfg, int target_depth, bool target_label,
                           NetworkKind target_kind, Rng& rng) {
  cfg.validate();
  if (target_depth > cfg.max_depth) {
    throw std::invalid_argument("target depth exceeds max_depth");
  }
  BudgetCounter budget{cfg.attempt_budget, target_depth, target_label, target_kind};
  if (cfg.mode == GenMode::AttributeChains) {
    return generate_attribute_instance(cfg, target_depth, target_label, target_kind, rng, budget);
  }
  return generate_relation_instance(cfg, target_depth, target_label, target_kind, rng, budget);
}

Instance generate_instance(const GenConfig& cfg, int target_depth, bool target_label, Rng& rng) {
  return generate_instance(cfg, target_depth, target_label, NetworkKind::Simple, rng);
}

std::vector<Instance> generate_split(const GenConfig& cfg) {
  cfg.validate();
  std::vector<Instance> out;
  const Rng base(cfg.seed);
  for (std::size_t d = 0; d < cfg.depth_counts.size(); ++d) {
    const auto& quota = cfg.depth_counts[d];
    for (const bool label : {true, false}) {
      const int count = label ? quota.true_count : quota.false_count;
      const int complex_count =
          d >= 1 ? static_cast<int>(std::lround(cfg.complex_fraction * count)) : 0;
      Rng cell_rng = base.split(d * 2 + (label ? 0 : 1));
      for (int k = 0; k < count; ++k) {
        const NetworkKind kind = k < complex_count ? NetworkKind::Complex : NetworkKind::Simple;
        Instance inst =
            generate_instance(cfg, static_cast<int>(d), label, kind, cell_rng);
        inst.id = "d" + std::to_string(d) + (label ? "-t-" : "-f-") + std::to_string(k);
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

std::vector<DepthQuota> default_depth_profile(int divisor) {
  if (divisor <= 0) throw std::invalid_argument("divisor must be > 0");
  const int full[6][2] = {{2616, 2720}, {3802, 3692}, {2442, 2520},
                          {2118, 2026}, {1852, 1858}, {1761, 1734}};
  std::vector<DepthQuota> out;
  for (const auto& [t, f] : full) {
    DepthQuota q;
    q.true_count = static_cast<int>(std::lround(static_cast<double>(t) / divisor));
    q.false_count = static_cast<int>(std::lround(static_cast<double>(f) / divisor));
    out.push_back(q);
  }
  return out;
}

std::string GenConfig::to_json_text() const {
  ordered_json j;
  j["mode"] = to_string(mode);
  j["seed"] = seed;
  j["max_depth"] = max_depth;
  ordered_json counts = ordered_json::array();
  for (const auto& q : depth_counts) counts.push_back({q.true_count, q.false_count});
  j["counts"] = counts;
  j["gaussian_mean"] = gaussian_mean;
  j["gaussian_stddev"] = gaussian_stddev;
  j["style"] = to_string(style);
  j["include_rules_in_text"] = include_rules_in_text;
  j["complex_fraction"] = complex_fraction;
  j["attempt_budget"] = attempt_budget;
  ordered_json vocab;
  vocab["entities"] = vocabulary.entities;
  vocab["attributes"] = vocabulary.attributes;
  ordered_json rels = ordered_json::array();
  for (const auto& r : vocabulary.relations) rels.push_back({r.name, r.article});
  vocab["relations"] = rels;
  j["vocabulary"] = vocab;
  return j.dump(2);
}

GenConfig GenConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  GenConfig cfg;
  if (j.contains("mode")) cfg.mode = gen_mode_from_string(j["mode"].get<std::string>());
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("max_depth")) cfg.max_depth = j["max_depth"].get<int>();
  if (j.contains("counts")) {
    cfg.depth_counts.clear();
    for (const auto& pair : j["counts"]) {
      cfg.depth_counts.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
    }
  }
  if (j.contains("gaussian_mean")) cfg.gaussian_mean = j["gaussian_mean"].get<double>();
  if (j.contains("gaussian_stddev")) cfg.gaussian_stddev = j["gaussian_stddev"].get<double>();
  if (j.contains("style")) cfg.style = rule_text_style_from_string(j["style"].get<std::string>());
  if (j.contains("include_rules_in_text")) {
    cfg.include_rules_in_text = j["include_rules_in_text"].get<bool>();
  }
  if (j.contains("complex_fraction")) cfg.complex_fraction = j["complex_fraction"].get<double>();
  if (j.contains("attempt_budget")) cfg.attempt_budget = j["attempt_budget"].get<int>();
  if (j.contains("vocabulary")) {
    const auto& v = j["vocabulary"];
    Vocabulary vocab;
    vocab.entities = v.at("entities").get<std::vector<std::string>>();
    vocab.attributes = v.at("attributes").get<std::vector<std::string>>();
    for (const auto& r : v.at("relations")) {
      vocab.relations.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>()});
    }
    cfg.vocabulary = std::move(vocab);
  }
  cfg.validate();
  return cfg;
}

}  // namespace rulebench
