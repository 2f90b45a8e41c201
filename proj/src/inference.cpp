#include "rulebench/inference.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace rulebench {

namespace {

struct GroundRule {
  std::size_t rule_index;
  std::vector<int> premises;
  int conclusion;

  auto key() const { return std::tie(rule_index, premises, conclusion); }
  bool operator<(const GroundRule& o) const { return key() < o.key(); }
};

struct Grounding {
  std::vector<GroundAtom> atoms;  // id -> atom
  std::map<GroundAtom, int> ids;
  std::vector<GroundRule> rules;
  std::vector<std::pair<int, double>> facts;  // (atom id, probability)

  int intern(const GroundAtom& atom) {
    const auto it = ids.find(atom);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(atoms.size());
    atoms.push_back(atom);
    ids.emplace(atom, id);
    return id;
  }

  int lookup(const GroundAtom& atom) const {
    const auto it = ids.find(atom);
    return it == ids.end() ? -1 : it->second;
  }
};

std::vector<std::string> rule_variables(const Rule& r) {
  std::vector<std::string> vars;
  const auto add = [&](const RuleAtom& atom) {
    for (const auto& t : atom.args) {
      if (t.is_variable() && std::find(vars.begin(), vars.end(), t.text) == vars.end()) {
        vars.push_back(t.text);
      }
    }
  };
  for (const auto& p : r.premises) add(p);
  add(r.conclusion);
  return vars;
}

GroundAtom substitute(const RuleAtom& atom, const std::map<std::string, std::string>& binding) {
  std::vector<std::string> args;
  args.reserve(atom.args.size());
  for (const auto& t : atom.args) {
    args.push_back(t.is_variable() ? binding.at(t.text) : t.text);
  }
  return GroundAtom(atom.predicate, std::move(args));
}

Grounding ground(const Theory& t) {
  Grounding g;
  for (const auto& f : t.facts) g.facts.emplace_back(g.intern(f.atom), f.probability);

  std::set<GroundRule> seen;
  for (std::size_t ri = 0; ri < t.rules.size(); ++ri) {
    const Rule& rule = t.rules[ri];
    const auto vars = rule_variables(rule);
    const std::size_t n = t.entities.size();
    if (!vars.empty() && n == 0) continue;

    std::vector<std::size_t> counter(vars.size(), 0);
    while (true) {
      std::map<std::string, std::string> binding;
      for (std::size_t v = 0; v < vars.size(); ++v) binding[vars[v]] = t.entities[counter[v]];

      GroundRule gr;
      gr.rule_index = ri;
      for (const auto& p : rule.premises) gr.premises.push_back(g.intern(substitute(p, binding)));
      gr.conclusion = g.intern(substitute(rule.conclusion, binding));
      if (seen.insert(gr).second) g.rules.push_back(std::move(gr));

      std::size_t v = 0;
      for (; v < vars.size(); ++v) {
        if (++counter[v] < n) break;
        counter[v] = 0;
      }
      if (v == vars.size()) break;
    }
  }
  return g;
}

// forward chaining over the selected ground rules; returns the known set
std::vector<char> chain(std::vector<char> known,
                        const std::vector<const GroundRule*>& active, int stop_atom = -1) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const GroundRule* gr : active) {
      if (known[gr->conclusion]) continue;
      bool all = true;
      for (const int p : gr->premises) {
        if (!known[p]) {
          all = false;
          break;
        }
      }
      if (all) {
        known[gr->conclusion] = 1;
        if (gr->conclusion == stop_atom) return known;
        changed = true;
      }
    }
  }
  return known;
}

constexpr int kUnreached = std::numeric_limits<int>::max();

struct ClosureBuild {
  Grounding g;
  std::vector<char> known;
  std::vector<int> depths;                           // per atom id
  std::vector<std::vector<const GroundRule*>> steps; // per atom id, deriving rules
};

ClosureBuild build_closure(const Theory& t) {
  ClosureBuild b;
  b.g = ground(t);
  const std::size_t n_atoms = b.g.atoms.size();

  b.known.assign(n_atoms, 0);
  for (const auto& [id, prob] : b.g.facts) b.known[id] = 1;
  std::vector<const GroundRule*> all;
  all.reserve(b.g.rules.size());
  for (const auto& gr : b.g.rules) all.push_back(&gr);
  b.known = chain(std::move(b.known), all);

  b.steps.assign(n_atoms, {});
  for (const auto& gr : b.g.rules) {
    bool supported = true;
    for (const int p : gr.premises) {
      if (!b.known[p]) {
        supported = false;
        break;
      }
    }
    if (supported) b.steps[gr.conclusion].push_back(&gr);
  }

  b.depths.assign(n_atoms, kUnreached);
  for (const auto& [id, prob] : b.g.facts) b.depths[id] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& gr : b.g.rules) {
      int cand = 0;
      bool ok = true;
      for (const int p : gr.premises) {
        if (b.depths[p] == kUnreached) {
          ok = false;
          break;
        }
        cand = std::max(cand, b.depths[p]);
      }
      if (!ok) continue;
      cand += 1;
      if (cand < b.depths[gr.conclusion]) {
        b.depths[gr.conclusion] = cand;
        changed = true;
      }
    }
  }
  return b;
}

}  // namespace

std::string to_string(NetworkKind kind) {
  return kind == NetworkKind::Simple ? "simple" : "complex";
}

NetworkKind network_kind_from_string(std::string_view s) {
  if (s == "simple") return NetworkKind::Simple;
  if (s == "complex") return NetworkKind::Complex;
  throw std::invalid_argument("unknown network kind: '" + std::string(s) + "'");
}

const DerivedFact* Closure::find(const GroundAtom& atom) const {
  const auto it = derived.find(atom);
  return it == derived.end() ? nullptr : &it->second;
}

std::optional<int> Closure::depth_of(const GroundAtom& atom) const {
  const DerivedFact* f = find(atom);
  if (!f) return std::nullopt;
  return f->depth;
}

Closure derive_closure(const Theory& t) {
  const ClosureBuild b = build_closure(t);
  const std::size_t n_atoms = b.g.atoms.size();

  // chain probabilities in depth order: given facts keep their stated value,
  // derived facts take rule probability times premise chain probabilities
  // along a deterministic minimal-depth step
  std::map<int, double> given;
  for (const auto& [id, prob] : b.g.facts) given[id] = prob;

  std::vector<int> order;
  for (std::size_t id = 0; id < n_atoms; ++id) {
    if (b.known[id]) order.push_back(static_cast<int>(id));
  }
  std::sort(order.begin(), order.end(), [&](int a, int c) {
    if (b.depths[a] != b.depths[c]) return b.depths[a] < b.depths[c];
    return b.g.atoms[a] < b.g.atoms[c];
  });

  std::vector<double> prob(n_atoms, 0.0);
  std::vector<int> chosen(n_atoms, -1);
  Closure closure;
  for (const int id : order) {
    DerivedFact df;
    df.depth = b.depths[id];
    const auto it = given.find(id);
    if (it != given.end()) {
      prob[id] = it->second;
    } else {
      // deterministic choice among the steps achieving the minimal depth
      int best = -1;
      for (std::size_t s = 0; s < b.steps[id].size(); ++s) {
        const GroundRule* gr = b.steps[id][s];
        int d = 0;
        for (const int p : gr->premises) d = std::max(d, b.depths[p]);
        if (d + 1 != b.depths[id]) continue;
        if (best == -1 || gr->key() < b.steps[id][best]->key()) best = static_cast<int>(s);
      }
      chosen[id] = best;
      const GroundRule* gr = b.steps[id][best];
      double p = t.rules[gr->rule_index].probability;
      for (const int pre : gr->premises) p *= prob[pre];
      prob[id] = p;
    }
    df.probability = prob[id];
    df.chosen_step = chosen[id];
    for (const GroundRule* gr : b.steps[id]) {
      ProofStep step;
      step.rule_index = gr->rule_index;
      for (const int p : gr->premises) step.premises.push_back(b.g.atoms[p]);
      step.conclusion = b.g.atoms[id];
      step.rule_probability = t.rules[gr->rule_index].probability;
      step.inferred_probability = step.rule_probability;
      for (const int p : gr->premises) step.inferred_probability *= prob[p];
      df.steps.push_back(std::move(step));
    }
    closure.derived.emplace(b.g.atoms[id], std::move(df));
  }
  return closure;
}

std::vector<GroundAtom> derivation_cone(const Closure& closure, const Hypothesis& h) {
  std::vector<GroundAtom> cone;
  if (!closure.contains(h)) return cone;
  std::set<GroundAtom> seen;
  std::vector<GroundAtom> stack{h};
  seen.insert(h);
  while (!stack.empty()) {
    const GroundAtom atom = stack.back();
    stack.pop_back();
    cone.push_back(atom);
    for (const auto& step : closure.derived.at(atom).steps) {
      for (const auto& p : step.premises) {
        if (seen.insert(p).second) stack.push_back(p);
      }
    }
  }
  std::sort(cone.begin(), cone.end(), [&](const GroundAtom& a, const GroundAtom& c) {
    const int da = closure.derived.at(a).depth;
    const int dc = closure.derived.at(c).depth;
    if (da != dc) return da < dc;
    return a < c;
  });
  return cone;
}

NetworkKind classify(const Closure& closure, const Hypothesis& h) {
  for (const auto& atom : derivation_cone(closure, h)) {
    if (closure.derived.at(atom).steps.size() >= 2) return NetworkKind::Complex;
  }
  return NetworkKind::Simple;
}

NetworkKind classify(const Theory& t, const Hypothesis& h) {
  return classify(derive_closure(t), h);
}

std::vector<ProofStep> minimal_proof_chain(const Closure& closure, const Hypothesis& h) {
  std::vector<ProofStep> steps;
  const DerivedFact* top = closure.find(h);
  if (!top || top->depth == 0) return steps;

  std::set<GroundAtom> visited;
  std::vector<GroundAtom> stack{h};
  while (!stack.empty()) {
    const GroundAtom atom = stack.back();
    stack.pop_back();
    if (!visited.insert(atom).second) continue;
    const DerivedFact& df = closure.derived.at(atom);
    if (df.chosen_step < 0) continue;  // given leaf
    const ProofStep& step = df.steps[static_cast<std::size_t>(df.chosen_step)];
    steps.push_back(step);
    for (const auto& p : step.premises) stack.push_back(p);
  }
  std::sort(steps.begin(), steps.end(), [&](const ProofStep& a, const ProofStep& b) {
    const int da = closure.derived.at(a.conclusion).depth;
    const int db = closure.derived.at(b.conclusion).depth;
    if (da != db) return da < db;
    return a.conclusion < b.conclusion;
  });
  return steps;
}

SimpleInference infer_simple(const Theory& t, const Hypothesis& h) {
  const Closure closure = derive_closure(t);
  if (classify(closure, h) == NetworkKind::Complex) {
    throw std::invalid_argument("infer_simple refused: '" + h.to_string() +
                                "' has a complex derivation network");
  }
  SimpleInference out;
  const DerivedFact* df = closure.find(h);
  if (!df) return out;  // closed world: underivable means probability 0
  if (df->depth == 0) {
    out.probability = df->probability;
    return out;
  }
  out.chain = minimal_proof_chain(closure, h);

  // each rule is one shared switch, so it contributes its probability once
  // even if it fires at several steps; given leaves contribute theirs once
  std::set<std::size_t> rules_used;
  std::set<GroundAtom> leaves;
  for (const auto& step : out.chain) {
    rules_used.insert(step.rule_index);
    for (const auto& p : step.premises) {
      if (closure.derived.at(p).depth == 0) leaves.insert(p);
    }
  }
  double prob = 1.0;
  for (const std::size_t ri : rules_used) prob *= t.rules[ri].probability;
  for (const auto& leaf : leaves) prob *= closure.derived.at(leaf).probability;
  out.probability = prob;
  return out;
}

double infer_exact(const Theory& t, const Hypothesis& h, int max_switches) {
  const Grounding g = ground(t);

  // certain rules and facts are folded in; only genuinely random ones become
  // enumeration switches
  std::vector<std::pair<std::size_t, double>> rule_switches;  // (rule index, p)
  for (std::size_t ri = 0; ri < t.rules.size(); ++ri) {
    const double p = t.rules[ri].probability;
    if (p > 0.0 && p < 1.0) rule_switches.emplace_back(ri, p);
  }
  std::vector<std::pair<int, double>> fact_switches;  // (atom id, p)
  std::vector<int> certain_facts;
  for (const auto& [id, p] : g.facts) {
    if (p >= 1.0) {
      certain_facts.push_back(id);
    } else if (p > 0.0) {
      fact_switches.emplace_back(id, p);
    }
  }

  const std::size_t k = rule_switches.size() + fact_switches.size();
  if (k > static_cast<std::size_t>(max_switches)) {
    throw std::runtime_error("world enumeration refused: " + std::to_string(t.rules.size()) +
                             " rules (" + std::to_string(k) + " random switches) exceed the cap of " +
                             std::to_string(max_switches));
  }

  const int target = g.lookup(h);
  if (target < 0) return 0.0;

  // group ground instances by rule so a switch activates all of them at once
  std::vector<std::vector<const GroundRule*>> by_rule(t.rules.size());
  for (const auto& gr : g.rules) by_rule[gr.rule_index].push_back(&gr);

  std::vector<const GroundRule*> certain_rules;
  for (std::size_t ri = 0; ri < t.rules.size(); ++ri) {
    if (t.rules[ri].probability >= 1.0) {
      certain_rules.insert(certain_rules.end(), by_rule[ri].begin(), by_rule[ri].end());
    }
  }

  double total = 0.0;
  const std::uint64_t worlds = 1ULL << k;
  for (std::uint64_t mask = 0; mask < worlds; ++mask) {
    double weight = 1.0;
    std::vector<char> known(g.atoms.size(), 0);
    for (const int id : certain_facts) known[id] = 1;

    std::vector<const GroundRule*> active = certain_rules;
    std::size_t bit = 0;
    for (const auto& [ri, p] : rule_switches) {
      if (mask & (1ULL << bit)) {
        weight *= p;
        active.insert(active.end(), by_rule[ri].begin(), by_rule[ri].end());
      } else {
        weight *= 1.0 - p;
      }
      ++bit;
    }
    for (const auto& [id, p] : fact_switches) {
      if (mask & (1ULL << bit)) {
        weight *= p;
        known[id] = 1;
      } else {
        weight *= 1.0 - p;
      }
      ++bit;
    }

    if (known[target]) {
      total += weight;
      continue;
    }
    const auto result = chain(std::move(known), active, target);
    if (result[target]) total += weight;
  }
  // the exact value lies in [0,1]; the sum can drift past it by rounding
  return std::clamp(total, 0.0, 1.0);
}

std::optional<int> depth(const Theory& t, const Hypothesis& h) {
  return derive_closure(t).depth_of(h);
}

}  // namespace rulebench
