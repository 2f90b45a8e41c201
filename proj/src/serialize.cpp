#include "rulebench/serialize.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rulebench/textio.hpp"

namespace rulebench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json atom_list(const std::vector<GroundAtom>& atoms) {
  ordered_json out = ordered_json::array();
  for (const auto& a : atoms) out.push_back(a.to_string());
  return out;
}

std::vector<std::string> entities_mentioned(const Theory& t) {
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

}  // namespace

std::string instance_to_json_line(const Instance& inst) {
  ordered_json j;
  j["id"] = inst.id;
  j["context"] = inst.context;
  j["question"] = inst.question;

  ordered_json facts = ordered_json::array();
  for (std::size_t i = 0; i < inst.theory.facts.size(); ++i) {
    const auto& f = inst.theory.facts[i];
    ordered_json fj;
    fj["text"] = i < inst.fact_texts.size() ? inst.fact_texts[i] : render_fact(f);
    fj["atom"] = f.atom.to_string();
    fj["prob"] = f.probability;
    facts.push_back(fj);
  }
  j["facts"] = facts;

  ordered_json rules = ordered_json::array();
  for (std::size_t i = 0; i < inst.theory.rules.size(); ++i) {
    const auto& r = inst.theory.rules[i];
    ordered_json rj;
    rj["text"] = i < inst.rule_texts.size() ? inst.rule_texts[i] : "";
    ordered_json premises = ordered_json::array();
    for (const auto& p : r.premises) premises.push_back(p.to_string());
    rj["premises"] = premises;
    rj["conclusion"] = r.conclusion.to_string();
    rj["prob"] = r.probability;
    if (r.adverb) {
      rj["adverb"] = r.adverb->word;
    } else {
      rj["adverb"] = nullptr;
    }
    rules.push_back(rj);
  }
  j["rules"] = rules;

  j["gold_prob"] = inst.gold_probability;
  j["gold_label"] = inst.gold_label;
  j["depth"] = inst.depth;
  j["kind"] = to_string(inst.kind);

  ordered_json proof = ordered_json::array();
  for (const auto& step : inst.proof) {
    ordered_json sj;
    sj["rule"] = step.rule_index;
    sj["premises"] = atom_list(step.premises);
    sj["conclusion"] = step.conclusion.to_string();
    sj["rule_prob"] = step.rule_probability;
    sj["prob"] = step.inferred_probability;
    proof.push_back(sj);
  }
  j["proof"] = proof;
  return j.dump();
}

Instance instance_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  Instance inst;
  inst.id = j.at("id").get<std::string>();
  inst.context = j.at("context").get<std::string>();
  inst.question = j.at("question").get<std::string>();

  for (const auto& fj : j.at("facts")) {
    inst.fact_texts.push_back(fj.at("text").get<std::string>());
    inst.theory.facts.emplace_back(GroundAtom::parse(fj.at("atom").get<std::string>()),
                                   fj.at("prob").get<double>());
  }
  for (const auto& rj : j.at("rules")) {
    inst.rule_texts.push_back(rj.at("text").get<std::string>());
    std::vector<RuleAtom> premises;
    for (const auto& p : rj.at("premises")) premises.push_back(RuleAtom::parse(p.get<std::string>()));
    RuleAtom conclusion = RuleAtom::parse(rj.at("conclusion").get<std::string>());
    const double prob = rj.at("prob").get<double>();
    std::optional<Adverb> adverb;
    if (rj.contains("adverb") && !rj.at("adverb").is_null()) {
      const std::string word = rj.at("adverb").get<std::string>();
      adverb = Adverb{word, probability_for_adverb(word)};
    }
    inst.theory.rules.emplace_back(std::move(premises), std::move(conclusion), prob,
                                   std::move(adverb));
  }
  inst.theory.entities = entities_mentioned(inst.theory);

  inst.hypothesis = parse_fact(inst.question).atom;
  inst.gold_probability = j.at("gold_prob").get<double>();
  inst.gold_label = j.at("gold_label").get<bool>();
  inst.depth = j.at("depth").get<int>();
  inst.kind = network_kind_from_string(j.at("kind").get<std::string>());

  for (const auto& sj : j.at("proof")) {
    ProofStep step;
    step.rule_index = sj.at("rule").get<std::size_t>();
    for (const auto& p : sj.at("premises")) step.premises.push_back(GroundAtom::parse(p.get<std::string>()));
    step.conclusion = GroundAtom::parse(sj.at("conclusion").get<std::string>());
    step.rule_probability = sj.at("rule_prob").get<double>();
    step.inferred_probability = sj.at("prob").get<double>();
    inst.proof.push_back(std::move(step));
  }
  return inst;
}

void write_instances_jsonl(const std::string& path, const std::vector<Instance>& instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (const auto& inst : instances) out << instance_to_json_line(inst) << "\n";
}

std::vector<Instance> read_instances_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<Instance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(instance_from_json_line(line));
  }
  return out;
}

std::string augmented_to_json_line(const AugmentedInstance& aug) {
  ordered_json j;
  j["base_id"] = aug.base_id;
  ordered_json queries = ordered_json::array();
  for (const auto& q : aug.queries) {
    ordered_json qj;
    qj["text"] = q.text;
    qj["gold_prob"] = q.gold_probability;
    qj["depth"] = q.depth;
    queries.push_back(qj);
  }
  j["queries"] = queries;
  ordered_json constraints = ordered_json::array();
  for (const auto& c : aug.constraints) {
    ordered_json cj;
    cj["premise_idxs"] = c.premise_indices;
    cj["pr"] = c.rule_probability;
    cj["conclusion_idx"] = c.conclusion_index;
    constraints.push_back(cj);
  }
  j["constraints"] = constraints;
  return j.dump();
}

AugmentedInstance augmented_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  AugmentedInstance aug;
  aug.base_id = j.at("base_id").get<std::string>();
  for (const auto& qj : j.at("queries")) {
    AugmentedQuery q;
    q.text = qj.at("text").get<std::string>();
    q.atom = parse_fact(q.text).atom;
    q.gold_probability = qj.at("gold_prob").get<double>();
    q.depth = qj.at("depth").get<int>();
    aug.queries.push_back(std::move(q));
  }
  for (const auto& cj : j.at("constraints")) {
    Constraint c;
    c.premise_indices = cj.at("premise_idxs").get<std::vector<std::size_t>>();
    c.rule_probability = cj.at("pr").get<double>();
    c.conclusion_index = cj.at("conclusion_idx").get<std::size_t>();
    aug.constraints.push_back(std::move(c));
  }
  return aug;
}

void write_augmented_jsonl(const std::string& path, const std::vector<AugmentedInstance>& augs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write augmented file: " + path);
  for (const auto& aug : augs) out << augmented_to_json_line(aug) << "\n";
}

std::vector<AugmentedInstance> read_augmented_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open augmented file: " + path);
  std::vector<AugmentedInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(augmented_from_json_line(line));
  }
  return out;
}

void write_predictions(const std::string& path, const std::map<std::string, double>& preds) {
  ordered_json j = ordered_json::object();
  for (const auto& [key, value] : preds) j[key] = value;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictions file: " + path);
  out << j.dump() << "\n";
}

std::map<std::string, double> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + path);
  json j;
  in >> j;
  std::map<std::string, double> out;
  for (const auto& [key, value] : j.items()) out[key] = value.get<double>();
  return out;
}

std::string report_to_json_text(const EvalReport& report) {
  ordered_json j;
  const auto stats = [](const DepthStats& s) {
    ordered_json out;
    out["depth"] = s.depth;
    out["count"] = s.count;
    out["ba"] = s.ba;
    out["ca25"] = s.ca25;
    out["ca10"] = s.ca10;
    out["ca1"] = s.ca1;
    return out;
  };
  ordered_json per_depth = ordered_json::array();
  for (const auto& s : report.per_depth) per_depth.push_back(stats(s));
  j["per_depth"] = per_depth;
  j["total"] = stats(report.total);
  j["constraint_count"] = report.constraint_count;
  j["cs25"] = report.cs25;
  j["cs10"] = report.cs10;
  j["cs1"] = report.cs1;
  return j.dump(2);
}

}  // namespace rulebench
