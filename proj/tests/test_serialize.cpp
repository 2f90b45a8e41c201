#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "rulebench/constraints.hpp"
#include "rulebench/serialize.hpp"
#include "helpers.hpp"

using namespace rulebench;
using rulebench::testing::attr;

namespace {

Instance sample_instance() {
  Instance inst;
  inst.id = "d2-t-0";
  inst.theory = testing::attribute_theory();
  for (const auto& f : inst.theory.facts) inst.fact_texts.push_back(render_fact(f));
  for (const auto& r : inst.theory.rules) {
    inst.rule_texts.push_back(render_rule(r, RuleTextStyle::Adverb));
  }
  inst.hypothesis = attr("Round", "Dave");
  inst.question = render_atom_text(inst.hypothesis);
  inst.context = render_context(inst.theory, true, 99);
  inst.gold_probability = infer_exact(inst.theory, inst.hypothesis);
  inst.gold_label = inst.gold_probability > 0.5;
  const Closure c = derive_closure(inst.theory);
  inst.depth = *c.depth_of(inst.hypothesis);
  inst.kind = classify(c, inst.hypothesis);
  inst.proof = minimal_proof_chain(c, inst.hypothesis);
  return inst;
}

}  // namespace

TEST_CASE("instance JSON line round-trips") {
  const Instance inst = sample_instance();
  const std::string line = instance_to_json_line(inst);
  const Instance back = instance_from_json_line(line);
  CHECK(back == inst);
  CHECK(instance_to_json_line(back) == line);

  // spot-check the wire fields
  CHECK(line.find("\"id\":\"d2-t-0\"") != std::string::npos);
  CHECK(line.find("\"gold_prob\":0.72") != std::string::npos);
  CHECK(line.find("\"kind\":\"simple\"") != std::string::npos);
  CHECK(line.find("\"adverb\":\"usually\"") != std::string::npos);
  CHECK(line.find("\"premises\":[\"Big(X)\"]") != std::string::npos);
}

TEST_CASE("instance files round-trip through JSONL") {
  const std::string path = "/tmp/rulebench_test_data.jsonl";
  const std::vector<Instance> instances = {sample_instance()};
  write_instances_jsonl(path, instances);
  const auto back = read_instances_jsonl(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == instances[0]);
  std::remove(path.c_str());
}

TEST_CASE("augmented JSON line round-trips") {
  const Instance inst = sample_instance();
  const AugmentedInstance aug = build_constraints(inst);
  const std::string line = augmented_to_json_line(aug);
  const AugmentedInstance back = augmented_from_json_line(line);
  CHECK(back == aug);
  CHECK(line.find("\"base_id\":\"d2-t-0\"") != std::string::npos);
  CHECK(line.find("\"premise_idxs\"") != std::string::npos);

  const std::string path = "/tmp/rulebench_test_aug.jsonl";
  write_augmented_jsonl(path, {aug});
  const auto file_back = read_augmented_jsonl(path);
  REQUIRE(file_back.size() == 1);
  CHECK(file_back[0] == aug);
  std::remove(path.c_str());
}

TEST_CASE("prediction files round-trip") {
  const std::string path = "/tmp/rulebench_test_preds.json";
  const std::map<std::string, double> preds{{"a", 0.25}, {"a#0", 1.0}, {"b", 0.5}};
  write_predictions(path, preds);
  CHECK(read_predictions(path) == preds);
  std::remove(path.c_str());
}

TEST_CASE("missing files raise errors") {
  CHECK_THROWS_AS(read_instances_jsonl("/tmp/nonexistent_rulebench.jsonl"), std::runtime_error);
  CHECK_THROWS_AS(read_augmented_jsonl("/tmp/nonexistent_rulebench.jsonl"), std::runtime_error);
  CHECK_THROWS_AS(read_predictions("/tmp/nonexistent_rulebench.json"), std::runtime_error);
}
