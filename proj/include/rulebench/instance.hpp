#pragma once

#include <string>
#include <vector>

#include "rulebench/core.hpp"
#include "rulebench/inference.hpp"

namespace rulebench {

// One dataset row: a theory with its rendered surface forms, the hypothesis,
// and the oracle outputs. gold_label is gold_probability > 0.5; underivable
// hypotheses carry depth 0 (their answer is read off directly, no rule use).
struct Instance {
  std::string id;
  Theory theory;
  std::vector<std::string> fact_texts;  // parallel to theory.facts
  std::vector<std::string> rule_texts;  // parallel to theory.rules
  std::string context;
  Hypothesis hypothesis;
  std::string question;
  double gold_probability = 0.0;
  bool gold_label = false;
  int depth = 0;
  NetworkKind kind = NetworkKind::Simple;
  std::vector<ProofStep> proof;

  bool operator==(const Instance&) const = default;
};

}  // namespace rulebench
