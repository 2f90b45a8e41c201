#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rulebench/instance.hpp"
#include "rulebench/rng.hpp"
#include "rulebench/textio.hpp"

namespace rulebench {

// AttributeChains: unary-predicate theories, fresh adverb probabilities per
// instance, adverb-style rule text. RelationPool: binary-predicate theories
// drawn against one shared rule pool with fixed probabilities, bare rule
// text (the probabilities stay implicit).
enum class GenMode { AttributeChains, RelationPool };

GenMode gen_mode_from_string(std::string_view s);
std::string to_string(GenMode mode);

struct DepthQuota {
  int true_count = 0;
  int false_count = 0;

  bool operator==(const DepthQuota&) const = default;
};

struct GenConfig {
  GenMode mode = GenMode::AttributeChains;
  Vocabulary vocabulary = Vocabulary::defaults();
  int max_depth = 3;
  std::vector<DepthQuota> depth_counts;  // index = depth; empty -> all zero
  double gaussian_mean = 0.55;           // probability sampler, defaults documented
  double gaussian_stddev = 0.30;         // in the README (the snap covers the table)
  RuleTextStyle style = RuleTextStyle::Adverb;
  bool include_rules_in_text = true;
  double complex_fraction = 0.20;  // share of complex instances per inference cell
  std::uint64_t seed = 0;
  int attempt_budget = 400000;  // rejection budget per instance

  void validate() const;

  std::string to_json_text() const;
  static GenConfig from_json_text(const std::string& text);
};

// Gaussian draw clipped to [0,1] and snapped to the nearest adverb; the
// returned probability is the adverb's table value.
std::pair<double, Adverb> sample_rule_probability(Rng& rng, double mean, double stddev);

// The shared relation-rule pool used by GenMode::RelationPool. Fixed
// probabilities, reused across every instance of a split.
std::vector<Rule> relation_rule_pool(const Vocabulary& vocab);

// Rejection-samples theories until the hypothesis sits at exactly
// target_depth with the gold probability on the requested side of 0.5 and
// the requested network kind. Throws when the attempt budget runs out.
Instance generate_instance(const GenConfig& cfg, int target_depth, bool target_label,
                           NetworkKind target_kind, Rng& rng);

Instance generate_instance(const GenConfig& cfg, int target_depth, bool target_label, Rng& rng);

// Per-depth/per-label counts follow cfg.depth_counts exactly; complex
// instances fill round(complex_fraction * cell) of every inference cell.
// Deterministic for a fixed config, cell by cell.
std::vector<Instance> generate_split(const GenConfig& cfg);

// The depth profile used by the workbench's default splits, scaled from the
// full-size corpus layout by the given divisor (counts rounded to nearest).
std::vector<DepthQuota> default_depth_profile(int divisor);

}  // namespace rulebench
