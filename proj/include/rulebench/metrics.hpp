#pragma once

#include <map>
#include <string>
#include <vector>

#include "rulebench/constraints.hpp"
#include "rulebench/instance.hpp"

namespace rulebench {

// Correct iff pred and gold fall on the same side of 50%; exactly 0.5 counts
// as the True side for both.
bool binary_accuracy(double pred, double gold);

// Correct iff |pred - gold| <= window (closed window).
bool ca_accuracy(double pred, double gold, double window);

// Percentage of constraints whose violation is strictly below the threshold.
double cs_rate(std::span<const double> violations, double threshold);
double cs_rate(std::span<const double> preds, std::span<const Constraint> constraints,
               double threshold);

struct DepthStats {
  int depth = 0;  // -1 for the count-weighted total
  int count = 0;
  double ba = 0.0;  // percentages
  double ca25 = 0.0;
  double ca10 = 0.0;
  double ca1 = 0.0;
};

struct EvalReport {
  std::vector<DepthStats> per_depth;
  DepthStats total;
  int constraint_count = 0;
  double cs25 = 0.0;
  double cs10 = 0.0;
  double cs1 = 0.0;
};

// Predictions are keyed by instance id for hypotheses and by "<base_id>#<k>"
// for the k-th query of an augmented instance. Missing keys are reported
// together in one error.
EvalReport evaluate(const std::map<std::string, double>& predictions,
                    const std::vector<Instance>& dataset,
                    const std::vector<AugmentedInstance>& augmented);

// Plain-text per-depth table, rates to two decimals.
std::string format_report_table(const EvalReport& report);

std::string query_prediction_key(const std::string& base_id, std::size_t query_index);

}  // namespace rulebench
