#include "rulebench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace rulebench {

bool binary_accuracy(double pred, double gold) {
  return (pred >= 0.5) == (gold >= 0.5);
}

bool ca_accuracy(double pred, double gold, double window) {
  return std::abs(pred - gold) <= window;
}

double cs_rate(std::span<const double> violations, double threshold) {
  if (violations.empty()) return 0.0;
  std::size_t satisfied = 0;
  for (const double v : violations) {
    if (v < threshold) ++satisfied;
  }
  return 100.0 * static_cast<double>(satisfied) / static_cast<double>(violations.size());
}

double cs_rate(std::span<const double> preds, std::span<const Constraint> constraints,
               double threshold) {
  std::vector<double> violations;
  violations.reserve(constraints.size());
  for (const auto& c : constraints) violations.push_back(constraint_violation(preds, c));
  return cs_rate(violations, threshold);
}

std::string query_prediction_key(const std::string& base_id, std::size_t query_index) {
  return base_id + "#" + std::to_string(query_index);
}

EvalReport evaluate(const std::map<std::string, double>& predictions,
                    const std::vector<Instance>& dataset,
                    const std::vector<AugmentedInstance>& augmented) {
  std::vector<std::string> missing;
  const auto lookup = [&](const std::string& key) {
    const auto it = predictions.find(key);
    if (it == predictions.end()) {
      missing.push_back(key);
      return 0.0;
    }
    return it->second;
  };

  struct Tally {
    int count = 0;
    int ba = 0, ca25 = 0, ca10 = 0, ca1 = 0;
  };
  std::map<int, Tally> cells;
  Tally overall;
  for (const auto& inst : dataset) {
    const double pred = lookup(inst.id);
    for (Tally* t : {&cells[inst.depth], &overall}) {
      t->count += 1;
      t->ba += binary_accuracy(pred, inst.gold_probability);
      t->ca25 += ca_accuracy(pred, inst.gold_probability, 0.25);
      t->ca10 += ca_accuracy(pred, inst.gold_probability, 0.10);
      t->ca1 += ca_accuracy(pred, inst.gold_probability, 0.01);
    }
  }

  std::vector<double> violations;
  for (const auto& aug : augmented) {
    std::vector<double> preds(aug.queries.size(), 0.0);
    for (std::size_t k = 0; k < aug.queries.size(); ++k) {
      preds[k] = lookup(query_prediction_key(aug.base_id, k));
    }
    if (!missing.empty()) continue;
    for (const auto& c : aug.constraints) {
      violations.push_back(constraint_violation(preds, c));
    }
  }

  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string msg = "predictions missing for " + std::to_string(missing.size()) + " key(s):";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ...";
    throw std::invalid_argument(msg);
  }

  const auto to_stats = [](int depth, const Tally& t) {
    DepthStats s;
    s.depth = depth;
    s.count = t.count;
    if (t.count > 0) {
      const double n = t.count;
      s.ba = 100.0 * t.ba / n;
      s.ca25 = 100.0 * t.ca25 / n;
      s.ca10 = 100.0 * t.ca10 / n;
      s.ca1 = 100.0 * t.ca1 / n;
    }
    return s;
  };

  EvalReport report;
  for (const auto& [d, tally] : cells) report.per_depth.push_back(to_stats(d, tally));
  report.total = to_stats(-1, overall);
  report.constraint_count = static_cast<int>(violations.size());
  report.cs25 = cs_rate(violations, 0.25);
  report.cs10 = cs_rate(violations, 0.10);
  report.cs1 = cs_rate(violations, 0.01);
  return report;
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream out;
  char line[128];
  out << "depth    count      BA    CA25    CA10     CA1\n";
  const auto row = [&](const DepthStats& s, const std::string& label) {
    std::snprintf(line, sizeof(line), "%-8s %5d  %6.2f  %6.2f  %6.2f  %6.2f\n", label.c_str(),
                  s.count, s.ba, s.ca25, s.ca10, s.ca1);
    out << line;
  };
  for (const auto& s : report.per_depth) row(s, "D" + std::to_string(s.depth));
  row(report.total, "Total");
  std::snprintf(line, sizeof(line), "constraints %d  CS25 %.2f  CS10 %.2f  CS1 %.2f\n",
                report.constraint_count, report.cs25, report.cs10, report.cs1);
  out << line;
  return out.str();
}

}  // namespace rulebench
