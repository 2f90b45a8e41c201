#pragma once

#include <map>
#include <string>
#include <vector>

#include "rulebench/constraints.hpp"
#include "rulebench/instance.hpp"
#include "rulebench/metrics.hpp"

namespace rulebench {

std::string instance_to_json_line(const Instance& inst);
Instance instance_from_json_line(const std::string& line);

void write_instances_jsonl(const std::string& path, const std::vector<Instance>& instances);
std::vector<Instance> read_instances_jsonl(const std::string& path);

std::string augmented_to_json_line(const AugmentedInstance& aug);
AugmentedInstance augmented_from_json_line(const std::string& line);

void write_augmented_jsonl(const std::string& path, const std::vector<AugmentedInstance>& augs);
std::vector<AugmentedInstance> read_augmented_jsonl(const std::string& path);

// predictions: one flat JSON object {"<key>": probability, ...}
void write_predictions(const std::string& path, const std::map<std::string, double>& preds);
std::map<std::string, double> read_predictions(const std::string& path);

std::string report_to_json_text(const EvalReport& report);

}  // namespace rulebench
