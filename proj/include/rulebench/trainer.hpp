#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rulebench/constraints.hpp"
#include "rulebench/instance.hpp"
#include "rulebench/textio.hpp"

namespace rulebench {

enum class TaskLossKind { CrossEntropy, SquaredError };

TaskLossKind task_loss_kind_from_string(std::string_view s);
std::string to_string(TaskLossKind kind);

// Soft-target cross-entropy or squared error; CE clamps the prediction to
// [1e-7, 1 - 1e-7].
double task_loss(double pred, double gold, TaskLossKind kind);
double task_loss_dpred(double pred, double gold, TaskLossKind kind);

// Dual objective: task + sum_i lambda_i * C_i. Lists must be aligned.
double dual_loss(double task, std::span<const double> violations,
                std::span<const double> lambdas);

// Deterministic encoding of (theory, query) into a fixed-length vector:
// per-predicate fact counts, facts touching the query's entities, per-rule
// (premise predicate, conclusion predicate, probability) cells, query
// predicate/entity indicators, a query-is-given flag, and a rules-present
// flag. The dimension is fixed by the vocabulary.
struct FeatureMap {
  Vocabulary vocabulary;
  bool include_rule_features = true;

  std::size_t dimension() const;
  std::vector<double> encode(const Theory& theory, const GroundAtom& query) const;
};

// Small feed-forward net: tanh hidden layers, linear head, sigmoid squash.
// The head starts at zero, so an untrained predictor outputs 0.5 everywhere.
class Predictor {
 public:
  Predictor(std::size_t input_dim, std::vector<int> hidden_sizes, std::uint64_t seed);

  double forward(std::span<const double> x) const;

  // forward pass that keeps per-layer activations for a later backward call
  double forward_cached(std::span<const double> x, std::vector<std::vector<double>>& acts) const;
  // accumulates dloss_dpred * dpred/dparam into grad (sized parameter_count())
  void backward(std::span<const double> x, const std::vector<std::vector<double>>& acts,
                double dloss_dpred, std::span<double> grad) const;

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  const std::vector<int>& hidden_sizes() const { return hidden_; }

 private:
  std::size_t input_dim_;
  std::vector<int> hidden_;
  std::vector<double> params_;  // per layer: row-major weights, then biases
};

struct TrainConfig {
  TaskLossKind loss = TaskLossKind::CrossEntropy;
  int warmup_epochs = 5;
  int total_epochs = 20;
  double learning_rate = 0.25;
  double alpha0 = 0.025;  // constraint learning rate (decays multiplicatively)
  double alpha_decay = 0.9;
  double violation_threshold = 0.01;  // minimum violation that grows a lambda
  int batch_size = 16;
  int constraint_batch = 0;  // m; 0 means batch_size
  std::vector<int> hidden_sizes = {64};
  std::uint64_t seed = 1;
  bool include_rule_features = true;

  int effective_constraint_batch() const {
    return constraint_batch > 0 ? constraint_batch : batch_size;
  }
  void validate() const;
};

// Lagrange multipliers (flat, one per constraint across the augmented set)
// and the decaying constraint learning rate.
struct LambdaState {
  std::vector<double> lambdas;
  double alpha = 0.1;
};

// lambda_i += alpha * C_i for every violation >= threshold, then
// alpha *= decay. Multipliers never decrease; alpha never increases.
void update_lambdas(LambdaState& state, std::span<const double> violations, double threshold,
                    double decay);

struct EpochStats {
  int epoch = 0;
  bool constrained = false;
  double mean_task_loss = 0.0;
  double mean_violation = 0.0;
  double cs10 = 0.0;
  double alpha = 0.0;
  double lambda_sum = 0.0;
  double lambda_max = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  // per-epoch multiplier snapshots (after the epoch's update); not serialized
  std::vector<std::vector<double>> lambda_history;
  std::size_t parameter_count = 0;
  std::size_t constraint_count = 0;
  double final_task_loss = 0.0;
  double final_mean_violation = 0.0;
  double final_cs10 = 0.0;
};

// Dataset and augmented constraints compiled against one feature map: feature
// vectors for every hypothesis and augmented query, plus a flat constraint
// index for the lambda vector.
class TrainingProblem {
 public:
  TrainingProblem(const FeatureMap& fmap, const std::vector<Instance>& dataset,
                  const std::vector<AugmentedInstance>& augmented);

  std::size_t example_count() const { return examples_.size(); }
  std::size_t augmented_count() const { return groups_.size(); }
  std::size_t constraint_count() const { return flat_constraints_; }

  struct Objective {
    double total = 0.0;
    double task = 0.0;
  };

  // Dual objective over the selected task examples (mean task loss) and the
  // selected augmented instances (sum of lambda-weighted violations).
  Objective objective(const Predictor& p, TaskLossKind kind,
                      std::span<const std::size_t> example_indices,
                      std::span<const std::size_t> augmented_indices,
                      const LambdaState& lam) const;
  Objective objective_with_grad(const Predictor& p, TaskLossKind kind,
                                std::span<const std::size_t> example_indices,
                                std::span<const std::size_t> augmented_indices,
                                const LambdaState& lam, std::vector<double>& grad) const;

  // violations of every constraint, in flat lambda order
  std::vector<double> violations(const Predictor& p) const;
  double mean_task_loss(const Predictor& p, TaskLossKind kind) const;

 private:
  struct Example {
    std::vector<double> features;
    double gold;
  };
  struct Group {  // one augmented instance
    std::vector<std::vector<double>> query_features;
    std::vector<Constraint> constraints;
    std::size_t flat_offset;
  };

  std::vector<Example> examples_;
  std::vector<Group> groups_;
  std::size_t flat_constraints_ = 0;
};

struct TrainResult {
  Predictor predictor;
  FeatureMap feature_map;
  TrainReport report;
};

// Warm-up epochs minimize the task loss alone; the remaining epochs minimize
// the dual objective with the multipliers updated once per epoch. Aborts on
// a non-finite loss, naming the offending batch. Deterministic per seed.
TrainResult train(const TrainConfig& cfg, const FeatureMap& fmap,
                  const std::vector<Instance>& dataset,
                  const std::vector<AugmentedInstance>& augmented);

// Pure forward pass; no constraints are consulted at inference time.
double predict(const Predictor& p, const FeatureMap& fmap, const Instance& inst,
               const GroundAtom& query);

// id -> prediction for every hypothesis, "id#k" for every augmented query
std::map<std::string, double> predict_all(const Predictor& p, const FeatureMap& fmap,
                                          const std::vector<Instance>& dataset,
                                          const std::vector<AugmentedInstance>& augmented);

void save_predictor(const std::string& path, const Predictor& p, const FeatureMap& fmap);
std::pair<Predictor, FeatureMap> load_predictor(const std::string& path);

std::string report_to_json_text(const TrainReport& report);

}  // namespace rulebench
