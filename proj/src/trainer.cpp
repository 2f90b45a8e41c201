#include "rulebench/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "rulebench/rng.hpp"

namespace rulebench {

namespace {

constexpr double kCeEpsilon = 1e-7;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

TaskLossKind task_loss_kind_from_string(std::string_view s) {
  if (s == "ce") return TaskLossKind::CrossEntropy;
  if (s == "mse") return TaskLossKind::SquaredError;
  throw std::invalid_argument("unknown task loss kind: '" + std::string(s) + "' (want ce|mse)");
}

std::string to_string(TaskLossKind kind) {
  return kind == TaskLossKind::CrossEntropy ? "ce" : "mse";
}

double task_loss(double pred, double gold, TaskLossKind kind) {
  if (kind == TaskLossKind::SquaredError) {
    const double d = pred - gold;
    return d * d;
  }
  const double p = std::clamp(pred, kCeEpsilon, 1.0 - kCeEpsilon);
  return -(gold * std::log(p) + (1.0 - gold) * std::log(1.0 - p));
}

double task_loss_dpred(double pred, double gold, TaskLossKind kind) {
  if (kind == TaskLossKind::SquaredError) return 2.0 * (pred - gold);
  const double p = std::clamp(pred, kCeEpsilon, 1.0 - kCeEpsilon);
  return (p - gold) / (p * (1.0 - p));
}

double dual_loss(double task, std::span<const double> violations,
                std::span<const double> lambdas) {
  if (violations.size() != lambdas.size()) {
    throw std::invalid_argument("violation/multiplier lists are misaligned");
  }
  double loss = task;
  for (std::size_t i = 0; i < violations.size(); ++i) loss += lambdas[i] * violations[i];
  return loss;
}

// ---------------------------------------------------------------------------
// FeatureMap

std::size_t FeatureMap::dimension() const {
  const std::size_t p = vocabulary.predicates().size();
  const std::size_t e = vocabulary.entities.size();
  return 3 * p + 2 * p * p + 2 * e + 2;
}

std::vector<double> FeatureMap::encode(const Theory& theory, const GroundAtom& query) const {
  const auto preds = vocabulary.predicates();
  const std::size_t p = preds.size();
  const std::size_t e = vocabulary.entities.size();

  std::unordered_map<std::string, std::size_t> pred_index;
  for (std::size_t i = 0; i < p; ++i) pred_index.emplace(preds[i].name, i);
  std::unordered_map<std::string, std::size_t> entity_index;
  for (std::size_t i = 0; i < e; ++i) entity_index.emplace(vocabulary.entities[i], i);

  const auto pred_of = [&](const Predicate& pr) {
    const auto it = pred_index.find(pr.name);
    if (it == pred_index.end()) {
      throw std::invalid_argument("predicate '" + pr.name + "' not covered by the feature map");
    }
    return it->second;
  };

  std::vector<double> x(dimension(), 0.0);
  const std::size_t fact_counts = 0;
  const std::size_t fact_touch = p;
  const std::size_t rule_prob = 2 * p;
  const std::size_t rule_count = 2 * p + p * p;
  const std::size_t query_pred = 2 * p + 2 * p * p;
  const std::size_t query_ent = query_pred + p;
  const std::size_t flags = query_ent + 2 * e;

  bool query_given = false;
  for (const auto& f : theory.facts) {
    const std::size_t i = pred_of(f.atom.predicate);
    x[fact_counts + i] += 0.25;
    for (const auto& arg : f.atom.args) {
      if (std::find(query.args.begin(), query.args.end(), arg) != query.args.end()) {
        x[fact_touch + i] = 1.0;
        break;
      }
    }
    if (f.atom == query) query_given = true;
  }

  const bool rules_present = include_rule_features && !theory.rules.empty();
  if (rules_present) {
    for (const auto& r : theory.rules) {
      const std::size_t cj = pred_of(r.conclusion.predicate);
      for (const auto& premise : r.premises) {
        const std::size_t pi = pred_of(premise.predicate);
        x[rule_prob + pi * p + cj] += r.probability;
        x[rule_count + pi * p + cj] += 0.25;
      }
    }
  }

  x[query_pred + pred_of(query.predicate)] = 1.0;
  for (std::size_t k = 0; k < query.args.size() && k < 2; ++k) {
    const auto it = entity_index.find(query.args[k]);
    if (it != entity_index.end()) x[query_ent + k * e + it->second] = 1.0;
  }
  x[flags] = query_given ? 1.0 : 0.0;
  x[flags + 1] = rules_present ? 1.0 : 0.0;
  return x;
}

// ---------------------------------------------------------------------------
// Predictor

namespace {

std::vector<std::size_t> layer_sizes(std::size_t input_dim, const std::vector<int>& hidden) {
  std::vector<std::size_t> sizes{input_dim};
  for (const int h : hidden) {
    if (h <= 0) throw std::invalid_argument("hidden layer sizes must be positive");
    sizes.push_back(static_cast<std::size_t>(h));
  }
  sizes.push_back(1);
  return sizes;
}

}  // namespace

Predictor::Predictor(std::size_t input_dim, std::vector<int> hidden_sizes, std::uint64_t seed)
    : input_dim_(input_dim), hidden_(std::move(hidden_sizes)) {
  const auto sizes = layer_sizes(input_dim_, hidden_);
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) count += sizes[l] * sizes[l + 1] + sizes[l + 1];
  params_.assign(count, 0.0);

  // hidden layers get scaled random weights; the head stays zero so the
  // initial output is exactly 0.5
  Rng rng(seed);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const bool is_head = l + 2 == sizes.size();
    if (!is_head) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(in));
      for (std::size_t i = 0; i < in * out; ++i) params_[offset + i] = rng.gaussian(0.0, scale);
    }
    offset += in * out + out;
  }
}

double Predictor::forward(std::span<const double> x) const {
  std::vector<std::vector<double>> acts;
  return forward_cached(x, acts);
}

double Predictor::forward_cached(std::span<const double> x,
                                 std::vector<std::vector<double>>& acts) const {
  if (x.size() != input_dim_) throw std::invalid_argument("feature vector has the wrong size");
  const auto sizes = layer_sizes(input_dim_, hidden_);
  acts.clear();

  std::vector<double> cur(x.begin(), x.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const bool is_head = l + 2 == sizes.size();
    std::vector<double> next(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double z = params_[offset + in * out + o];  // bias
      const double* w = &params_[offset + o * in];
      for (std::size_t i = 0; i < in; ++i) z += w[i] * cur[i];
      next[o] = is_head ? sigmoid(z) : std::tanh(z);
    }
    acts.push_back(next);
    cur = std::move(next);
    offset += in * out + out;
  }
  return cur[0];
}

void Predictor::backward(std::span<const double> x, const std::vector<std::vector<double>>& acts,
                         double dloss_dpred, std::span<double> grad) const {
  const auto sizes = layer_sizes(input_dim_, hidden_);
  const std::size_t layers = sizes.size() - 1;

  std::vector<std::size_t> offsets(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += sizes[l] * sizes[l + 1] + sizes[l + 1];
  }

  // delta at the sigmoid head: dloss/dz = dloss/dpred * p (1 - p)
  const double p = acts.back()[0];
  std::vector<double> delta{dloss_dpred * p * (1.0 - p)};

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const double* input = l == 0 ? x.data() : acts[l - 1].data();
    const std::size_t base = offsets[l];

    std::vector<double> prev_delta(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      double* g = &grad[base + o * in];
      const double* w = &params_[base + o * in];
      for (std::size_t i = 0; i < in; ++i) {
        g[i] += d * input[i];
        prev_delta[i] += d * w[i];
      }
      grad[base + in * out + o] += d;  // bias
    }
    if (l > 0) {
      // chain through the tanh of the previous layer
      for (std::size_t i = 0; i < in; ++i) {
        const double a = acts[l - 1][i];
        prev_delta[i] *= 1.0 - a * a;
      }
      delta = std::move(prev_delta);
    }
  }
}

// ---------------------------------------------------------------------------
// TrainingProblem

TrainingProblem::TrainingProblem(const FeatureMap& fmap, const std::vector<Instance>& dataset,
                                 const std::vector<AugmentedInstance>& augmented) {
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& inst : dataset) by_id.emplace(inst.id, &inst);

  examples_.reserve(dataset.size());
  for (const auto& inst : dataset) {
    examples_.push_back({fmap.encode(inst.theory, inst.hypothesis), inst.gold_probability});
  }

  for (const auto& aug : augmented) {
    const auto it = by_id.find(aug.base_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("augmented instance references unknown id '" + aug.base_id +
                                  "'");
    }
    Group g;
    g.flat_offset = flat_constraints_;
    for (const auto& q : aug.queries) {
      g.query_features.push_back(fmap.encode(it->second->theory, q.atom));
    }
    g.constraints = aug.constraints;
    flat_constraints_ += aug.constraints.size();
    groups_.push_back(std::move(g));
  }
}

TrainingProblem::Objective TrainingProblem::objective_with_grad(
    const Predictor& p, TaskLossKind kind, std::span<const std::size_t> example_indices,
    std::span<const std::size_t> augmented_indices, const LambdaState& lam,
    std::vector<double>& grad) const {
  grad.assign(p.parameter_count(), 0.0);
  Objective obj;

  if (!example_indices.empty()) {
    const double inv = 1.0 / static_cast<double>(example_indices.size());
    std::vector<std::vector<double>> acts;
    for (const std::size_t idx : example_indices) {
      const Example& ex = examples_.at(idx);
      const double pred = p.forward_cached(ex.features, acts);
      obj.task += task_loss(pred, ex.gold, kind) * inv;
      p.backward(ex.features, acts, task_loss_dpred(pred, ex.gold, kind) * inv, grad);
    }
  }
  obj.total = obj.task;

  std::vector<std::vector<std::vector<double>>> query_acts;
  for (const std::size_t gi : augmented_indices) {
    const Group& g = groups_.at(gi);
    const std::size_t q = g.query_features.size();
    query_acts.assign(q, {});
    std::vector<double> preds(q, 0.0);
    for (std::size_t k = 0; k < q; ++k) {
      preds[k] = p.forward_cached(g.query_features[k], query_acts[k]);
    }
    std::vector<double> dpred(q, 0.0);
    for (std::size_t c = 0; c < g.constraints.size(); ++c) {
      const double lambda = lam.lambdas.at(g.flat_offset + c);
      obj.total += lambda * constraint_violation(preds, g.constraints[c]);
      if (lambda != 0.0) add_violation_gradient(preds, g.constraints[c], lambda, dpred);
    }
    for (std::size_t k = 0; k < q; ++k) {
      if (dpred[k] != 0.0) p.backward(g.query_features[k], query_acts[k], dpred[k], grad);
    }
  }
  return obj;
}

TrainingProblem::Objective TrainingProblem::objective(
    const Predictor& p, TaskLossKind kind, std::span<const std::size_t> example_indices,
    std::span<const std::size_t> augmented_indices, const LambdaState& lam) const {
  Objective obj;
  if (!example_indices.empty()) {
    const double inv = 1.0 / static_cast<double>(example_indices.size());
    for (const std::size_t idx : example_indices) {
      const Example& ex = examples_.at(idx);
      obj.task += task_loss(p.forward(ex.features), ex.gold, kind) * inv;
    }
  }
  obj.total = obj.task;
  for (const std::size_t gi : augmented_indices) {
    const Group& g = groups_.at(gi);
    std::vector<double> preds(g.query_features.size(), 0.0);
    for (std::size_t k = 0; k < preds.size(); ++k) preds[k] = p.forward(g.query_features[k]);
    for (std::size_t c = 0; c < g.constraints.size(); ++c) {
      obj.total += lam.lambdas.at(g.flat_offset + c) * constraint_violation(preds, g.constraints[c]);
    }
  }
  return obj;
}

std::vector<double> TrainingProblem::violations(const Predictor& p) const {
  std::vector<double> out(flat_constraints_, 0.0);
  for (const Group& g : groups_) {
    std::vector<double> preds(g.query_features.size(), 0.0);
    for (std::size_t k = 0; k < preds.size(); ++k) preds[k] = p.forward(g.query_features[k]);
    for (std::size_t c = 0; c < g.constraints.size(); ++c) {
      out[g.flat_offset + c] = constraint_violation(preds, g.constraints[c]);
    }
  }
  return out;
}

double TrainingProblem::mean_task_loss(const Predictor& p, TaskLossKind kind) const {
  if (examples_.empty()) return 0.0;
  double sum = 0.0;
  for (const Example& ex : examples_) sum += task_loss(p.forward(ex.features), ex.gold, kind);
  return sum / static_cast<double>(examples_.size());
}

// ---------------------------------------------------------------------------
// Training loop

void TrainConfig::validate() const {
  if (warmup_epochs < 0 || total_epochs < 0) {
    throw std::invalid_argument("epoch counts must be >= 0");
  }
  if (warmup_epochs > total_epochs) {
    throw std::invalid_argument("warmup_epochs must not exceed total_epochs");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(alpha0 >= 0.001 && alpha0 <= 1.0)) {
    throw std::invalid_argument("alpha0 must lie in [0.001, 1.0]");
  }
  if (!(alpha_decay > 0.0 && alpha_decay <= 1.0)) {
    throw std::invalid_argument("alpha_decay must lie in (0, 1]");
  }
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be > 0");
  if (constraint_batch < 0) throw std::invalid_argument("constraint_batch must be >= 0");
  if (!(violation_threshold >= 0.0)) {
    throw std::invalid_argument("violation_threshold must be >= 0");
  }
}

void update_lambdas(LambdaState& state, std::span<const double> violations, double threshold,
                    double decay) {
  if (violations.size() != state.lambdas.size()) {
    throw std::invalid_argument("violation/multiplier lists are misaligned");
  }
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (violations[i] >= threshold) state.lambdas[i] += state.alpha * violations[i];
  }
  state.alpha *= decay;
}

TrainResult train(const TrainConfig& cfg, const FeatureMap& fmap,
                  const std::vector<Instance>& dataset,
                  const std::vector<AugmentedInstance>& augmented) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("training dataset is empty");

  const TrainingProblem problem(fmap, dataset, augmented);
  const Rng base(cfg.seed);
  Predictor predictor(fmap.dimension(), cfg.hidden_sizes, base.split(0).next_u64());
  Rng shuffle_rng = base.split(1);
  Rng constraint_rng = base.split(2);

  LambdaState lam{std::vector<double>(problem.constraint_count(), 0.0), cfg.alpha0};

  TrainReport report;
  report.parameter_count = predictor.parameter_count();
  report.constraint_count = problem.constraint_count();

  std::vector<std::size_t> order(problem.example_count());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;

  const std::size_t m = static_cast<std::size_t>(cfg.effective_constraint_batch());

  for (int epoch = 0; epoch < cfg.total_epochs; ++epoch) {
    const bool constrained = epoch >= cfg.warmup_epochs && problem.constraint_count() > 0;
    shuffle_rng.shuffle(order);

    double task_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);

      std::vector<std::size_t> aug_sel;
      if (constrained) {
        for (std::size_t i = 0; i < m; ++i) {
          aug_sel.push_back(constraint_rng.below(problem.augmented_count()));
        }
      }

      const auto obj =
          problem.objective_with_grad(predictor, cfg.loss, batch, aug_sel, lam, grad);
      if (!std::isfinite(obj.total)) {
        throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batches));
      }
      auto& params = predictor.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= cfg.learning_rate * grad[i];
      }
      task_sum += obj.task;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.constrained = constrained;
    stats.mean_task_loss = batches ? task_sum / static_cast<double>(batches) : 0.0;
    const std::vector<double> viols = problem.violations(predictor);
    if (!viols.empty()) {
      stats.mean_violation =
          std::accumulate(viols.begin(), viols.end(), 0.0) / static_cast<double>(viols.size());
      std::size_t ok = 0;
      for (const double v : viols) {
        if (v < 0.10) ++ok;
      }
      stats.cs10 = 100.0 * static_cast<double>(ok) / static_cast<double>(viols.size());
    }
    if (constrained) update_lambdas(lam, viols, cfg.violation_threshold, cfg.alpha_decay);
    stats.alpha = lam.alpha;
    stats.lambda_sum = std::accumulate(lam.lambdas.begin(), lam.lambdas.end(), 0.0);
    stats.lambda_max =
        lam.lambdas.empty() ? 0.0 : *std::max_element(lam.lambdas.begin(), lam.lambdas.end());
    report.epochs.push_back(stats);
    report.lambda_history.push_back(lam.lambdas);
  }

  report.final_task_loss = problem.mean_task_loss(predictor, cfg.loss);
  const std::vector<double> final_viols = problem.violations(predictor);
  if (!final_viols.empty()) {
    report.final_mean_violation =
        std::accumulate(final_viols.begin(), final_viols.end(), 0.0) /
        static_cast<double>(final_viols.size());
    std::size_t ok = 0;
    for (const double v : final_viols) {
      if (v < 0.10) ++ok;
    }
    report.final_cs10 = 100.0 * static_cast<double>(ok) / static_cast<double>(final_viols.size());
  }
  return {std::move(predictor), fmap, std::move(report)};
}

double predict(const Predictor& p, const FeatureMap& fmap, const Instance& inst,
               const GroundAtom& query) {
  return p.forward(fmap.encode(inst.theory, query));
}

std::map<std::string, double> predict_all(const Predictor& p, const FeatureMap& fmap,
                                          const std::vector<Instance>& dataset,
                                          const std::vector<AugmentedInstance>& augmented) {
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& inst : dataset) by_id.emplace(inst.id, &inst);

  std::map<std::string, double> out;
  for (const auto& inst : dataset) {
    out[inst.id] = predict(p, fmap, inst, inst.hypothesis);
  }
  for (const auto& aug : augmented) {
    const auto it = by_id.find(aug.base_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("augmented instance references unknown id '" + aug.base_id +
                                  "'");
    }
    for (std::size_t k = 0; k < aug.queries.size(); ++k) {
      out[aug.base_id + "#" + std::to_string(k)] =
          predict(p, fmap, *it->second, aug.queries[k].atom);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
using nlohmann::json;
using nlohmann::ordered_json;
}  // namespace

void save_predictor(const std::string& path, const Predictor& p, const FeatureMap& fmap) {
  ordered_json j;
  j["format"] = "rulebench-predictor";
  j["version"] = 1;
  ordered_json vocab;
  vocab["entities"] = fmap.vocabulary.entities;
  vocab["attributes"] = fmap.vocabulary.attributes;
  ordered_json rels = ordered_json::array();
  for (const auto& r : fmap.vocabulary.relations) rels.push_back({r.name, r.article});
  vocab["relations"] = rels;
  j["vocabulary"] = vocab;
  j["include_rule_features"] = fmap.include_rule_features;
  j["input_dim"] = p.input_dim();
  j["hidden_sizes"] = p.hidden_sizes();
  j["parameters"] = p.parameters();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictor file: " + path);
  out << j.dump() << "\n";
}

std::pair<Predictor, FeatureMap> load_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictor file: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != "rulebench-predictor" || j.value("version", 0) != 1) {
    throw std::runtime_error("unrecognized predictor file format: " + path);
  }
  FeatureMap fmap;
  const auto& vocab = j.at("vocabulary");
  fmap.vocabulary.entities = vocab.at("entities").get<std::vector<std::string>>();
  fmap.vocabulary.attributes = vocab.at("attributes").get<std::vector<std::string>>();
  for (const auto& r : vocab.at("relations")) {
    fmap.vocabulary.relations.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>()});
  }
  fmap.include_rule_features = j.at("include_rule_features").get<bool>();

  Predictor p(j.at("input_dim").get<std::size_t>(), j.at("hidden_sizes").get<std::vector<int>>(),
              0);
  const auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != p.parameter_count()) {
    throw std::runtime_error("predictor file parameter count mismatch");
  }
  p.parameters() = params;
  if (p.input_dim() != fmap.dimension()) {
    throw std::runtime_error("predictor input dimension does not match its vocabulary");
  }
  return {std::move(p), std::move(fmap)};
}

std::string report_to_json_text(const TrainReport& report) {
  ordered_json j;
  j["parameter_count"] = report.parameter_count;
  j["constraint_count"] = report.constraint_count;
  j["final_task_loss"] = report.final_task_loss;
  j["final_mean_violation"] = report.final_mean_violation;
  j["final_cs10"] = report.final_cs10;
  ordered_json epochs = ordered_json::array();
  for (const auto& e : report.epochs) {
    ordered_json row;
    row["epoch"] = e.epoch;
    row["constrained"] = e.constrained;
    row["mean_task_loss"] = e.mean_task_loss;
    row["mean_violation"] = e.mean_violation;
    row["cs10"] = e.cs10;
    row["alpha"] = e.alpha;
    row["lambda_sum"] = e.lambda_sum;
    row["lambda_max"] = e.lambda_max;
    epochs.push_back(row);
  }
  j["epochs"] = epochs;
  return j.dump(2);
}

}  // namespace rulebench
