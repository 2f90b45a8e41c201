#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "rulebench/datagen.hpp"
#include "rulebench/trainer.hpp"
#include "helpers.hpp"

using namespace rulebench;
using rulebench::testing::attr;

namespace {

// tiny fixture: two chain instances over a three-attribute vocabulary
Vocabulary tiny_vocab() {
  Vocabulary v;
  v.entities = {"Dave", "Erin"};
  v.attributes = {"Big", "Green", "Round"};
  return v;
}

Instance chain_instance(const std::string& id, const std::string& entity, double p1, double p2) {
  Instance inst;
  inst.id = id;
  inst.theory.entities = {entity};
  inst.theory.facts.emplace_back(attr("Big", entity), 1.0);
  inst.theory.rules.push_back(testing::attr_rule("Big", "Green", p1));
  inst.theory.rules.push_back(testing::attr_rule("Green", "Round", p2));
  inst.hypothesis = attr("Round", entity);
  inst.question = render_atom_text(inst.hypothesis);
  inst.gold_probability = infer_exact(inst.theory, inst.hypothesis);
  inst.gold_label = inst.gold_probability > 0.5;
  inst.depth = 2;
  return inst;
}

GenConfig micro_config(std::uint64_t seed, int max_depth, std::vector<DepthQuota> counts) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.max_depth = max_depth;
  cfg.depth_counts = std::move(counts);
  return cfg;
}

std::vector<AugmentedInstance> augment_all(const std::vector<Instance>& split) {
  std::vector<AugmentedInstance> out;
  for (const auto& inst : split) out.push_back(build_constraints(inst));
  return out;
}

}  // namespace

TEST_CASE("task losses match hand arithmetic") {
  CHECK(task_loss(0.72, 0.72, TaskLossKind::SquaredError) == 0.0);
  CHECK(task_loss(0.5, 0.72, TaskLossKind::SquaredError) == doctest::Approx(0.0484).epsilon(1e-12));
  CHECK(task_loss(0.5, 0.5, TaskLossKind::CrossEntropy) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // clamping keeps CE finite at the boundary
  CHECK(std::isfinite(task_loss(0.0, 1.0, TaskLossKind::CrossEntropy)));
  CHECK(std::isfinite(task_loss(1.0, 0.0, TaskLossKind::CrossEntropy)));

  const double h = 1e-6;
  for (const auto kind : {TaskLossKind::CrossEntropy, TaskLossKind::SquaredError}) {
    for (const double pred : {0.2, 0.5, 0.9}) {
      for (const double gold : {0.0, 0.3, 1.0}) {
        const double fd =
            (task_loss(pred + h, gold, kind) - task_loss(pred - h, gold, kind)) / (2 * h);
        CHECK(task_loss_dpred(pred, gold, kind) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("dual_loss is the lambda-weighted dual sum") {
  CHECK(dual_loss(0.5, std::vector<double>{0.0, 0.5}, std::vector<double>{0.1, 0.2}) ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(dual_loss(0.37, std::vector<double>{0.4, 0.9}, std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(0.37));
  CHECK(dual_loss(0.0, std::vector<double>{0.0}, std::vector<double>{5.0}) == 0.0);
  CHECK_THROWS_AS(dual_loss(0.1, std::vector<double>{0.1}, std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("update_lambdas applies the proportional rule then decays alpha") {
  LambdaState state{std::vector<double>{0.0, 0.0}, 0.01};
  update_lambdas(state, std::vector<double>{0.4, 0.0}, 0.01, 0.9);
  CHECK(state.lambdas[0] == doctest::Approx(0.004).epsilon(1e-12));
  CHECK(state.lambdas[1] == 0.0);  // unviolated stays put
  CHECK(state.alpha == doctest::Approx(0.009).epsilon(1e-12));

  // two passes at constant violation 1.0: 0.01 + 0.009
  LambdaState two{std::vector<double>{0.0}, 0.01};
  update_lambdas(two, std::vector<double>{1.0}, 0.01, 0.9);
  update_lambdas(two, std::vector<double>{1.0}, 0.01, 0.9);
  CHECK(two.lambdas[0] == doctest::Approx(0.019).epsilon(1e-12));

  // below-threshold violations do not grow multipliers
  LambdaState gated{std::vector<double>{0.0}, 0.5};
  update_lambdas(gated, std::vector<double>{0.005}, 0.01, 0.9);
  CHECK(gated.lambdas[0] == 0.0);
  CHECK(gated.alpha == doctest::Approx(0.45));
}

TEST_CASE("an untrained predictor outputs exactly 0.5 and stays in (0,1)") {
  FeatureMap fmap{tiny_vocab(), true};
  const Instance inst = chain_instance("a", "Dave", 0.9, 0.8);

  Predictor fresh(fmap.dimension(), {16}, 3);
  CHECK(predict(fresh, fmap, inst, inst.hypothesis) == 0.5);
  CHECK(predict(fresh, fmap, inst, attr("Big", "Dave")) == 0.5);

  Rng rng(9);
  auto& params = fresh.parameters();
  for (auto& p : params) p = rng.gaussian(0.0, 2.0);
  for (const auto& q : {attr("Big", "Dave"), attr("Green", "Dave"), attr("Round", "Dave")}) {
    const double out = predict(fresh, fmap, inst, q);
    CHECK(out > 0.0);
    CHECK(out < 1.0);
    CHECK(predict(fresh, fmap, inst, q) == out);  // pure and repeatable
  }
}

TEST_CASE("feature map encodes deterministically with a vocabulary-fixed dimension") {
  FeatureMap fmap{tiny_vocab(), true};
  // 3 predicates, 2 entities: 3P + 2P^2 + 2E + 2
  CHECK(fmap.dimension() == 3 * 3 + 2 * 9 + 2 * 2 + 2);

  const Instance a = chain_instance("a", "Dave", 0.9, 0.8);
  const Instance b = chain_instance("b", "Dave", 0.15, 0.8);
  const auto xa1 = fmap.encode(a.theory, a.hypothesis);
  const auto xa2 = fmap.encode(a.theory, a.hypothesis);
  CHECK(xa1 == xa2);
  CHECK(xa1.size() == fmap.dimension());
  CHECK(xa1 != fmap.encode(b.theory, b.hypothesis));           // rule probability differs
  CHECK(xa1 != fmap.encode(a.theory, attr("Green", "Dave")));  // query differs

  // the query-is-given flag separates depth-0 lookups
  const auto given = fmap.encode(a.theory, attr("Big", "Dave"));
  CHECK(given[fmap.dimension() - 2] == 1.0);
  CHECK(xa1[fmap.dimension() - 2] == 0.0);

  FeatureMap no_rules{tiny_vocab(), false};
  const auto stripped = no_rules.encode(a.theory, a.hypothesis);
  CHECK(stripped[no_rules.dimension() - 1] == 0.0);  // rules-present flag off

  CHECK_THROWS_AS(fmap.encode(a.theory, attr("Purple", "Dave")), std::invalid_argument);
}

TEST_CASE("dual objective gradient matches central finite differences") {
  FeatureMap fmap{tiny_vocab(), true};
  const std::vector<Instance> dataset = {chain_instance("a", "Dave", 0.9, 0.8),
                                         chain_instance("b", "Erin", 0.15, 0.5)};
  const auto augmented = augment_all(dataset);
  const TrainingProblem problem(fmap, dataset, augmented);
  REQUIRE(problem.constraint_count() == 4);

  LambdaState lam{std::vector<double>{0.3, 0.7, 0.2, 0.9}, 0.1};
  const std::vector<std::size_t> ex{0, 1};
  const std::vector<std::size_t> aug{0, 1};

  Rng rng(1234);
  const double h = 1e-5;
  int points = 0;
  int attempts = 0;
  while (points < 10 && attempts < 50) {
    ++attempts;
    Predictor p(fmap.dimension(), {8}, 100 + attempts);
    for (auto& w : p.parameters()) w += rng.gaussian(0.0, 0.3);

    // keep clear of the |.| kink so the comparison is well-posed
    const auto viols = problem.violations(p);
    bool near_kink = false;
    for (const double v : viols) near_kink = near_kink || v < 1e-3;
    if (near_kink) continue;
    ++points;

    for (const auto kind : {TaskLossKind::CrossEntropy, TaskLossKind::SquaredError}) {
      std::vector<double> grad;
      problem.objective_with_grad(p, kind, ex, aug, lam, grad);
      // probe a spread of parameters rather than all of them
      for (std::size_t i = 0; i < p.parameter_count(); i += 17) {
        Predictor lo = p, hi = p;
        lo.parameters()[i] -= h;
        hi.parameters()[i] += h;
        const double f_lo = problem.objective(lo, kind, ex, aug, lam).total;
        const double f_hi = problem.objective(hi, kind, ex, aug, lam).total;
        const double fd = (f_hi - f_lo) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
        CHECK(std::abs(grad[i] - fd) / denom < 1e-4);
      }
    }
  }
  CHECK(points == 10);
}

TEST_CASE("training memorizes a depth-0 micro-dataset") {
  const GenConfig cfg = micro_config(3, 0, {{10, 10}});
  const auto split = generate_split(cfg);
  REQUIRE(split.size() == 20);

  TrainConfig tc;
  tc.loss = TaskLossKind::CrossEntropy;
  tc.warmup_epochs = 500;
  tc.total_epochs = 500;
  tc.learning_rate = 0.5;
  tc.batch_size = 4;
  tc.hidden_sizes = {32};
  tc.seed = 5;

  FeatureMap fmap{cfg.vocabulary, true};
  const auto result = train(tc, fmap, split, {});
  CHECK(result.report.final_task_loss < 0.05);
}

TEST_CASE("warm-up-only training is bitwise identical to the baseline") {
  const GenConfig cfg = micro_config(11, 2, {{3, 3}, {3, 3}, {2, 2}});
  const auto split = generate_split(cfg);
  const auto augmented = augment_all(split);

  TrainConfig tc;
  tc.warmup_epochs = 4;
  tc.total_epochs = 4;
  tc.learning_rate = 0.3;
  tc.seed = 17;
  FeatureMap fmap{cfg.vocabulary, true};

  const auto with_constraints = train(tc, fmap, split, augmented);
  const auto baseline = train(tc, fmap, split, {});
  REQUIRE(with_constraints.predictor.parameter_count() == baseline.predictor.parameter_count());
  for (std::size_t i = 0; i < baseline.predictor.parameter_count(); ++i) {
    CHECK(with_constraints.predictor.parameters()[i] == baseline.predictor.parameters()[i]);
  }
  CHECK(with_constraints.report.final_task_loss == baseline.report.final_task_loss);
  // multipliers never moved
  CHECK(with_constraints.report.epochs.back().lambda_sum == 0.0);
}

TEST_CASE("training runs are deterministic per seed") {
  const GenConfig cfg = micro_config(13, 1, {{4, 4}, {4, 4}});
  const auto split = generate_split(cfg);
  const auto augmented = augment_all(split);

  TrainConfig tc;
  tc.warmup_epochs = 2;
  tc.total_epochs = 6;
  tc.seed = 23;
  FeatureMap fmap{cfg.vocabulary, true};

  const auto a = train(tc, fmap, split, augmented);
  const auto b = train(tc, fmap, split, augmented);
  CHECK(a.predictor.parameters() == b.predictor.parameters());
  CHECK(a.report.final_cs10 == b.report.final_cs10);

  TrainConfig other = tc;
  other.seed = 24;
  const auto c = train(other, fmap, split, augmented);
  CHECK(a.predictor.parameters() != c.predictor.parameters());
}

TEST_CASE("multiplier and alpha trajectories are monotone over a full run") {
  const GenConfig cfg = micro_config(29, 2, {{3, 3}, {4, 4}, {3, 3}});
  const auto split = generate_split(cfg);
  const auto augmented = augment_all(split);

  TrainConfig tc;
  tc.warmup_epochs = 2;
  tc.total_epochs = 10;
  tc.alpha0 = 0.05;
  tc.seed = 31;
  FeatureMap fmap{cfg.vocabulary, true};

  const auto result = train(tc, fmap, split, augmented);
  const auto& history = result.report.lambda_history;
  REQUIRE(history.size() == 10);
  for (std::size_t e = 0; e < history.size(); ++e) {
    for (std::size_t i = 0; i < history[e].size(); ++i) {
      CHECK(history[e][i] >= 0.0);
      if (e > 0) CHECK(history[e][i] >= history[e - 1][i]);
    }
  }
  for (std::size_t e = 1; e < result.report.epochs.size(); ++e) {
    CHECK(result.report.epochs[e].alpha <= result.report.epochs[e - 1].alpha);
  }
  // constraints actually engaged
  CHECK(result.report.epochs.back().lambda_sum > 0.0);
}

TEST_CASE("constrained training raises constraint satisfaction on a small split") {
  const GenConfig cfg = micro_config(47, 3, {{12, 12}, {14, 14}, {13, 13}, {12, 12}});
  const auto split = generate_split(cfg);
  const auto augmented = augment_all(split);

  TrainConfig base;
  base.loss = TaskLossKind::CrossEntropy;
  base.warmup_epochs = 20;
  base.total_epochs = 20;
  base.seed = 3;
  FeatureMap fmap{cfg.vocabulary, true};
  const auto baseline = train(base, fmap, split, augmented);

  TrainConfig constrained_cfg = base;
  constrained_cfg.warmup_epochs = 5;
  constrained_cfg.alpha0 = 0.1;
  const auto constrained = train(constrained_cfg, fmap, split, augmented);

  CHECK(constrained.report.final_cs10 > baseline.report.final_cs10);
  CHECK(constrained.report.final_task_loss < 1.2 * baseline.report.final_task_loss);
}

TEST_CASE("train aborts on non-finite losses naming the batch") {
  std::vector<Instance> split = {chain_instance("a", "Dave", 0.9, 0.8)};
  split[0].gold_probability = std::nan("");
  TrainConfig tc;
  tc.warmup_epochs = 1;
  tc.total_epochs = 1;
  FeatureMap fmap{tiny_vocab(), true};
  CHECK_THROWS_WITH_AS(train(tc, fmap, split, {}), "non-finite loss at epoch 0, batch 0",
                       std::runtime_error);
}

TEST_CASE("config validation") {
  TrainConfig tc;
  CHECK_NOTHROW(tc.validate());
  tc.warmup_epochs = 30;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);  // warmup past total
  tc = TrainConfig{};
  tc.alpha0 = 0.0001;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
  tc = TrainConfig{};
  tc.alpha0 = 1.5;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
  tc = TrainConfig{};
  tc.learning_rate = 0.0;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
}

TEST_CASE("predict_all covers hypotheses and augmented queries; files round-trip") {
  const GenConfig cfg = micro_config(53, 1, {{2, 2}, {2, 2}});
  const auto split = generate_split(cfg);
  const auto augmented = augment_all(split);
  FeatureMap fmap{cfg.vocabulary, true};
  Predictor p(fmap.dimension(), {8}, 7);

  const auto preds = predict_all(p, fmap, split, augmented);
  for (const auto& inst : split) CHECK(preds.count(inst.id) == 1);
  for (const auto& aug : augmented) {
    for (std::size_t k = 0; k < aug.queries.size(); ++k) {
      CHECK(preds.count(aug.base_id + "#" + std::to_string(k)) == 1);
    }
  }

  const std::string path = "/tmp/rulebench_test_model.json";
  save_predictor(path, p, fmap);
  const auto [loaded, loaded_fmap] = load_predictor(path);
  CHECK(loaded.parameters() == p.parameters());
  CHECK(loaded_fmap.vocabulary == fmap.vocabulary);
  const auto preds2 = predict_all(loaded, loaded_fmap, split, augmented);
  CHECK(preds2 == preds);
  std::remove(path.c_str());

  // augmented rows must reference known instances
  std::vector<AugmentedInstance> orphan = augmented;
  orphan[0].base_id = "missing";
  CHECK_THROWS_AS(predict_all(p, fmap, split, orphan), std::invalid_argument);
}
