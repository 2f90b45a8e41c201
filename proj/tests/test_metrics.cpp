#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rulebench/metrics.hpp"
#include "rulebench/rng.hpp"
#include "helpers.hpp"

using namespace rulebench;
using rulebench::testing::attr;

namespace {

Instance fixture_instance(const std::string& id, double gold, int depth) {
  Instance inst;
  inst.id = id;
  inst.theory.entities = {"Dave"};
  inst.theory.facts.emplace_back(attr("Big", "Dave"), 1.0);
  inst.hypothesis = attr("Big", "Dave");
  inst.question = "Dave is big.";
  inst.gold_probability = gold;
  inst.gold_label = gold > 0.5;
  inst.depth = depth;
  return inst;
}

}  // namespace

TEST_CASE("binary accuracy compares sides of 50%") {
  CHECK(binary_accuracy(0.60, 0.72));
  CHECK(!binary_accuracy(0.40, 0.72));
  CHECK(binary_accuracy(0.135, 0.135));
  CHECK(binary_accuracy(0.2, 0.4));
  // 0.5 counts as the True side for both arguments
  CHECK(binary_accuracy(0.5, 0.9));
  CHECK(binary_accuracy(0.5, 0.5));
  CHECK(!binary_accuracy(0.499999, 0.5));
}

TEST_CASE("binary accuracy ignores changes on the same side of 0.5") {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double gold = rng.unit();
    const double a = rng.unit() * 0.499;        // below
    const double b = 0.5 + rng.unit() * 0.5;    // at or above
    CHECK(binary_accuracy(a, gold) == binary_accuracy(0.1, gold));
    CHECK(binary_accuracy(b, gold) == binary_accuracy(0.9, gold));
  }
}

TEST_CASE("window accuracy is inclusive") {
  CHECK(!ca_accuracy(0.60, 0.72, 0.10));
  CHECK(ca_accuracy(0.60, 0.72, 0.25));
  CHECK(ca_accuracy(0.72, 0.72, 0.01));
  CHECK(ca_accuracy(0.62, 0.72, 0.10));  // boundary |diff| == window
}

TEST_CASE("window monotonicity over random pairs") {
  Rng rng(23);
  for (int i = 0; i < 10000; ++i) {
    const double pred = rng.unit();
    const double gold = rng.unit();
    if (ca_accuracy(pred, gold, 0.01)) CHECK(ca_accuracy(pred, gold, 0.10));
    if (ca_accuracy(pred, gold, 0.10)) CHECK(ca_accuracy(pred, gold, 0.25));
  }
}

TEST_CASE("cs_rate counts strict-threshold satisfaction as a percentage") {
  const std::vector<double> violations{0.0, 0.08, 0.2};
  CHECK(cs_rate(violations, 0.25) == doctest::Approx(100.0));
  CHECK(cs_rate(violations, 0.10) == doctest::Approx(100.0 * 2 / 3));
  CHECK(cs_rate(violations, 0.01) == doctest::Approx(100.0 / 3));
  CHECK(cs_rate(std::vector<double>{0.08}, 0.10) == 100.0);
  CHECK(cs_rate(std::vector<double>{0.08}, 0.01) == 0.0);
  CHECK(cs_rate(std::vector<double>{}, 0.01) == 0.0);

  // prediction-level overload computes the violations itself
  Constraint c;
  c.premise_indices = {0};
  c.rule_probability = 0.8;
  c.conclusion_index = 1;
  const std::vector<double> preds{0.9, 0.80};  // violation 0.08
  const std::vector<Constraint> cs{c};
  CHECK(cs_rate(preds, cs, 0.10) == 100.0);
  CHECK(cs_rate(preds, cs, 0.01) == 0.0);
}

TEST_CASE("evaluate reproduces the hand-computed four-instance fixture") {
  // hand evaluation:
  //   i1: pred .90 gold .80 -> BA ok, |d|=.10 -> CA25 ok, CA10 ok, CA1 no
  //   i2: pred .30 gold .70 -> BA no, |d|=.40 -> none
  //   i3: pred .72 gold .72 -> all ok
  //   i4: pred .55 gold .75 -> BA ok, |d|=.20 -> CA25 ok only
  // BA 3/4, CA25 3/4, CA10 2/4, CA1 1/4
  const std::vector<Instance> dataset = {
      fixture_instance("i1", 0.80, 1),
      fixture_instance("i2", 0.70, 1),
      fixture_instance("i3", 0.72, 2),
      fixture_instance("i4", 0.75, 2),
  };
  const std::map<std::string, double> preds{
      {"i1", 0.90}, {"i2", 0.30}, {"i3", 0.72}, {"i4", 0.55}};

  const EvalReport report = evaluate(preds, dataset, {});
  CHECK(report.total.count == 4);
  CHECK(report.total.ba == doctest::Approx(75.0));
  CHECK(report.total.ca25 == doctest::Approx(75.0));
  CHECK(report.total.ca10 == doctest::Approx(50.0));
  CHECK(report.total.ca1 == doctest::Approx(25.0));

  REQUIRE(report.per_depth.size() == 2);
  CHECK(report.per_depth[0].depth == 1);
  CHECK(report.per_depth[0].ba == doctest::Approx(50.0));
  CHECK(report.per_depth[1].depth == 2);
  CHECK(report.per_depth[1].ba == doctest::Approx(100.0));

  // total equals the count-weighted mean of the per-depth rates
  double weighted = 0.0;
  for (const auto& cell : report.per_depth) weighted += cell.ba * cell.count;
  CHECK(weighted / report.total.count == doctest::Approx(report.total.ba));

  const std::string table = format_report_table(report);
  CHECK(table.find("75.00") != std::string::npos);
  CHECK(table.find("Total") != std::string::npos);
}

TEST_CASE("evaluate scores constraints through the query key scheme") {
  const std::vector<Instance> dataset = {fixture_instance("i1", 0.72, 2)};

  AugmentedInstance aug;
  aug.base_id = "i1";
  aug.queries.resize(3);
  Constraint c1;
  c1.premise_indices = {0};
  c1.rule_probability = 0.9;
  c1.conclusion_index = 1;
  Constraint c2;
  c2.premise_indices = {1};
  c2.rule_probability = 0.8;
  c2.conclusion_index = 2;
  aug.constraints = {c1, c2};

  std::map<std::string, double> preds{{"i1", 0.72},
                                      {query_prediction_key("i1", 0), 1.0},
                                      {query_prediction_key("i1", 1), 0.90},
                                      {query_prediction_key("i1", 2), 0.80}};
  const EvalReport report = evaluate(preds, dataset, {aug});
  CHECK(report.constraint_count == 2);
  CHECK(report.cs25 == doctest::Approx(100.0));
  CHECK(report.cs10 == doctest::Approx(100.0));  // violations 0.0 and 0.08
  CHECK(report.cs1 == doctest::Approx(50.0));

  // gold predictions satisfy everything; all-zero predictions do too
  preds[query_prediction_key("i1", 2)] = 0.72;
  const EvalReport gold_report = evaluate(preds, dataset, {aug});
  CHECK(gold_report.cs1 == doctest::Approx(100.0));

  std::map<std::string, double> zeros{{"i1", 0.0},
                                      {query_prediction_key("i1", 0), 0.0},
                                      {query_prediction_key("i1", 1), 0.0},
                                      {query_prediction_key("i1", 2), 0.0}};
  const EvalReport zero_report = evaluate(zeros, dataset, {aug});
  CHECK(zero_report.cs1 == doctest::Approx(100.0));
}

TEST_CASE("evaluate lists missing predictions") {
  const std::vector<Instance> dataset = {fixture_instance("i1", 0.8, 1),
                                         fixture_instance("i2", 0.2, 1)};
  const std::map<std::string, double> preds{{"i1", 0.9}};
  CHECK_THROWS_AS(evaluate(preds, dataset, {}), std::invalid_argument);
  try {
    evaluate(preds, dataset, {});
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("i2") != std::string::npos);
  }
}

TEST_CASE("empty dataset yields an empty report without division by zero") {
  const EvalReport report = evaluate({}, {}, {});
  CHECK(report.per_depth.empty());
  CHECK(report.total.count == 0);
  CHECK(report.total.ba == 0.0);
  CHECK(report.constraint_count == 0);
  CHECK_NOTHROW(format_report_table(report));
}
