// Command-line front end: generate datasets, solve instances with the exact
// oracle, build constraint files, train and run the predictor, and evaluate
// predictions.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rulebench/constraints.hpp"
#include "rulebench/datagen.hpp"
#include "rulebench/metrics.hpp"
#include "rulebench/serialize.hpp"
#include "rulebench/trainer.hpp"

namespace rb = rulebench;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_generate(const std::string& config_path, const std::string& vocab_path, int profile_scale,
                 std::uint64_t seed, bool seed_set, const std::string& out_path,
                 const std::string& aug_path) {
  rb::GenConfig cfg;
  if (!config_path.empty()) cfg = rb::GenConfig::from_json_text(slurp(config_path));
  if (!vocab_path.empty()) cfg.vocabulary = rb::Vocabulary::load_file(vocab_path);
  if (profile_scale > 0) {
    cfg.depth_counts = rb::default_depth_profile(profile_scale);
    cfg.max_depth = static_cast<int>(cfg.depth_counts.size()) - 1;
  }
  if (seed_set) cfg.seed = seed;

  const auto split = rb::generate_split(cfg);
  rb::write_instances_jsonl(out_path, split);
  std::cout << "wrote " << split.size() << " instances to " << out_path << "\n";

  if (!aug_path.empty()) {
    std::vector<rb::AugmentedInstance> augs;
    const rb::TemplateSet templates = cfg.vocabulary.templates();
    for (const auto& inst : split) augs.push_back(rb::build_constraints(inst, templates));
    rb::write_augmented_jsonl(aug_path, augs);
    std::size_t n = 0;
    for (const auto& a : augs) n += a.constraints.size();
    std::cout << "wrote " << augs.size() << " augmented rows (" << n << " constraints) to "
              << aug_path << "\n";
  }
  return 0;
}

int run_solve(const std::string& in_path, const std::string& out_path, bool check) {
  const auto instances = rb::read_instances_jsonl(in_path);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write file: " + out_path);

  int mismatches = 0;
  for (const auto& inst : instances) {
    const rb::Closure closure = rb::derive_closure(inst.theory);
    const double gold = rb::infer_exact(inst.theory, inst.hypothesis);
    const auto depth = closure.depth_of(inst.hypothesis);
    const rb::NetworkKind kind = rb::classify(closure, inst.hypothesis);
    const auto chain = rb::minimal_proof_chain(closure, inst.hypothesis);

    nlohmann::ordered_json j;
    j["id"] = inst.id;
    j["gold_prob"] = gold;
    j["depth"] = depth.value_or(0);
    j["derivable"] = depth.has_value();
    j["kind"] = rb::to_string(kind);
    nlohmann::ordered_json proof = nlohmann::ordered_json::array();
    for (const auto& step : chain) {
      nlohmann::ordered_json sj;
      sj["rule"] = step.rule_index;
      nlohmann::ordered_json premises = nlohmann::ordered_json::array();
      for (const auto& p : step.premises) premises.push_back(p.to_string());
      sj["premises"] = premises;
      sj["conclusion"] = step.conclusion.to_string();
      sj["rule_prob"] = step.rule_probability;
      sj["prob"] = step.inferred_probability;
      proof.push_back(sj);
    }
    j["proof"] = proof;
    out << j.dump() << "\n";

    if (check && std::abs(gold - inst.gold_probability) > 1e-9) {
      std::cerr << "gold mismatch for " << inst.id << ": stored " << inst.gold_probability
                << ", oracle " << gold << "\n";
      ++mismatches;
    }
  }
  std::cout << "solved " << instances.size() << " instances -> " << out_path << "\n";
  if (check) {
    std::cout << (mismatches == 0 ? "all stored golds verified\n"
                                  : std::to_string(mismatches) + " mismatches\n");
  }
  return mismatches == 0 ? 0 : 1;
}

int run_augment(const std::string& in_path, const std::string& out_path) {
  const auto instances = rb::read_instances_jsonl(in_path);
  std::vector<rb::AugmentedInstance> augs;
  for (const auto& inst : instances) augs.push_back(rb::build_constraints(inst));
  rb::write_augmented_jsonl(out_path, augs);
  std::size_t n = 0;
  for (const auto& a : augs) n += a.constraints.size();
  std::cout << "wrote " << augs.size() << " augmented rows (" << n << " constraints) to "
            << out_path << "\n";
  return 0;
}

int run_train(const std::string& data_path, const std::string& aug_path, const rb::TrainConfig& cfg,
              const std::string& vocab_path, const std::string& model_path,
              const std::string& report_path) {
  const auto dataset = rb::read_instances_jsonl(data_path);
  std::vector<rb::AugmentedInstance> augmented;
  if (!aug_path.empty()) augmented = rb::read_augmented_jsonl(aug_path);

  rb::FeatureMap fmap;
  fmap.vocabulary = vocab_path.empty() ? rb::Vocabulary::defaults()
                                       : rb::Vocabulary::load_file(vocab_path);
  fmap.include_rule_features = cfg.include_rule_features;

  const auto result = rb::train(cfg, fmap, dataset, augmented);
  rb::save_predictor(model_path, result.predictor, result.feature_map);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write file: " + report_path);
    out << rb::report_to_json_text(result.report) << "\n";
  }
  std::cout << "trained " << result.report.parameter_count << " parameters over "
            << result.report.epochs.size() << " epochs; final task loss "
            << result.report.final_task_loss;
  if (result.report.constraint_count > 0) {
    std::cout << ", final CS10 " << result.report.final_cs10 << "%";
  }
  std::cout << "\nmodel saved to " << model_path << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& aug_path, const std::string& out_path) {
  const auto [predictor, fmap] = rb::load_predictor(model_path);
  const auto dataset = rb::read_instances_jsonl(data_path);
  std::vector<rb::AugmentedInstance> augmented;
  if (!aug_path.empty()) augmented = rb::read_augmented_jsonl(aug_path);
  const auto preds = rb::predict_all(predictor, fmap, dataset, augmented);
  rb::write_predictions(out_path, preds);
  std::cout << "wrote " << preds.size() << " predictions to " << out_path << "\n";
  return 0;
}

int run_evaluate(const std::string& preds_path, const std::string& data_path,
                 const std::string& aug_path, const std::string& out_path, bool table) {
  const auto preds = rb::read_predictions(preds_path);
  const auto dataset = rb::read_instances_jsonl(data_path);
  std::vector<rb::AugmentedInstance> augmented;
  if (!aug_path.empty()) augmented = rb::read_augmented_jsonl(aug_path);
  const auto report = rb::evaluate(preds, dataset, augmented);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);
    out << rb::report_to_json_text(report) << "\n";
  }
  if (table || out_path.empty()) std::cout << rb::format_report_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic rule reasoning workbench"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "generate a dataset split");
  std::string gen_config, gen_vocab, gen_out = "data.jsonl", gen_aug;
  int gen_profile = 0;
  std::uint64_t gen_seed = 0;
  generate->add_option("--config", gen_config, "generation config JSON file");
  generate->add_option("--vocab", gen_vocab, "vocabulary table file");
  generate->add_option("--profile-scale", gen_profile,
                       "use the default depth profile scaled down by this divisor");
  auto* seed_opt = generate->add_option("--seed", gen_seed, "generation seed");
  generate->add_option("--out", gen_out, "output dataset JSONL");
  generate->add_option("--augmented", gen_aug, "also write the augmented constraint JSONL");

  // solve
  auto* solve = app.add_subcommand("solve", "run the exact oracle over a dataset");
  std::string solve_in, solve_out = "solved.jsonl";
  bool solve_check = false;
  solve->add_option("--in", solve_in, "input dataset JSONL")->required();
  solve->add_option("--out", solve_out, "output JSONL");
  solve->add_flag("--check", solve_check, "verify stored gold probabilities");

  // augment
  auto* augment = app.add_subcommand("augment", "build the constraint file for a dataset");
  std::string aug_in, aug_out = "augmented.jsonl";
  augment->add_option("--in", aug_in, "input dataset JSONL")->required();
  augment->add_option("--out", aug_out, "output augmented JSONL");

  // train
  auto* train = app.add_subcommand("train", "train the predictor");
  std::string train_data, train_aug, train_vocab, train_model = "model.json", train_report;
  rb::TrainConfig cfg;
  std::string loss_name = "ce";
  train->add_option("--data", train_data, "training dataset JSONL")->required();
  train->add_option("--aug", train_aug, "augmented constraint JSONL (omit for baseline)");
  train->add_option("--vocab", train_vocab, "vocabulary table file");
  train->add_option("--loss", loss_name, "task loss: ce|mse");
  train->add_option("--warmup", cfg.warmup_epochs, "warm-up epochs (task loss only)");
  train->add_option("--epochs", cfg.total_epochs, "total epochs");
  train->add_option("--lr", cfg.learning_rate, "learning rate");
  train->add_option("--alpha0", cfg.alpha0, "initial constraint learning rate");
  train->add_option("--alpha-decay", cfg.alpha_decay, "per-epoch alpha decay factor");
  train->add_option("--batch", cfg.batch_size, "task batch size");
  train->add_option("--constraint-batch", cfg.constraint_batch,
                    "augmented instances per step (0 = batch size)");
  train->add_option("--seed", cfg.seed, "training seed");
  train->add_option("--model-out", train_model, "predictor output file");
  train->add_option("--report-out", train_report, "training report JSON");

  // predict
  auto* predict = app.add_subcommand("predict", "run a saved predictor over a dataset");
  std::string pred_model, pred_data, pred_aug, pred_out = "predictions.json";
  predict->add_option("--model", pred_model, "predictor file")->required();
  predict->add_option("--data", pred_data, "dataset JSONL")->required();
  predict->add_option("--aug", pred_aug, "augmented JSONL (adds query predictions)");
  predict->add_option("--out", pred_out, "predictions output file");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against a dataset");
  std::string eval_preds, eval_data, eval_aug, eval_out;
  bool eval_table = false;
  evaluate->add_option("--preds", eval_preds, "predictions file")->required();
  evaluate->add_option("--data", eval_data, "dataset JSONL")->required();
  evaluate->add_option("--aug", eval_aug, "augmented JSONL (enables CS rates)");
  evaluate->add_option("--out", eval_out, "report JSON output");
  evaluate->add_flag("--table", eval_table, "print the per-depth table");

  // vocab
  auto* vocab = app.add_subcommand("vocab", "write the default vocabulary table");
  std::string vocab_out = "vocabulary.txt";
  vocab->add_option("--out", vocab_out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return run_generate(gen_config, gen_vocab, gen_profile, gen_seed, seed_opt->count() > 0,
                          gen_out, gen_aug);
    }
    if (solve->parsed()) return run_solve(solve_in, solve_out, solve_check);
    if (augment->parsed()) return run_augment(aug_in, aug_out);
    if (train->parsed()) {
      cfg.loss = rb::task_loss_kind_from_string(loss_name);
      return run_train(train_data, train_aug, cfg, train_vocab, train_model, train_report);
    }
    if (predict->parsed()) return run_predict(pred_model, pred_data, pred_aug, pred_out);
    if (evaluate->parsed()) return run_evaluate(eval_preds, eval_data, eval_aug, eval_out,
                                                eval_table);
    if (vocab->parsed()) {
      rb::Vocabulary::defaults().save_file(vocab_out);
      std::cout << "wrote default vocabulary to " << vocab_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
