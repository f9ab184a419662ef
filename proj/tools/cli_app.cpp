#include "cli_app.hpp"

#include <charconv>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "att/dea_tuner.hpp"
#include "att/errors.hpp"
#include "att/evaluation.hpp"
#include "att/model_io.hpp"
#include "att/nmu_trainer.hpp"
#include "att/sparse_tensor.hpp"
#include "att/synthetic.hpp"

namespace att::cli {

namespace {

using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<TensorDims> declared_dims(std::size_t nodes, std::size_t slots) {
  if (nodes == 0 && slots == 0) return std::nullopt;
  if (nodes == 0 || slots == 0)
    throw UsageError("--nodes and --slots must be given together");
  return TensorDims{nodes, slots};
}

struct GenerateArgs {
  SyntheticSpec spec;
  std::string out;
  std::string truth_out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& err) {
  const SyntheticData data = generate_synthetic(a.spec);
  write_coo_file(a.out, data.tensor);
  if (!a.truth_out.empty()) save_model(a.truth_out, data.truth, HyperParams{});
  err << "att: wrote " << data.tensor.size() << " entries to " << a.out << "\n";
  return kSuccess;
}

struct SplitArgs {
  std::string input;
  std::size_t nodes = 0;
  std::size_t slots = 0;
  std::vector<double> ratios{7.0, 1.0, 2.0};
  std::uint64_t seed = 0;
  std::string train_out, val_out, test_out;
};

int cmd_split(const SplitArgs& a, std::ostream& err) {
  if (a.ratios.size() != 3) throw UsageError("--ratios takes three values");
  const SparseTensor tensor = load_coo_file(a.input, declared_dims(a.nodes, a.slots));
  const DatasetSplit parts = split(tensor, {a.ratios[0], a.ratios[1], a.ratios[2]}, a.seed);
  write_coo_file(a.train_out, parts.train);
  write_coo_file(a.val_out, parts.validation);
  write_coo_file(a.test_out, parts.test);
  err << "att: split " << tensor.size() << " entries into " << parts.train.size() << "/"
      << parts.validation.size() << "/" << parts.test.size() << "\n";
  return kSuccess;
}

struct StatsArgs {
  std::string input;
  std::size_t nodes = 0;
  std::size_t slots = 0;
  std::string report;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  const DatasetStats s =
      compute_stats(load_coo_file(a.input, declared_dims(a.nodes, a.slots)));
  const json doc = {{"n_nodes", s.n_nodes},
                    {"n_slots", s.n_slots},
                    {"observed", s.observed},
                    {"density", s.density}};
  if (a.report.empty())
    out << doc.dump(2) << "\n";
  else
    write_json_file(a.report, doc);
  return kSuccess;
}

struct TrainArgs {
  std::string train_path, val_path;
  std::size_t nodes = 0, slots = 0;
  std::string mode = "att";
  std::size_t rank = 20;
  std::optional<std::size_t> window;
  std::size_t max_epochs = 1000;
  double tol = 1e-5;
  std::optional<double> lambda, lambda_b;
  bool adapt = false;
  std::size_t pop = 10;
  double scale_factor = 0.4;
  double cp = 0.9;
  std::vector<double> bounds{1e-4, 0.5, 1e-4, 0.5};
  std::string best_rule = "argmin_h";
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  std::string out, report;
  unsigned threads = 1;
  bool strict_sequential = false;
};

int cmd_train(const TrainArgs& a, std::ostream& err) {
  if (a.adapt && (a.lambda || a.lambda_b))
    throw UsageError("--adapt cannot be combined with --lambda/--lambda-b");
  if (a.bounds.size() != 4) throw UsageError("--bounds takes four values");
  if (a.rank < 1) throw UsageError("--rank must be at least 1");

  const auto dims = declared_dims(a.nodes, a.slots);
  const SparseTensor train_set = load_coo_file(a.train_path, dims);
  const SparseTensor validation = load_coo_file(a.val_path, dims);
  if (validation.empty()) throw DataError("validation set is empty");
  if (train_set.n_nodes() != validation.n_nodes() ||
      train_set.n_slots() != validation.n_slots())
    throw DataError("dimension mismatch between training and validation tensors");

  TrainConfig tc;
  tc.mode = parse_train_mode(a.mode);
  tc.max_epochs = a.max_epochs;
  tc.tolerance = a.tol;
  tc.threads = a.strict_sequential ? 1u : std::max(1u, a.threads);

  const std::size_t n_slots = train_set.n_slots();
  const std::size_t full = n_slots > 0 ? n_slots - 1 : 0;
  std::size_t window = tc.mode == TrainMode::baseline ? 0 : a.window.value_or(full);
  window = std::min(window, full);

  FactorModel model =
      init_positive(train_set.n_nodes(), n_slots, a.rank, window, a.seed, a.init_scale);

  json config = {{"train", a.train_path},
                 {"val", a.val_path},
                 {"mode", to_string(tc.mode)},
                 {"rank", a.rank},
                 {"window", window},
                 {"max_epochs", tc.max_epochs},
                 {"tol", tc.tolerance},
                 {"init_scale", a.init_scale},
                 {"seed", a.seed},
                 {"threads", tc.threads},
                 {"strict_sequential", a.strict_sequential},
                 {"adapt", a.adapt}};

  TrainReport report;
  HyperParams hp;
  if (a.adapt) {
    DEAConfig dea;
    dea.population = a.pop;
    dea.max_iterations = tc.max_epochs;
    dea.scale_factor = a.scale_factor;
    dea.crossover_prob = a.cp;
    dea.bounds = {a.bounds[0], a.bounds[1], a.bounds[2], a.bounds[3]};
    dea.best_rule = parse_best_rule(a.best_rule);
    dea.seed = a.seed;
    config["pop"] = dea.population;
    config["scale_factor"] = dea.scale_factor;
    config["cp"] = dea.crossover_prob;
    config["bounds"] = a.bounds;
    config["best_rule"] = to_string(dea.best_rule);
    report = adapt_train(model, train_set, validation, dea, tc);
    hp = report.final_hp;
  } else {
    hp = {a.lambda.value_or(0.01), a.lambda_b.value_or(0.01)};
    if (!(hp.lambda >= 0.0) || !(hp.lambda_b >= 0.0))
      throw UsageError("--lambda and --lambda-b must be nonnegative");
    config["lambda"] = hp.lambda;
    config["lambda_b"] = hp.lambda_b;
    report = train(model, train_set, validation, hp, tc);
  }

  json doc = report_to_json(report);
  doc["seed"] = a.seed;
  doc["config"] = config;
  save_model(a.out, model, hp);
  write_json_file(a.report, doc);
  err << "att: " << report.epochs_run << " epochs (" << to_string(report.termination)
      << "), validation H " << shortest(report.per_epoch_h.back()) << "\n";
  return kSuccess;
}

// Loads a test tensor against a model's dims, reporting any disagreement as
// a dimension mismatch.
SparseTensor load_against(const std::string& path, const FactorModel& model) {
  try {
    return load_coo_file(path, TensorDims{model.n_nodes(), model.n_slots()});
  } catch (const DataError& e) {
    const std::string what = e.what();
    if (what.find("out of bounds") != std::string::npos ||
        what.find("disagrees") != std::string::npos)
      throw DataError("dimension mismatch: " + what);
    throw;
  }
}

struct EvaluateArgs {
  std::string model, test, report;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& err) {
  const ModelDocument doc = load_model(a.model);
  const SparseTensor test = load_against(a.test, doc.model);
  if (test.empty()) throw DataError("test set is empty");
  const Metrics m = evaluate(doc.model, test);
  write_json_file(a.report, metrics_to_json(m));
  err << "att: rmse " << shortest(m.rmse) << " mae " << shortest(m.mae) << " over "
      << m.count << " entries\n";
  return kSuccess;
}

struct PredictArgs {
  std::string model;
  std::size_t i = 0, j = 0, k = 0;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const ModelDocument doc = load_model(a.model);
  const FactorModel& m = doc.model;
  if (a.i >= m.n_nodes() || a.j >= m.n_nodes() || a.k >= m.n_slots())
    throw UsageError("index (" + std::to_string(a.i) + "," + std::to_string(a.j) + "," +
                     std::to_string(a.k) + ") out of range for model " +
                     std::to_string(m.n_nodes()) + "x" + std::to_string(m.n_nodes()) +
                     "x" + std::to_string(m.n_slots()));
  out << shortest(predict(m, compute_temporal(m), a.i, a.j, a.k)) << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal-dependent nonnegative tensor factorization", "att"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Synthesize a sparse tensor and its ground truth");
  generate->add_option("--nodes", gen.spec.n_nodes, "Node count N")->required();
  generate->add_option("--slots", gen.spec.n_slots, "Temporal slot count K")->required();
  generate->add_option("--rank", gen.spec.true_rank, "Ground-truth rank")->required();
  generate->add_option("--density", gen.spec.density, "Observed fraction in (0,1]")->required();
  generate->add_option("--ar", gen.spec.temporal_correlation, "AR(1) coefficient of temporal factors");
  generate->add_option("--noise", gen.spec.noise_scale, "Noise standard deviation");
  generate->add_option("--seed", gen.spec.seed, "Random seed");
  generate->add_option("--out", gen.out, "COO output path")->required();
  generate->add_option("--truth-out", gen.truth_out, "Ground-truth model JSON path");

  SplitArgs sp;
  auto* split_cmd = app.add_subcommand("split", "Partition a tensor into train/validation/test");
  split_cmd->add_option("--input", sp.input)->required();
  split_cmd->add_option("--nodes", sp.nodes);
  split_cmd->add_option("--slots", sp.slots);
  split_cmd->add_option("--ratios", sp.ratios, "Three proportions, e.g. 7,1,2")->delimiter(',');
  split_cmd->add_option("--seed", sp.seed);
  split_cmd->add_option("--train-out", sp.train_out)->required();
  split_cmd->add_option("--val-out", sp.val_out)->required();
  split_cmd->add_option("--test-out", sp.test_out)->required();

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Report node/slot counts and density");
  stats->add_option("--input", st.input)->required();
  stats->add_option("--nodes", st.nodes);
  stats->add_option("--slots", st.slots);
  stats->add_option("--report", st.report, "JSON output path (default: stdout)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--train", tr.train_path)->required();
  train_cmd->add_option("--val", tr.val_path)->required();
  train_cmd->add_option("--nodes", tr.nodes);
  train_cmd->add_option("--slots", tr.slots);
  train_cmd->add_option("--mode", tr.mode)->check(CLI::IsMember({"att", "baseline"}));
  train_cmd->add_option("--rank", tr.rank);
  train_cmd->add_option("--window", tr.window, "Temporal dependence depth (default: full)");
  train_cmd->add_option("--max-epochs", tr.max_epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--tol", tr.tol)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lambda", tr.lambda);
  train_cmd->add_option("--lambda-b", tr.lambda_b);
  train_cmd->add_flag("--adapt", tr.adapt, "Adapt lambda/lambda_b by differential evolution");
  train_cmd->add_option("--pop", tr.pop);
  train_cmd->add_option("--scale-factor", tr.scale_factor);
  train_cmd->add_option("--cp", tr.cp);
  train_cmd->add_option("--bounds", tr.bounds, "lambda_min,lambda_max,lambda_b_min,lambda_b_max")
      ->delimiter(',');
  train_cmd->add_option("--best-rule", tr.best_rule)
      ->check(CLI::IsMember({"argmin_h", "paper_f"}));
  train_cmd->add_option("--init-scale", tr.init_scale)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr.seed);
  train_cmd->add_option("--out", tr.out, "Model JSON path")->required();
  train_cmd->add_option("--report", tr.report, "Report JSON path")->required();
  train_cmd->add_option("--threads", tr.threads);
  train_cmd->add_flag("--strict-sequential", tr.strict_sequential);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model on a test tensor");
  evaluate_cmd->add_option("--model", ev.model)->required();
  evaluate_cmd->add_option("--test", ev.test)->required();
  evaluate_cmd->add_option("--report", ev.report)->required();

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Predict a single entry");
  predict_cmd->add_option("--model", pr.model)->required();
  predict_cmd->add_option("--i", pr.i)->required();
  predict_cmd->add_option("--j", pr.j)->required();
  predict_cmd->add_option("--k", pr.k)->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("att");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, err);
    if (split_cmd->parsed()) return cmd_split(sp, err);
    if (stats->parsed()) return cmd_stats(st, out);
    if (train_cmd->parsed()) return cmd_train(tr, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev, err);
    if (predict_cmd->parsed()) return cmd_predict(pr, out);
  } catch (const DivergenceError& e) {
    err << "att: numerical divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const DataError& e) {
    err << "att: data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "att: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::out_of_range& e) {
    err << "att: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace att::cli
