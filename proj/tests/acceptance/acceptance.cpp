// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "att/dea_tuner.hpp"
#include "att/evaluation.hpp"
#include "att/model_io.hpp"
#include "att/nmu_trainer.hpp"
#include "att/synthetic.hpp"
#include "cli_app.hpp"

namespace {

namespace fs = std::filesystem;
using namespace att;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// The shared synthetic fixture: N=50, K=20, rank 2, density 0.05, AR 0.9,
// noise 0.01, split 7:1:2 with the data seed.
DatasetSplit fixture(std::uint64_t seed, double noise = 0.01) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.noise_scale = noise;
  return split(generate_synthetic(spec).tensor, {7, 1, 2}, seed);
}

std::vector<double> flatten(const FactorModel& m) {
  std::vector<double> out;
  for (const auto& addr : all_parameters(m)) out.push_back(get_parameter(m, addr));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

Outcome gradient_consistency() {
  SyntheticSpec spec{4, 3, 2, 0.5, 0.9, 0.01, 11};
  const SparseTensor t = generate_synthetic(spec).tensor;
  FactorModel m = init_positive(4, 3, 2, 2, 11, 1.0);
  const HyperParams hp{0.03, 0.07};
  const double step = 1e-6;
  double worst = 0.0;
  std::size_t coords = 0;
  for (const auto& addr : all_parameters(m)) {
    const double theta = get_parameter(m, addr);
    set_parameter(m, addr, theta + step);
    const double up = objective(m, t, hp);
    set_parameter(m, addr, theta - step);
    const double down = objective(m, t, hp);
    set_parameter(m, addr, theta);
    const double numeric = (up - down) / (2 * step);
    const double analytic = analytic_gradient(m, t, hp, addr);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    const double rel = scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
    worst = std::max(worst, rel);
    ++coords;
  }
  return {worst < 1e-5, fmt("%.0f coordinates, max relative error %.3g", coords, worst)};
}

Outcome nonnegativity_and_structure() {
  const auto parts = fixture(1);
  FactorModel m = init_positive(50, 20, 2, 19, 1);
  for (int epoch = 0; epoch < 200; ++epoch) nmu_epoch(m, parts.train, {0.01, 0.01});
  const auto v = flatten(m);
  const bool nonneg = std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
  bool structure = true;
  for (std::size_t k = 0; k < 20; ++k)
    for (std::size_t l = 0; l < 20; ++l) {
      if (k == l) structure &= m.W(k, l) == 1.0;
      else if (!m.W.admissible(k, l)) structure &= m.W(k, l) == 0.0;
    }
  const double lowest = *std::min_element(v.begin(), v.end());
  return {nonneg && structure,
          fmt("min parameter %.3g, structure ", lowest) + (structure ? "intact" : "broken")};
}

Outcome fixed_point() {
  SyntheticSpec spec;
  spec.noise_scale = 0.0;
  spec.seed = 1;
  const auto data = generate_synthetic(spec);
  const auto parts = split(data.tensor, {7, 1, 2}, 1);
  FactorModel m = data.truth;
  const auto before = flatten(m);
  nmu_epoch(m, parts.train, {0, 0});
  const auto after = flatten(m);
  double drift = 0.0;
  for (std::size_t p = 0; p < before.size(); ++p)
    drift = std::max(drift, std::abs(after[p] - before[p]));
  FactorModel trained = data.truth;
  const auto report = train(trained, parts.train, parts.validation, {0, 0});
  const bool stopped = report.epochs_run == 2 && report.termination == Termination::tolerance;
  return {drift <= 1e-12 && stopped,
          fmt("max change %.3g, stopped at epoch %.0f via ", drift, report.epochs_run) +
              to_string(report.termination)};
}

// Reference values for seed 1, full window: 29.062327206323555 -> 2.3047255388028232.
Outcome optimization_progress() {
  const auto parts = fixture(1);
  const HyperParams hp{0.01, 0.01};
  FactorModel m = init_positive(50, 20, 2, 19, 1);
  const double initial = objective(m, parts.train, hp);
  for (int epoch = 0; epoch < 100; ++epoch) nmu_epoch(m, parts.train, hp);
  const double final_value = objective(m, parts.train, hp);
  const bool reproduces = std::abs(initial - 29.062327206323555) < 1e-9 &&
                          std::abs(final_value - 2.3047255388028232) < 1e-7;
  return {final_value < 0.5 * initial && reproduces,
          fmt("objective %.6g -> %.6g (ratio %.3g)", initial, final_value,
              final_value / initial)};
}

Outcome temporal_advantage() {
  std::vector<double> att_rmse, base_rmse;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto parts = fixture(seed);
    const HyperParams hp{0.01, 0.01};
    TrainConfig config;
    FactorModel a = init_positive(50, 20, 2, 19, seed);
    train(a, parts.train, parts.validation, hp, config);
    att_rmse.push_back(evaluate(a, parts.test).rmse);
    config.mode = TrainMode::baseline;
    FactorModel b = init_positive(50, 20, 2, 0, seed);
    train(b, parts.train, parts.validation, hp, config);
    base_rmse.push_back(evaluate(b, parts.test).rmse);
  }
  const double ma = median(att_rmse), mb = median(base_rmse);
  return {ma <= mb, fmt("median test RMSE att %.6g vs baseline %.6g", ma, mb)};
}

Outcome metric_identities() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> len(1, 100);
  std::normal_distribution<double> residual(0.0, 2.0);
  double worst = 0.0;
  bool ordered = true;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ValuePair> pairs(len(rng));
    for (auto& p : pairs) p = {5.0, 5.0 + residual(rng)};
    const double r = rmse(pairs), m = mae(pairs);
    worst = std::max(worst, std::abs(h_score(pairs) - (r + m) / 2));
    ordered &= r >= m;
  }
  return {worst <= 1e-12 && ordered,
          fmt("max |H - (RMSE + MAE)/2| %.3g, RMSE >= MAE ", worst) + (ordered ? "always" : "violated")};
}

Outcome dea_closure() {
  const auto parts = fixture(2);
  FactorModel m = init_positive(50, 20, 2, 19, 2);
  DEAConfig dea;
  dea.max_iterations = 30;
  dea.seed = 2;
  TrainConfig tc;
  tc.tolerance = 0.0;
  bool inside = true;
  std::size_t iterations = 0;
  const auto report = adapt_train(m, parts.train, parts.validation, dea, tc, [&](const Swarm& s) {
    ++iterations;
    for (const auto& ind : s.individuals) inside &= dea.bounds.contains(ind.v);
  });
  const auto& tau_h = report.adapt->tau_h;
  bool monotone = tau_h.size() == 30;
  for (std::size_t t = 1; t < tau_h.size(); ++t) monotone &= tau_h[t] <= tau_h[t - 1];
  return {inside && monotone && iterations == 30,
          fmt("%.0f iterations, record H %.6g -> %.6g", iterations, tau_h.front(), tau_h.back())};
}

Outcome determinism() {
  const fs::path dir = fs::path(ATT_TEST_TMPDIR) / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const char* name) { return (dir / name).string(); };
  if (cli({"generate", "--nodes", "50", "--slots", "20", "--rank", "2", "--density", "0.05",
           "--seed", "8", "--out", p("all.coo")}) != 0 ||
      cli({"split", "--input", p("all.coo"), "--seed", "8", "--train-out", p("train.coo"),
           "--val-out", p("val.coo"), "--test-out", p("test.coo")}) != 0)
    return {false, "fixture generation failed"};
  auto train_run = [&](const std::string& tag, std::vector<std::string> extra) {
    std::vector<std::string> args{"train", "--train", p("train.coo"), "--val", p("val.coo"),
                                  "--rank", "4", "--max-epochs", "200", "--seed", "8",
                                  "--out", (dir / (tag + "_model.json")).string(),
                                  "--report", (dir / (tag + "_report.json")).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  if (train_run("a", {"--strict-sequential"}) || train_run("b", {"--strict-sequential"}) ||
      train_run("t", {"--threads", "4"}))
    return {false, "train run failed"};
  const bool bytes = slurp(dir / "a_model.json") == slurp(dir / "b_model.json") &&
                     slurp(dir / "a_report.json") == slurp(dir / "b_report.json");
  const auto seq = flatten(load_model((dir / "a_model.json").string()).model);
  const auto par = flatten(load_model((dir / "t_model.json").string()).model);
  double worst = seq.size() == par.size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < std::min(seq.size(), par.size()); ++i) {
    const double scale = std::max(std::abs(seq[i]), std::abs(par[i]));
    if (scale > 0) worst = std::max(worst, std::abs(seq[i] - par[i]) / scale);
  }
  return {bytes && worst <= 1e-9,
          std::string(bytes ? "sequential runs byte-identical" : "sequential runs differ") +
              fmt(", 4-thread max relative difference %.3g", worst)};
}

Outcome baseline_equivalence() {
  const auto parts = fixture(3);
  FactorModel a = init_positive(50, 20, 2, 0, 3);
  FactorModel b = a;
  TrainConfig config;
  const auto ra = train(a, parts.train, parts.validation, {0.01, 0.01}, config);
  config.mode = TrainMode::baseline;
  const auto rb = train(b, parts.train, parts.validation, {0.01, 0.01}, config);
  return {ra.per_epoch_h == rb.per_epoch_h,
          fmt("%.0f vs %.0f epochs, series ", ra.epochs_run, rb.epochs_run) +
              (ra.per_epoch_h == rb.per_epoch_h ? "bit-identical" : "differ")};
}

Outcome stats_reporting() {
  const fs::path dir = fs::path(ATT_TEST_TMPDIR) / "stats";
  fs::create_directories(dir);
  const std::size_t n = 40072, k = 318, count = 24638;
  {
    std::ofstream out(dir / "d1.coo");
    out << "%dims " << n << ' ' << n << ' ' << k << '\n';
    // Distinct cells: the sender index alone separates entries.
    for (std::size_t p = 0; p < count; ++p)
      out << p << ' ' << (p * 7919) % n << ' ' << p % k << " 1\n";
  }
  if (cli({"stats", "--input", (dir / "d1.coo").string(), "--report",
           (dir / "d1.json").string()}) != 0)
    return {false, "stats command failed"};
  const auto doc = read_json_file((dir / "d1.json").string());
  const double density = doc.at("density").get<double>();
  char rounded[32];
  std::snprintf(rounded, sizeof rounded, "%.2e", density);
  return {std::string(rounded) == "4.82e-08" && doc.at("observed").get<std::size_t>() == count,
          fmt("density %.6g", density)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double time_limit_s;  // 0: no limit
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"gradient consistency", gradient_consistency, 1.0},
      {"nonnegativity and structure", nonnegativity_and_structure, 10.0},
      {"fixed point", fixed_point, 0.0},
      {"optimization progress", optimization_progress, 0.0},
      {"temporal-dependence advantage", temporal_advantage, 120.0},
      {"metric identities", metric_identities, 0.0},
      {"DEA closure and monotonicity", dea_closure, 0.0},
      {"determinism", determinism, 0.0},
      {"baseline equivalence", baseline_equivalence, 0.0},
      {"stats reporting", stats_reporting, 0.0},
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[c].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[c].time_limit_s > 0 && secs >= criteria[c].time_limit_s) {
      outcome.pass = false;
      outcome.detail += fmt(" (time limit %.0f s exceeded)", criteria[c].time_limit_s);
    }
    std::printf("%s %2zu %s: %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL", c + 1,
                criteria[c].name, outcome.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !outcome.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
