#include "att/dea_tuner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "att/errors.hpp"
#include "att/parallel.hpp"

namespace att {

std::string to_string(BestRule rule) {
  return rule == BestRule::paper_f ? "paper_f" : "argmin_h";
}

BestRule parse_best_rule(const std::string& text) {
  if (text == "paper_f") return BestRule::paper_f;
  if (text == "argmin_h") return BestRule::argmin_h;
  throw std::invalid_argument("unknown best rule '" + text + "'");
}

bool HyperBounds::contains(const HyperVector& v) const {
  for (std::size_t m = 0; m < 2; ++m)
    if (!(v[m] >= lower(m) && v[m] <= upper(m))) return false;
  return true;
}

void validate(const DEAConfig& c) {
  if (c.population < 4) throw std::invalid_argument("population must be at least 4");
  if (c.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!std::isfinite(c.scale_factor)) throw std::invalid_argument("scale factor must be finite");
  if (!(c.crossover_prob >= 0.0 && c.crossover_prob <= 1.0))
    throw std::invalid_argument("crossover probability must be in [0,1]");
  for (std::size_t m = 0; m < 2; ++m) {
    const double lo = c.bounds.lower(m), hi = c.bounds.upper(m);
    if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi))
      throw std::invalid_argument("hyperparameter bounds must satisfy 0 <= min <= max");
  }
}

HyperVector sample_in_bounds(const HyperBounds& b, double theta_lambda,
                             double theta_lambda_b) {
  return {b.lambda_min + theta_lambda * (b.lambda_max - b.lambda_min),
          b.lambda_b_min + theta_lambda_b * (b.lambda_b_max - b.lambda_b_min)};
}

HyperVector clamp_to_bounds(HyperVector v, const HyperBounds& b) {
  for (std::size_t m = 0; m < 2; ++m) v[m] = std::clamp(v[m], b.lower(m), b.upper(m));
  return v;
}

Swarm init_swarm(const DEAConfig& config, const FactorModel& model_template) {
  validate(config);
  Swarm swarm;
  swarm.individuals.resize(config.population);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t p = 0; p < config.population; ++p) {
    Individual& ind = swarm.individuals[p];
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(p)};
    ind.rng.seed(seq);
    const double theta_l = unit(ind.rng);
    const double theta_b = unit(ind.rng);
    ind.v = sample_in_bounds(config.bounds, theta_l, theta_b);
    ind.model = model_template;
  }
  swarm.tau = swarm.individuals.front().v;
  return swarm;
}

HyperVector mutate(const HyperVector& tau, const HyperVector& v_r1,
                   const HyperVector& v_r2, double scale_factor) {
  return {tau[0] + scale_factor * (v_r1[0] - v_r2[0]),
          tau[1] + scale_factor * (v_r1[1] - v_r2[1])};
}

HyperVector mutate_and_bound(Swarm& swarm, std::size_t p, const DEAConfig& config) {
  const std::size_t n = swarm.individuals.size();
  if (n < 3) throw std::invalid_argument("mutation needs at least 3 individuals");
  auto& rng = swarm.individuals.at(p).rng;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t r1 = pick(rng);
  while (r1 == p) r1 = pick(rng);
  std::size_t r2 = pick(rng);
  while (r2 == p || r2 == r1) r2 = pick(rng);
  const HyperVector mutant = mutate(swarm.tau, swarm.individuals[r1].v,
                                    swarm.individuals[r2].v, config.scale_factor);
  return clamp_to_bounds(mutant, config.bounds);
}

HyperVector crossover(const HyperVector& previous, const HyperVector& mutant,
                      double crossover_prob, std::size_t forced_dim,
                      const std::array<double, 2>& thetas) {
  HyperVector trial = previous;
  for (std::size_t m = 0; m < 2; ++m)
    if (thetas[m] <= crossover_prob || m == forced_dim) trial[m] = mutant[m];
  return trial;
}

HyperVector crossover(const HyperVector& previous, const HyperVector& mutant,
                      const DEAConfig& config, std::mt19937_64& rng) {
  const std::size_t forced = std::uniform_int_distribution<std::size_t>(0, 1)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double t0 = unit(rng);
  const double t1 = unit(rng);
  return crossover(previous, mutant, config.crossover_prob, forced, {t0, t1});
}

double evaluate_individual(Individual& ind, const SparseTensor& train,
                           const SparseTensor& validation, const TrainConfig& config) {
  nmu_epoch(ind.model, train, to_hyper_params(ind.v), config);
  ind.metrics = evaluate(ind.model, validation);
  ind.h_current = ind.metrics.h;
  return ind.h_current;
}

std::optional<std::vector<double>> paper_fitness(std::span<const double> h_values,
                                                 double h_last) {
  if (h_values.empty()) return std::nullopt;
  const double denom = h_values.back() - h_last;
  if (denom == 0.0 || !std::isfinite(denom)) return std::nullopt;
  std::vector<double> f(h_values.size());
  double previous = h_last;
  for (std::size_t p = 0; p < h_values.size(); ++p) {
    f[p] = (h_values[p] - previous) / denom;
    previous = h_values[p];
  }
  return f;
}

void update_best(Swarm& swarm, BestRule rule, std::span<const double> fitness) {
  auto& inds = swarm.individuals;
  if (rule == BestRule::paper_f && fitness.size() == inds.size()) {
    double previous = 0.0;
    for (std::size_t p = 0; p < inds.size(); ++p) {
      if (fitness[p] > previous) {
        swarm.tau = inds[p].v;
        swarm.tau_h = inds[p].h_current;
      }
      previous = fitness[p];
    }
    return;
  }
  const auto best = std::min_element(
      inds.begin(), inds.end(),
      [](const Individual& x, const Individual& y) { return x.h_current < y.h_current; });
  if (best != inds.end() && best->h_current < swarm.tau_h) {
    swarm.tau = best->v;
    swarm.tau_h = best->h_current;
  }
}

TrainReport adapt_train(FactorModel& model, const SparseTensor& train,
                        const SparseTensor& validation, const DEAConfig& dea,
                        const TrainConfig& tc, const SwarmObserver& observer) {
  validate(dea);
  if (validation.empty()) throw DataError("validation set is empty");
  if (tc.max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  check_compatible(model, train);
  check_compatible(model, validation);

  Swarm swarm = init_swarm(dea, model);
  auto& inds = swarm.individuals;
  const std::size_t n = inds.size();
  double h_last = evaluate(model, validation).h;

  TrainConfig inner = tc;
  inner.threads = 1;

  TrainReport report;
  AdaptSummary summary;
  summary.population = n;
  summary.best_rule = to_string(dea.best_rule);
  report.termination = Termination::max_epochs;
  std::size_t best_index = 0;

  const std::size_t iterations = std::min(dea.max_iterations, tc.max_epochs);
  for (std::size_t t = 1; t <= iterations; ++t) {
    swarm.iteration = t;
    parallel_for(n, tc.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t p = b; p < e; ++p) evaluate_individual(inds[p], train, validation, inner);
    });

    std::vector<double> h_values(n);
    for (std::size_t p = 0; p < n; ++p) h_values[p] = inds[p].h_current;

    std::optional<std::vector<double>> fitness;
    if (dea.best_rule == BestRule::paper_f) fitness = paper_fitness(h_values, h_last);
    if (fitness)
      for (std::size_t p = 0; p < n; ++p) inds[p].fitness = (*fitness)[p];
    update_best(swarm, dea.best_rule, fitness ? std::span<const double>(*fitness)
                                              : std::span<const double>());
    h_last = h_values.back();

    best_index = static_cast<std::size_t>(
        std::min_element(h_values.begin(), h_values.end()) - h_values.begin());
    const Metrics& best = inds[best_index].metrics;
    report.per_epoch_rmse.push_back(best.rmse);
    report.per_epoch_mae.push_back(best.mae);
    report.per_epoch_h.push_back(best.h);
    summary.tau_h.push_back(swarm.tau_h);
    report.epochs_run = t;

    // Vectors for the next iteration are bred from this iteration's vectors.
    std::vector<HyperVector> next(n);
    for (std::size_t p = 0; p < n; ++p) {
      const HyperVector mutant = mutate_and_bound(swarm, p, dea);
      next[p] = crossover(inds[p].v, mutant, dea, inds[p].rng);
    }
    for (std::size_t p = 0; p < n; ++p) inds[p].v = next[p];
    if (observer) observer(swarm);

    const auto& h = report.per_epoch_h;
    if (t >= 2 && std::abs(h[t - 1] - h[t - 2]) < tc.tolerance) {
      report.termination = Termination::tolerance;
      break;
    }
  }

  model = inds[best_index].model;
  report.final_hp = to_hyper_params(swarm.tau);
  summary.best = report.final_hp;
  report.adapt = std::move(summary);
  report.cr_rmse = convergence_rounds(report.per_epoch_rmse, tc.tolerance);
  report.cr_mae = convergence_rounds(report.per_epoch_mae, tc.tolerance);
  return report;
}

}  // namespace att
