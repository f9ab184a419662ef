#ifndef ATT_DEA_TUNER_HPP_
#define ATT_DEA_TUNER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "att/evaluation.hpp"
#include "att/factor_model.hpp"
#include "att/nmu_trainer.hpp"
#include "att/sparse_tensor.hpp"

namespace att {

// (lambda, lambda_b)
using HyperVector = std::array<double, 2>;

inline HyperParams to_hyper_params(const HyperVector& v) { return {v[0], v[1]}; }
inline HyperVector to_vector(const HyperParams& hp) { return {hp.lambda, hp.lambda_b}; }

enum class BestRule {
  paper_f,   // normalized consecutive-difference fitness with a neighbour sweep
  argmin_h,  // lowest validation H, accepted only if it beats the record
};

std::string to_string(BestRule rule);
BestRule parse_best_rule(const std::string& text);

struct HyperBounds {
  double lambda_min = 1e-4;
  double lambda_max = 0.5;
  double lambda_b_min = 1e-4;
  double lambda_b_max = 0.5;

  double lower(std::size_t dim) const { return dim == 0 ? lambda_min : lambda_b_min; }
  double upper(std::size_t dim) const { return dim == 0 ? lambda_max : lambda_b_max; }
  bool contains(const HyperVector& v) const;
};

struct DEAConfig {
  std::size_t population = 10;
  std::size_t max_iterations = 1000;
  double scale_factor = 0.4;
  double crossover_prob = 0.9;
  HyperBounds bounds;
  BestRule best_rule = BestRule::argmin_h;
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument for population < 4, unordered or negative
// bounds, a non-finite scale factor, or a crossover probability outside [0,1].
void validate(const DEAConfig& config);

struct Individual {
  HyperVector v{};
  FactorModel model;
  double h_current = std::numeric_limits<double>::quiet_NaN();
  Metrics metrics;  // validation metrics behind h_current
  double fitness = 0.0;
  // Private stream, seeded from (master seed, index).
  std::mt19937_64 rng;
};

struct Swarm {
  std::vector<Individual> individuals;
  HyperVector tau{};
  double tau_h = std::numeric_limits<double>::infinity();
  std::size_t iteration = 0;
};

// lower + theta * (upper - lower) per dimension.
HyperVector sample_in_bounds(const HyperBounds& bounds, double theta_lambda,
                             double theta_lambda_b);
HyperVector clamp_to_bounds(HyperVector v, const HyperBounds& bounds);

// Each individual receives a uniform draw inside the bounds and its own copy
// of the template. tau starts at the first individual's vector with an
// unbeaten (infinite) record.
Swarm init_swarm(const DEAConfig& config, const FactorModel& model_template);

// tau + mu * (v_r1 - v_r2), unbounded.
HyperVector mutate(const HyperVector& tau, const HyperVector& v_r1,
                   const HyperVector& v_r2, double scale_factor);

// Draws r1 != r2, both != p, from individual p's stream, mutates around
// tau, and clamps into the bounds.
HyperVector mutate_and_bound(Swarm& swarm, std::size_t p, const DEAConfig& config);

// Dimension m takes the mutant component when thetas[m] <= crossover_prob or
// m == forced_dim, and keeps the previous component otherwise.
HyperVector crossover(const HyperVector& previous, const HyperVector& mutant,
                      double crossover_prob, std::size_t forced_dim,
                      const std::array<double, 2>& thetas);
HyperVector crossover(const HyperVector& previous, const HyperVector& mutant,
                      const DEAConfig& config, std::mt19937_64& rng);

// One NMU epoch on the individual's private model under its own
// hyperparameters, then validation H of the updated model.
double evaluate_individual(Individual& individual, const SparseTensor& train,
                           const SparseTensor& validation, const TrainConfig& config);

// F_p = (H_p - H_{p-1}) / (H_P - h_last) with H_0 = h_last. Returns nullopt
// when the denominator is zero (fitness undefined).
std::optional<std::vector<double>> paper_fitness(std::span<const double> h_values,
                                                 double h_last);

// argmin_h: adopts the lowest-H individual if it beats tau's record.
// paper_f: sweeps p = 1..P and adopts v_p whenever F_p > F_{p-1}, with the
// comparison for p = 1 made against 0. Empty fitness falls back to argmin_h.
void update_best(Swarm& swarm, BestRule rule, std::span<const double> fitness = {});

// Called once per iteration after the next-iteration vectors are produced.
using SwarmObserver = std::function<void(const Swarm&)>;

/**
 * Hyperparameter-adaptive training.
 *
 * Each iteration runs one NMU epoch per individual, scores every individual
 * on the validation set, updates tau under the configured rule, and breeds
 * next-iteration vectors by mutation, bounding and crossover. Runs at most
 * min(max_iterations, train_config.max_epochs) iterations, stopping early
 * when the per-iteration best H changes by less than the tolerance.
 *
 * On return `model` holds the lowest-H individual's replica from the last
 * iteration. The report's per-epoch series follow that best individual and
 * final_hp is tau. train_config.threads spreads individuals across threads.
 */
TrainReport adapt_train(FactorModel& model, const SparseTensor& train,
                        const SparseTensor& validation, const DEAConfig& dea,
                        const TrainConfig& train_config,
                        const SwarmObserver& observer = {});

}  // namespace att

#endif  // ATT_DEA_TUNER_HPP_
