#ifndef ATT_SYNTHETIC_HPP_
#define ATT_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>

#include "att/factor_model.hpp"
#include "att/sparse_tensor.hpp"

namespace att {

struct SyntheticSpec {
  std::size_t n_nodes = 50;
  std::size_t n_slots = 20;
  std::size_t true_rank = 2;
  double density = 0.05;
  // AR(1) coefficient of the temporal factors, in [0, 1).
  double temporal_correlation = 0.9;
  // Standard deviation of the additive Gaussian noise.
  double noise_scale = 0.01;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  SparseTensor tensor;
  FactorModel truth;  // identity temporal weights, window 0
};

// Number of observed cells the generator produces: round(density * N^2 * K).
std::size_t synthetic_count(const SyntheticSpec& spec);

/**
 * Draws a positive ground-truth model and observes round(density * N^2 * K)
 * cells chosen uniformly without replacement.
 *
 * Sender/receiver features lie in (0, 1], biases in (0, 0.1]. Each temporal
 * factor column starts in (0, 1 - rho] and follows
 *   z[k+1] = rho * z[k] + xi,   xi ~ U(0, 1 - rho],
 * so it climbs towards the stationary mean 1/2 and consecutive slots are
 * strongly correlated. Observed values are the
 * biased CP prediction of the truth plus N(0, noise_scale^2) noise, clamped
 * at zero. Entries are ordered by (i, j, k).
 *
 * Throws std::invalid_argument for density outside (0, 1], a correlation
 * outside [0, 1), negative noise, zero rank, or fewer than one observed cell.
 */
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace att

#endif  // ATT_SYNTHETIC_HPP_
