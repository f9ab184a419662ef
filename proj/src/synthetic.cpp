#include "att/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace att {

std::size_t synthetic_count(const SyntheticSpec& spec) {
  const double cells = static_cast<double>(spec.n_nodes) *
                       static_cast<double>(spec.n_nodes) *
                       static_cast<double>(spec.n_slots);
  return static_cast<std::size_t>(std::llround(spec.density * cells));
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (!(spec.density > 0.0 && spec.density <= 1.0))
    throw std::invalid_argument("density must be in (0,1]");
  if (!(spec.temporal_correlation >= 0.0 && spec.temporal_correlation < 1.0))
    throw std::invalid_argument("temporal correlation must be in [0,1)");
  if (!(spec.noise_scale >= 0.0) || !std::isfinite(spec.noise_scale))
    throw std::invalid_argument("noise scale must be nonnegative");
  if (spec.true_rank == 0) throw std::invalid_argument("rank must be at least 1");

  const std::uint64_t cells =
      static_cast<std::uint64_t>(spec.n_nodes) * spec.n_nodes * spec.n_slots;
  const std::size_t count = synthetic_count(spec);
  if (count < 1) throw std::invalid_argument("density yields no observed entries");
  if (count > cells)
    throw std::invalid_argument("requested observed count exceeds N*N*K");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto positive = [&](double hi) { return hi * (1.0 - unit(rng)); };  // (0, hi]

  SyntheticData out;
  FactorModel& truth = out.truth;
  truth = make_zero_model(spec.n_nodes, spec.n_slots, spec.true_rank, 0);
  for (double& v : truth.S.data()) v = positive(1.0);
  for (double& v : truth.U.data()) v = positive(1.0);
  const double rho = spec.temporal_correlation;
  for (std::size_t d = 0; d < spec.true_rank; ++d) {
    if (spec.n_slots == 0) break;
    // Starts below the stationary level, so the column climbs.
    truth.Z(0, d) = positive(1.0 - rho);
    for (std::size_t k = 1; k < spec.n_slots; ++k)
      truth.Z(k, d) = rho * truth.Z(k - 1, d) + positive(1.0 - rho);
  }
  for (double& v : truth.a) v = positive(0.1);
  for (double& v : truth.c) v = positive(0.1);
  for (double& v : truth.e) v = positive(0.1);

  // Floyd's sampling of `count` distinct cells out of `cells`.
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count);
  for (std::uint64_t j = cells - count; j < cells; ++j) {
    const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> cell_ids(chosen.begin(), chosen.end());
  std::sort(cell_ids.begin(), cell_ids.end());

  const TemporalCache cache = compute_temporal(truth);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<ObservedEntry> entries;
  entries.reserve(count);
  for (std::uint64_t id : cell_ids) {
    ObservedEntry x;
    x.k = static_cast<Index>(id % spec.n_slots);
    x.j = static_cast<Index>((id / spec.n_slots) % spec.n_nodes);
    x.i = static_cast<Index>(id / (spec.n_slots * spec.n_nodes));
    const double clean = predict_unchecked(truth, cache, x);
    const double eps = noise(rng);
    x.value = spec.noise_scale > 0.0 ? std::max(0.0, clean + spec.noise_scale * eps)
                                     : clean;
    entries.push_back(x);
  }
  out.tensor = SparseTensor(spec.n_nodes, spec.n_slots, std::move(entries));
  return out;
}

}  // namespace att
