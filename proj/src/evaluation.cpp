#include "att/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace att {

namespace {

struct Sums {
  double squared = 0.0;
  double absolute = 0.0;
  double n = 0.0;
};

Sums residual_sums(std::span<const ValuePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("metric over an empty set");
  Sums s;
  for (const auto& [actual, predicted] : pairs) {
    const double r = actual - predicted;
    s.squared += r * r;
    s.absolute += std::abs(r);
  }
  s.n = static_cast<double>(pairs.size());
  return s;
}

}  // namespace

double rmse(std::span<const ValuePair> pairs) {
  const Sums s = residual_sums(pairs);
  return std::sqrt(s.squared / s.n);
}

double mae(std::span<const ValuePair> pairs) {
  const Sums s = residual_sums(pairs);
  return s.absolute / s.n;
}

double h_score(std::span<const ValuePair> pairs) {
  const Sums s = residual_sums(pairs);
  return std::sqrt(s.squared / (4.0 * s.n)) + s.absolute / (2.0 * s.n);
}

std::size_t convergence_rounds(std::span<const double> values, double threshold) {
  for (std::size_t t = 1; t < values.size(); ++t)
    if (std::abs(values[t] - values[t - 1]) < threshold) return t + 1;
  return values.size();
}

std::vector<ValuePair> predictions(const FactorModel& model, const TemporalCache& cache,
                                   const SparseTensor& tensor) {
  check_compatible(model, tensor);
  if (cache.stale) throw std::logic_error("temporal cache is stale");
  std::vector<ValuePair> out;
  out.reserve(tensor.size());
  for (const auto& x : tensor.entries())
    out.emplace_back(x.value, predict_unchecked(model, cache, x));
  return out;
}

Metrics evaluate(const FactorModel& model, const TemporalCache& cache,
                 const SparseTensor& tensor) {
  const auto pairs = predictions(model, cache, tensor);
  Metrics m;
  m.rmse = rmse(pairs);
  m.mae = mae(pairs);
  m.h = h_score(pairs);
  m.count = pairs.size();
  return m;
}

Metrics evaluate(const FactorModel& model, const SparseTensor& tensor) {
  return evaluate(model, compute_temporal(model), tensor);
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"rmse", m.rmse}, {"mae", m.mae}, {"h", m.h}, {"n_test", m.count}};
}

}  // namespace att
