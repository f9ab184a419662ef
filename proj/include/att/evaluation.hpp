#ifndef ATT_EVALUATION_HPP_
#define ATT_EVALUATION_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "att/factor_model.hpp"
#include "att/sparse_tensor.hpp"

namespace att {

// (actual, predicted)
using ValuePair = std::pair<double, double>;

// All three throw std::invalid_argument on empty input.
double rmse(std::span<const ValuePair> pairs);
double mae(std::span<const ValuePair> pairs);
// Validation fitness: sqrt(sum r^2 / 4n) + sum |r| / 2n, i.e. (rmse + mae) / 2.
double h_score(std::span<const ValuePair> pairs);

// First 1-based epoch t >= 2 whose absolute change from epoch t-1 is below
// threshold; the series length when no such epoch exists.
std::size_t convergence_rounds(std::span<const double> values, double threshold);

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

// Pairs every entry's observed value with the model prediction.
std::vector<ValuePair> predictions(const FactorModel& model, const TemporalCache& cache,
                                   const SparseTensor& tensor);
Metrics evaluate(const FactorModel& model, const TemporalCache& cache,
                 const SparseTensor& tensor);
Metrics evaluate(const FactorModel& model, const SparseTensor& tensor);

// {"rmse": r, "mae": m, "h": h, "n_test": n}
nlohmann::json metrics_to_json(const Metrics& m);

}  // namespace att

#endif  // ATT_EVALUATION_HPP_
