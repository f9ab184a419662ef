#ifndef ATT_FACTOR_MODEL_HPP_
#define ATT_FACTOR_MODEL_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "att/sparse_tensor.hpp"

namespace att {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/**
 * Lower-triangular temporal dependence weights over K slots.
 *
 * Slot k mixes the features of slots l in [k - window, k] with weight w(k, l).
 * The diagonal is fixed at 1; everything above it and everything further than
 * `window` below it is fixed at 0. Only the strictly-lower band is learnable.
 */
class TemporalWeights {
 public:
  TemporalWeights() = default;
  // Identity weights with the given band width.
  TemporalWeights(std::size_t n_slots, std::size_t window);

  std::size_t n_slots() const { return w_.rows(); }
  std::size_t window() const { return window_; }

  double operator()(std::size_t k, std::size_t l) const { return w_(k, l); }

  // First slot l that slot k may depend on.
  std::size_t band_begin(std::size_t k) const { return k > window_ ? k - window_ : 0; }
  // One past the last slot k that may depend on slot l.
  std::size_t dependents_end(std::size_t l) const {
    return std::min(n_slots(), l + window_ + 1);
  }
  bool admissible(std::size_t k, std::size_t l) const {
    return l < k && k - l <= window_;
  }

  // Sets an admissible strictly-lower element. Throws std::out_of_range
  // for the diagonal or anything outside the band.
  void set(std::size_t k, std::size_t l, double value);

  // Number of admissible strictly-lower elements.
  std::size_t band_size() const;
  // Admissible elements, row-major by k then l.
  std::vector<double> band() const;
  void set_band(std::span<const double> values);

  // Zeroes the strictly-lower band, leaving the identity.
  void reset_identity();
  bool is_identity() const;

  const Matrix& dense() const { return w_; }

  friend bool operator==(const TemporalWeights&, const TemporalWeights&) = default;

 private:
  Matrix w_;
  std::size_t window_ = 0;
};

struct HyperParams {
  double lambda = 0.0;
  double lambda_b = 0.0;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// All learnable parameters: sender, receiver and temporal features with
/// their biases, plus the temporal weights.
struct FactorModel {
  Matrix S;  // N x D
  Matrix U;  // N x D
  Matrix Z;  // K x D
  std::vector<double> a;  // N
  std::vector<double> c;  // N
  std::vector<double> e;  // K
  TemporalWeights W;

  std::size_t n_nodes() const { return S.rows(); }
  std::size_t n_slots() const { return Z.rows(); }
  std::size_t rank() const { return S.cols(); }
  std::size_t window() const { return W.window(); }

  friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

// Zero-filled model with identity weights.
FactorModel make_zero_model(std::size_t n_nodes, std::size_t n_slots,
                            std::size_t rank, std::size_t window);

// Checks dimensions, finiteness, nonnegativity and the structural
// constraints on W. Throws DataError describing the first violation.
void validate(const FactorModel& model);

// Every feature and bias uniform on (0, scale]; admissible band elements of
// W uniform on (0, scale]. window is clamped to n_slots - 1.
FactorModel init_positive(std::size_t n_nodes, std::size_t n_slots,
                          std::size_t rank, std::size_t window,
                          std::uint64_t seed, double scale = 0.1);

/// Temporal-dependent features and biases: z_hat = W Z, e_hat = W e.
struct TemporalCache {
  Matrix z_hat;
  std::vector<double> e_hat;
  bool stale = true;
};

TemporalCache compute_temporal(const FactorModel& model);

// Biased CP prediction through the temporal cache. Throws std::logic_error
// on a stale cache and std::out_of_range on bad indices.
double predict(const FactorModel& model, const TemporalCache& cache,
               std::size_t i, std::size_t j, std::size_t k);

// Unchecked prediction for hot loops.
inline double predict_unchecked(const FactorModel& model, const TemporalCache& cache,
                                const ObservedEntry& x) {
  const auto s = model.S.row(x.i);
  const auto u = model.U.row(x.j);
  const auto z = cache.z_hat.row(x.k);
  double acc = 0.0;
  for (std::size_t d = 0; d < s.size(); ++d) acc += s[d] * u[d] * z[d];
  return acc + model.a[x.i] + model.c[x.j] + cache.e_hat[x.k];
}

// Regularized squared loss over the given entries. The regularizers are
// summed per observed entry, so a parameter touched by m entries is
// penalized m times.
double objective(const FactorModel& model, const SparseTensor& entries,
                 const HyperParams& hp);

// Throws DataError when the tensor's dims differ from the model's.
void check_compatible(const FactorModel& model, const SparseTensor& tensor);

}  // namespace att

#endif  // ATT_FACTOR_MODEL_HPP_
