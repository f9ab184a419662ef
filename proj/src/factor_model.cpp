#include "att/factor_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "att/errors.hpp"

namespace att {

TemporalWeights::TemporalWeights(std::size_t n_slots, std::size_t window)
    : w_(n_slots, n_slots, 0.0),
      window_(n_slots == 0 ? 0 : std::min(window, n_slots - 1)) {
  for (std::size_t k = 0; k < n_slots; ++k) w_(k, k) = 1.0;
}

void TemporalWeights::set(std::size_t k, std::size_t l, double value) {
  if (k >= n_slots() || !admissible(k, l))
    throw std::out_of_range("temporal weight (" + std::to_string(k) + "," +
                            std::to_string(l) + ") is not learnable");
  w_(k, l) = value;
}

std::size_t TemporalWeights::band_size() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < n_slots(); ++k) n += k - band_begin(k);
  return n;
}

std::vector<double> TemporalWeights::band() const {
  std::vector<double> out;
  out.reserve(band_size());
  for (std::size_t k = 0; k < n_slots(); ++k)
    for (std::size_t l = band_begin(k); l < k; ++l) out.push_back(w_(k, l));
  return out;
}

void TemporalWeights::set_band(std::span<const double> values) {
  if (values.size() != band_size())
    throw DataError("W_band has " + std::to_string(values.size()) +
                    " elements, expected " + std::to_string(band_size()));
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n_slots(); ++k)
    for (std::size_t l = band_begin(k); l < k; ++l) w_(k, l) = values[pos++];
}

void TemporalWeights::reset_identity() {
  for (std::size_t k = 0; k < n_slots(); ++k)
    for (std::size_t l = band_begin(k); l < k; ++l) w_(k, l) = 0.0;
}

bool TemporalWeights::is_identity() const {
  for (std::size_t k = 0; k < n_slots(); ++k)
    for (std::size_t l = 0; l < n_slots(); ++l)
      if (w_(k, l) != (k == l ? 1.0 : 0.0)) return false;
  return true;
}

FactorModel make_zero_model(std::size_t n_nodes, std::size_t n_slots,
                            std::size_t rank, std::size_t window) {
  FactorModel m;
  m.S = Matrix(n_nodes, rank);
  m.U = Matrix(n_nodes, rank);
  m.Z = Matrix(n_slots, rank);
  m.a.assign(n_nodes, 0.0);
  m.c.assign(n_nodes, 0.0);
  m.e.assign(n_slots, 0.0);
  m.W = TemporalWeights(n_slots, window);
  return m;
}

namespace {

void check_values(std::span<const double> values, const char* name) {
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0)
      throw DataError(std::string("parameter ") + name +
                      " has a negative or non-finite element");
}

}  // namespace

void validate(const FactorModel& m) {
  const std::size_t n = m.n_nodes(), k = m.n_slots(), d = m.rank();
  if (d == 0) throw DataError("model rank must be at least 1");
  if (m.U.rows() != n || m.U.cols() != d || m.Z.cols() != d || m.a.size() != n ||
      m.c.size() != n || m.e.size() != k || m.W.n_slots() != k)
    throw DataError("model parameter dimensions disagree");
  check_values(m.S.data(), "S");
  check_values(m.U.data(), "U");
  check_values(m.Z.data(), "Z");
  check_values(m.a, "a");
  check_values(m.c, "c");
  check_values(m.e, "e");
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t l = 0; l < k; ++l) {
      const double w = m.W(r, l);
      if (r == l) {
        if (w != 1.0) throw DataError("temporal weight diagonal must be 1");
      } else if (!m.W.admissible(r, l)) {
        if (w != 0.0) throw DataError("inadmissible temporal weight is nonzero");
      } else if (!std::isfinite(w) || w < 0.0) {
        throw DataError("temporal weight is negative or non-finite");
      }
    }
}

FactorModel init_positive(std::size_t n_nodes, std::size_t n_slots,
                          std::size_t rank, std::size_t window,
                          std::uint64_t seed, double scale) {
  if (rank == 0) throw std::invalid_argument("rank must be at least 1");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("init scale must be positive");

  FactorModel m = make_zero_model(n_nodes, n_slots, rank, window);
  std::mt19937_64 rng(seed);
  // uniform_real_distribution draws [0, scale); reflecting gives (0, scale].
  std::uniform_real_distribution<double> unit(0.0, scale);
  auto draw = [&] { return scale - unit(rng); };

  for (double& v : m.S.data()) v = draw();
  for (double& v : m.U.data()) v = draw();
  for (double& v : m.Z.data()) v = draw();
  for (double& v : m.a) v = draw();
  for (double& v : m.c) v = draw();
  for (double& v : m.e) v = draw();
  std::vector<double> band(m.W.band_size());
  for (double& v : band) v = draw();
  m.W.set_band(band);
  return m;
}

TemporalCache compute_temporal(const FactorModel& m) {
  const std::size_t n_slots = m.n_slots(), rank = m.rank();
  TemporalCache cache;
  cache.z_hat = Matrix(n_slots, rank);
  cache.e_hat.assign(n_slots, 0.0);
  for (std::size_t k = 0; k < n_slots; ++k) {
    auto zk = cache.z_hat.row(k);
    double ek = 0.0;
    for (std::size_t l = m.W.band_begin(k); l <= k; ++l) {
      const double w = m.W(k, l);
      const auto zl = m.Z.row(l);
      for (std::size_t d = 0; d < rank; ++d) zk[d] += w * zl[d];
      ek += w * m.e[l];
    }
    cache.e_hat[k] = ek;
  }
  cache.stale = false;
  return cache;
}

double predict(const FactorModel& m, const TemporalCache& cache, std::size_t i,
               std::size_t j, std::size_t k) {
  if (cache.stale) throw std::logic_error("temporal cache is stale");
  if (i >= m.n_nodes() || j >= m.n_nodes() || k >= m.n_slots())
    throw std::out_of_range("index (" + std::to_string(i) + "," + std::to_string(j) +
                            "," + std::to_string(k) + ") out of range");
  return predict_unchecked(
      m, cache, ObservedEntry{static_cast<Index>(i), static_cast<Index>(j),
                              static_cast<Index>(k), 0.0});
}

double objective(const FactorModel& m, const SparseTensor& entries,
                 const HyperParams& hp) {
  check_compatible(m, entries);
  const TemporalCache cache = compute_temporal(m);
  double loss = 0.0;
  double reg = 0.0;
  for (const auto& x : entries.entries()) {
    const double r = x.value - predict_unchecked(m, cache, x);
    loss += r * r;
    const auto s = m.S.row(x.i);
    const auto u = m.U.row(x.j);
    const auto z = cache.z_hat.row(x.k);
    double feat = 0.0;
    for (std::size_t d = 0; d < s.size(); ++d)
      feat += s[d] * s[d] + u[d] * u[d] + z[d] * z[d];
    const double eh = cache.e_hat[x.k];
    reg += hp.lambda * feat +
           hp.lambda_b * (m.a[x.i] * m.a[x.i] + m.c[x.j] * m.c[x.j] + eh * eh);
  }
  return 0.5 * loss + 0.5 * reg;
}

void check_compatible(const FactorModel& m, const SparseTensor& t) {
  if (t.n_nodes() != m.n_nodes() || t.n_slots() != m.n_slots())
    throw DataError("dimension mismatch: tensor is " + std::to_string(t.n_nodes()) +
                    "x" + std::to_string(t.n_nodes()) + "x" +
                    std::to_string(t.n_slots()) + ", model is " +
                    std::to_string(m.n_nodes()) + "x" + std::to_string(m.n_nodes()) +
                    "x" + std::to_string(m.n_slots()));
}

}  // namespace att
