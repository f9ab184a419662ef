#ifndef ATT_SPARSE_TENSOR_HPP_
#define ATT_SPARSE_TENSOR_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace att {

using Index = std::uint32_t;

/// One observed interaction x_ijk: sender i, receiver j, temporal slot k.
struct ObservedEntry {
  Index i = 0;
  Index j = 0;
  Index k = 0;
  double value = 0.0;

  friend bool operator==(const ObservedEntry&, const ObservedEntry&) = default;
};

struct TensorDims {
  std::size_t n_nodes = 0;
  std::size_t n_slots = 0;
};

/**
 * The observed entry set of an N x N x K nonnegative tensor.
 *
 * Entries keep their insertion order. Three bucket indexes map every sender,
 * receiver and slot to the positions (into entries()) of the entries that
 * touch it; each bucket lists positions in increasing order.
 *
 * Construction validates bounds, nonnegativity, finiteness and uniqueness of
 * (i, j, k). The object is immutable afterwards.
 */
class SparseTensor {
 public:
  SparseTensor() = default;
  SparseTensor(std::size_t n_nodes, std::size_t n_slots,
               std::vector<ObservedEntry> entries);

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t n_slots() const { return n_slots_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::span<const ObservedEntry> entries() const { return entries_; }
  const ObservedEntry& operator[](std::size_t pos) const { return entries_[pos]; }

  std::span<const std::size_t> by_sender(std::size_t i) const;
  std::span<const std::size_t> by_receiver(std::size_t j) const;
  std::span<const std::size_t> by_slot(std::size_t k) const;

 private:
  // CSR-style buckets: offsets has n+1 elements, positions |Omega| elements.
  struct Buckets {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> positions;
    std::span<const std::size_t> bucket(std::size_t b) const {
      return std::span<const std::size_t>(positions).subspan(
          offsets[b], offsets[b + 1] - offsets[b]);
    }
  };
  template <class Key>
  static Buckets build_buckets(const std::vector<ObservedEntry>& entries,
                               std::size_t n, Key key);

  std::size_t n_nodes_ = 0;
  std::size_t n_slots_ = 0;
  std::vector<ObservedEntry> entries_;
  Buckets senders_;
  Buckets receivers_;
  Buckets slots_;
};

/// Train / validation / test partition of an observed set.
struct DatasetSplit {
  SparseTensor train;
  SparseTensor validation;
  SparseTensor test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{};
};

struct DatasetStats {
  std::size_t n_nodes = 0;
  std::size_t n_slots = 0;
  std::size_t observed = 0;
  double density = 0.0;
};

// Reads COO text: one `i j k value` record per line, `#` comment lines and
// blank lines skipped, optional `%dims N N K` as the first non-comment line.
// When `dims` is given and a header is present, both must agree. Errors are
// reported as DataError carrying the offending line number.
SparseTensor read_coo(std::istream& in, std::optional<TensorDims> dims = {});
SparseTensor load_coo(std::istream& in, std::size_t n_nodes, std::size_t n_slots);
SparseTensor load_coo_file(const std::string& path,
                           std::optional<TensorDims> dims = {});

// Writes a `%dims` header followed by the entries in order, values in
// shortest round-trip form.
void write_coo(std::ostream& out, const SparseTensor& tensor);
void write_coo_file(const std::string& path, const SparseTensor& tensor);

// Shuffle-then-slice: part sizes are floor(ratio_m / sum * |Omega|) for
// validation and test; training takes the remainder.
DatasetSplit split(const SparseTensor& tensor, std::array<double, 3> ratios,
                   std::uint64_t seed);

DatasetStats compute_stats(const SparseTensor& tensor);
DatasetStats compute_stats(std::size_t n_nodes, std::size_t n_slots,
                           std::size_t observed);

}  // namespace att

#endif  // ATT_SPARSE_TENSOR_HPP_
