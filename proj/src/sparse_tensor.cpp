#include "att/sparse_tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "att/errors.hpp"

namespace att {

namespace {

std::uint64_t cell_key(const ObservedEntry& e, std::size_t n_nodes,
                       std::size_t n_slots) {
  return (static_cast<std::uint64_t>(e.i) * n_nodes + e.j) * n_slots + e.k;
}

std::string describe(const ObservedEntry& e) {
  std::ostringstream os;
  os << "(" << e.i << "," << e.j << "," << e.k << ")";
  return os.str();
}

// Validates one entry, returning an empty string when it is admissible.
std::string check_entry(const ObservedEntry& e, std::size_t n_nodes,
                        std::size_t n_slots) {
  if (e.i >= n_nodes || e.j >= n_nodes || e.k >= n_slots) {
    std::ostringstream os;
    os << "index " << describe(e) << " out of bounds for dims (" << n_nodes
       << "," << n_nodes << "," << n_slots << ")";
    return os.str();
  }
  if (!std::isfinite(e.value)) return "non-finite value";
  if (e.value < 0.0) return "negative value";
  return {};
}

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
      ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])))
      ++end;
    tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars rejects a leading '+', which strtod-style writers emit.
    if (first != last && *first == '+') ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

[[noreturn]] void fail_at(std::size_t line_no, const std::string& what) {
  throw DataError(what + " at line " + std::to_string(line_no));
}

}  // namespace

template <class Key>
SparseTensor::Buckets SparseTensor::build_buckets(
    const std::vector<ObservedEntry>& entries, std::size_t n, Key key) {
  Buckets b;
  b.offsets.assign(n + 1, 0);
  for (const auto& e : entries) ++b.offsets[key(e) + 1];
  std::partial_sum(b.offsets.begin(), b.offsets.end(), b.offsets.begin());
  b.positions.resize(entries.size());
  std::vector<std::size_t> cursor(b.offsets.begin(), b.offsets.end() - 1);
  for (std::size_t pos = 0; pos < entries.size(); ++pos)
    b.positions[cursor[key(entries[pos])]++] = pos;
  return b;
}

SparseTensor::SparseTensor(std::size_t n_nodes, std::size_t n_slots,
                           std::vector<ObservedEntry> entries)
    : n_nodes_(n_nodes), n_slots_(n_slots), entries_(std::move(entries)) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (auto msg = check_entry(e, n_nodes_, n_slots_); !msg.empty())
      throw DataError(msg + " in entry " + describe(e));
    if (!seen.insert(cell_key(e, n_nodes_, n_slots_)).second)
      throw DataError("duplicate " + describe(e));
  }
  senders_ = build_buckets(entries_, n_nodes_, [](const ObservedEntry& e) { return e.i; });
  receivers_ = build_buckets(entries_, n_nodes_, [](const ObservedEntry& e) { return e.j; });
  slots_ = build_buckets(entries_, n_slots_, [](const ObservedEntry& e) { return e.k; });
}

std::span<const std::size_t> SparseTensor::by_sender(std::size_t i) const {
  return senders_.bucket(i);
}
std::span<const std::size_t> SparseTensor::by_receiver(std::size_t j) const {
  return receivers_.bucket(j);
}
std::span<const std::size_t> SparseTensor::by_slot(std::size_t k) const {
  return slots_.bucket(k);
}

SparseTensor read_coo(std::istream& in, std::optional<TensorDims> dims) {
  std::vector<ObservedEntry> entries;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  bool saw_record = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = tokenize(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;

    if (tokens.front() == "%dims") {
      if (saw_record) fail_at(line_no, "%dims header after data records");
      std::size_t n1 = 0, n2 = 0, k = 0;
      if (tokens.size() != 4 || !parse_number(tokens[1], n1) ||
          !parse_number(tokens[2], n2) || !parse_number(tokens[3], k))
        fail_at(line_no, "malformed %dims header");
      if (n1 != n2) fail_at(line_no, "non-square %dims header");
      if (dims && (dims->n_nodes != n1 || dims->n_slots != k))
        fail_at(line_no, "%dims header disagrees with declared dims");
      dims = TensorDims{n1, k};
      saw_record = true;
      continue;
    }
    saw_record = true;
    if (!dims) fail_at(line_no, "tensor dims unknown (no %dims header and none declared)");

    if (tokens.size() != 4)
      fail_at(line_no, "expected 4 fields, got " + std::to_string(tokens.size()));
    std::uint64_t i = 0, j = 0, k = 0;
    double value = 0.0;
    if (!parse_number(tokens[0], i) || !parse_number(tokens[1], j) ||
        !parse_number(tokens[2], k))
      fail_at(line_no, "non-numeric index");
    if (!parse_number(tokens[3], value)) fail_at(line_no, "non-numeric value");
    if (i >= dims->n_nodes || j >= dims->n_nodes || k >= dims->n_slots)
      fail_at(line_no, "index out of bounds");
    ObservedEntry e{static_cast<Index>(i), static_cast<Index>(j),
                    static_cast<Index>(k), value};
    if (auto msg = check_entry(e, dims->n_nodes, dims->n_slots); !msg.empty())
      fail_at(line_no, msg);
    if (!seen.insert(cell_key(e, dims->n_nodes, dims->n_slots)).second)
      fail_at(line_no, "duplicate " + describe(e));
    entries.push_back(e);
  }
  if (!dims) throw DataError("tensor dims unknown (no %dims header and none declared)");
  return SparseTensor(dims->n_nodes, dims->n_slots, std::move(entries));
}

SparseTensor load_coo(std::istream& in, std::size_t n_nodes, std::size_t n_slots) {
  return read_coo(in, TensorDims{n_nodes, n_slots});
}

SparseTensor load_coo_file(const std::string& path, std::optional<TensorDims> dims) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_coo(in, dims);
}

void write_coo(std::ostream& out, const SparseTensor& tensor) {
  out << "%dims " << tensor.n_nodes() << ' ' << tensor.n_nodes() << ' '
      << tensor.n_slots() << '\n';
  char buf[64];
  for (const auto& e : tensor.entries()) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.value);
    out << e.i << ' ' << e.j << ' ' << e.k << ' '
        << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
  }
}

void write_coo_file(const std::string& path, const SparseTensor& tensor) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_coo(out, tensor);
  if (!out) throw DataError("write failed for " + path);
}

DatasetSplit split(const SparseTensor& tensor, std::array<double, 3> ratios,
                   std::uint64_t seed) {
  if (tensor.empty()) throw DataError("cannot split an empty tensor");
  for (double r : ratios)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("split ratios must be finite and nonnegative");
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (total <= 0.0) throw std::invalid_argument("split ratio sum is zero");

  const std::size_t n = tensor.size();
  const auto part = [&](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) / total));
  };
  const std::size_t n_val = part(ratios[1]);
  const std::size_t n_test = part(ratios[2]);
  const std::size_t n_train = n - n_val - n_test;
  if (n_train == 0 || n_val == 0 || n_test == 0) throw DataError("empty split part");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto gather = [&](std::size_t begin, std::size_t end) {
    std::vector<ObservedEntry> out;
    out.reserve(end - begin);
    for (std::size_t p = begin; p < end; ++p) out.push_back(tensor[order[p]]);
    return SparseTensor(tensor.n_nodes(), tensor.n_slots(), std::move(out));
  };
  DatasetSplit result;
  result.train = gather(0, n_train);
  result.validation = gather(n_train, n_train + n_val);
  result.test = gather(n_train + n_val, n);
  result.seed = seed;
  result.ratios = ratios;
  return result;
}

DatasetStats compute_stats(std::size_t n_nodes, std::size_t n_slots,
                           std::size_t observed) {
  DatasetStats s{n_nodes, n_slots, observed, 0.0};
  const double cells = static_cast<double>(n_nodes) * static_cast<double>(n_nodes) *
                       static_cast<double>(n_slots);
  if (cells > 0.0) s.density = static_cast<double>(observed) / cells;
  return s;
}

DatasetStats compute_stats(const SparseTensor& tensor) {
  return compute_stats(tensor.n_nodes(), tensor.n_slots(), tensor.size());
}

}  // namespace att
