#ifndef ATT_ERRORS_HPP_
#define ATT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace att {

// Malformed or inconsistent input data (COO files, model files, dimension
// mismatches between a model and a tensor).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A multiplicative update produced a non-finite accumulator.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace att

#endif  // ATT_ERRORS_HPP_
