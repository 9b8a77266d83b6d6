#pragma once

#include <stdexcept>
#include <string>

namespace qsnn {

// Invalid configuration, CLI arguments, or input data. The CLI maps this to
// exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown: non-finite values or a state that stopped satisfying
// the physical invariants it is supposed to carry. The CLI maps this to exit
// code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsnn
