#pragma once

#include <stdexcept>
#include <string>

namespace blindcd {

// Precondition violations throw std::invalid_argument. The two types below
// cover malformed input data and numerical failures.

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace blindcd
