#pragma once

#include <stdexcept>
#include <string>

namespace substan {

// Malformed or inconsistent input data (corpus files, model artifacts).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace substan
