#pragma once

#include <stdexcept>
#include <string>

namespace dal {

// Error categories map onto process exit codes: usage/config = 1,
// numeric failure = 2, I/O failure = 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dal
