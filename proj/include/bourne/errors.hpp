#pragma once

#include <stdexcept>
#include <string>

namespace bourne {

// Malformed input: bad ids, inconsistent shapes, unreadable files. Maps to
// CLI exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite losses, gradients or scores. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bourne
