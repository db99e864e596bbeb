#pragma once

#include <stdexcept>
#include <string>

namespace drgen {

// Bad input: malformed files, schema violations, broken invariants.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or encoder failure. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace drgen
