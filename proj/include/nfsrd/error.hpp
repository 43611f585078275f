#pragma once

#include <stdexcept>
#include <string>

namespace nfsrd {

// Bad input data or infeasible configuration. The CLI maps this to exit code 2;
// anything else escaping a command is an internal error (exit code 1).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nfsrd
