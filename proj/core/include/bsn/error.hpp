#pragma once

#include <stdexcept>
#include <string>

namespace bsn {

// Input or bundle content is unusable (missing table, bad reference,
// mismatched hashes). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Bad invocation or configuration. The CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bsn
