#pragma once

#include <stdexcept>
#include <string>

namespace revmatch {

// Error families map onto CLI exit codes: UsageError -> 1, DataError -> 2,
// anything else -> 3. Messages start with a stable tag ("DuplicateId: ...")
// so callers can match on the failure kind.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace revmatch
