#pragma once

#include <stdexcept>
#include <string>

namespace cemdc {

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorCategory {
  config = 2,      // bad or contradictory configuration
  validation = 3,  // malformed input data (media files, dimension mismatches)
  numerical = 4,   // factorization/eigensolver breakdowns, non-convergence
  io = 5,          // filesystem failures
};

class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, const std::string& what) : std::runtime_error(what), cat_(cat) {}
  ErrorCategory category() const { return cat_; }

private:
  ErrorCategory cat_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace cemdc
