#pragma once

#include <stdexcept>
#include <string>

namespace sdrkit {

/// Base class for all library errors. `kind()` is a stable machine-readable tag
/// so callers can branch (refit, retry, report) without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// A statistic that is mathematically undefined for the given input
/// (zero variance, too few observations). Never coerced to 0 or ±inf.
class UndefinedStatistic : public Error {
 public:
  explicit UndefinedStatistic(const std::string& message)
      : Error("undefined", message) {}
};

}  // namespace sdrkit
