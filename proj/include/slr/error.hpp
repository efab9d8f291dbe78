#pragma once

#include <stdexcept>
#include <string>

namespace slr {

/// Base of all library errors. kind() is a stable machine-readable tag that
/// the CLI forwards in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

struct SingularDesign : Error {
  explicit SingularDesign(const std::string& what) : Error("singular-design", what) {}
};

/// Raised when a search or sweep would exceed its configured work budget.
struct BudgetExceeded : Error {
  BudgetExceeded(const std::string& what, double estimate)
      : Error("budget", what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// A mathematical precondition (e.g. a validity range of a bound) is violated.
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

}  // namespace slr
