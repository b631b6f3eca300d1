#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace quantlab {

/// Precondition violated by the caller (bad argument, empty set, invalid spec).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input size exceeds a configured cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every cell of a run failed.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing an output or input file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown configuration. Carries the offending keys, if any.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, std::vector<std::string> keys = {})
      : std::runtime_error(message), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

}  // namespace quantlab
