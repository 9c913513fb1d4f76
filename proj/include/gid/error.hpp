#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gid {

enum class ErrorKind {
  invalid_argument,
  invalid_distribution,
  shape_mismatch,
  zero_probability,
  support_violation,
  lattice_cap_exceeded,
  parse_error,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_distribution: return "invalid_distribution";
    case ErrorKind::shape_mismatch: return "shape_mismatch";
    case ErrorKind::zero_probability: return "zero_probability";
    case ErrorKind::support_violation: return "support_violation";
    case ErrorKind::lattice_cap_exceeded: return "lattice_cap_exceeded";
    case ErrorKind::parse_error: return "parse_error";
  }
  return "unknown";
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a posterior puts mass on states the prior excludes.
/// Carries the offending full-state tuples.
class SupportViolation : public Error {
 public:
  SupportViolation(const std::string& what,
                   std::vector<std::vector<std::uint32_t>> states)
      : Error(ErrorKind::support_violation, what), states_(std::move(states)) {}

  const std::vector<std::vector<std::uint32_t>>& states() const noexcept {
    return states_;
  }

 private:
  std::vector<std::vector<std::uint32_t>> states_;
};

}  // namespace gid
