#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zebra {

/// Input violated a documented invariant (bad field value, size mismatch, ...).
/// The message names the offending field where one exists.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of an operation (e.g. negative budget).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed input document. Carries the byte offset of the first error when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_ = 0;
};

/// Numerical failure in the dual search. Carries the final bracket for diagnostics.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double lambda_lo, double lambda_hi)
      : std::runtime_error(what), lambda_lo_(lambda_lo), lambda_hi_(lambda_hi) {}
  double lambda_lo() const noexcept { return lambda_lo_; }
  double lambda_hi() const noexcept { return lambda_hi_; }

 private:
  double lambda_lo_;
  double lambda_hi_;
};

/// Requested work exceeds a configured resource limit (e.g. grid size).
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zebra
