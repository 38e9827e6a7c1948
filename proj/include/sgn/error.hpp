#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgn {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix sizes do not conform. `block` is the offending player
// block when the mismatch is local to one block, otherwise npos.
class DimensionError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit DimensionError(const std::string& what, std::size_t block = npos)
      : Error(what), block_(block) {}

  [[nodiscard]] std::size_t block() const noexcept { return block_; }

 private:
  std::size_t block_;
};

// A matrix that must be symmetric positive definite is not.
class NotSpdError : public Error {
 public:
  using Error::Error;
};

// An iterative probe ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}

  [[nodiscard]] int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

// The requested combination of inputs is valid on its own but not supported,
// e.g. a product box under a non-diagonal metric.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Input lies outside the operation's domain (simplex boundary, bad weights,
// violated preconditions).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgn
