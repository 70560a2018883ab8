#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace scx {

// Base of all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments or configuration. The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Failures arising during a computation. The CLI maps these to exit code 2.
class ComputeError : public Error {
public:
  using Error::Error;
};

class InvalidArgument final : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class AlphaOutOfRange final : public ValidationError {
public:
  explicit AlphaOutOfRange(double alpha)
      : ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha)),
        alpha_(alpha) {}
  double alpha() const noexcept { return alpha_; }

private:
  double alpha_;
};

class NotRobbinsMonro final : public ValidationError {
public:
  explicit NotRobbinsMonro(double gamma)
      : ValidationError(describe(gamma)), gamma_(gamma) {}
  double gamma() const noexcept { return gamma_; }

private:
  static std::string describe(double gamma) {
    if (gamma <= 0.5) {
      return "step exponent " + std::to_string(gamma) +
             " rejected: sum of squared steps diverges (p-series, p = " +
             std::to_string(2.0 * gamma) + " <= 1)";
    }
    return "step exponent " + std::to_string(gamma) +
           " rejected: step sum converges (p-series, p = " +
           std::to_string(gamma) + " > 1)";
  }
  double gamma_;
};

class UnknownFamily final : public ValidationError {
public:
  explicit UnknownFamily(const std::string& name)
      : ValidationError("unknown parametric family '" + name + "'") {}
};

class UnsupportedDimension final : public ValidationError {
public:
  explicit UnsupportedDimension(int dim, const std::string& context)
      : ValidationError("dimension " + std::to_string(dim) + " unsupported: " + context),
        dim_(dim) {}
  int dim() const noexcept { return dim_; }

private:
  int dim_;
};

class ParseError final : public ValidationError {
public:
  ParseError(int line, const std::string& what)
      : ValidationError("parse error at line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

class UnknownKey final : public ValidationError {
public:
  explicit UnknownKey(const std::string& key)
      : ValidationError("unknown config key '" + key + "'"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

class CapacityExceeded final : public ComputeError {
public:
  CapacityExceeded(double requested, double bound)
      : ComputeError("enumeration size " + std::to_string(requested) +
                     " exceeds capacity bound " + std::to_string(bound)),
        requested_(requested),
        bound_(bound) {}
  double requested() const noexcept { return requested_; }
  double bound() const noexcept { return bound_; }

private:
  double requested_;
  double bound_;
};

class DimensionMismatch final : public ComputeError {
public:
  DimensionMismatch(int lhs, int rhs)
      : ComputeError("dimension mismatch: " + std::to_string(lhs) + " vs " +
                     std::to_string(rhs)) {}
};

class PointOutsideHull final : public ComputeError {
public:
  explicit PointOutsideHull(double margin)
      : ComputeError("point lies outside the hull, separating margin " +
                     std::to_string(margin)),
        margin_(margin) {}
  double margin() const noexcept { return margin_; }

private:
  double margin_;
};

class NonFiniteValue final : public ComputeError {
public:
  explicit NonFiniteValue(std::size_t node_index)
      : ComputeError("non-finite value at grid node " + std::to_string(node_index)),
        node_(node_index) {}
  std::size_t node_index() const noexcept { return node_; }

private:
  std::size_t node_;
};

class CapTooLow final : public ComputeError {
public:
  CapTooLow(double cap, double max_value)
      : ComputeError("cap " + std::to_string(cap) +
                     " is below the sampled maximum " + std::to_string(max_value)),
        max_value_(max_value) {}
  double max_value() const noexcept { return max_value_; }

private:
  double max_value_;
};

class CesaroNotConverged final : public ComputeError {
public:
  CesaroNotConverged(double half_window, double full_window)
      : ComputeError("window average not converged: " + std::to_string(half_window) +
                     " (half window) vs " + std::to_string(full_window) +
                     " (full window)"),
        half_(half_window),
        full_(full_window) {}
  double half_window() const noexcept { return half_; }
  double full_window() const noexcept { return full_; }

private:
  double half_;
  double full_;
};

class ParameterOutOfDomain final : public ComputeError {
public:
  explicit ParameterOutOfDomain(int unit_index)
      : ComputeError("unit parameter " + std::to_string(unit_index) +
                     " lies outside the parameter box"),
        unit_(unit_index) {}
  int unit_index() const noexcept { return unit_; }

private:
  int unit_;
};

class IndexOutOfRange final : public ComputeError {
public:
  IndexOutOfRange(std::int64_t index, std::int64_t size)
      : ComputeError("index " + std::to_string(index) + " out of range [0, " +
                     std::to_string(size) + ")") {}
};

class EmptyArgmin final : public ComputeError {
public:
  EmptyArgmin() : ComputeError("argmin set is empty") {}
};

class NonFiniteIterate final : public ComputeError {
public:
  explicit NonFiniteIterate(std::int64_t step)
      : ComputeError("non-finite iterate at step " + std::to_string(step)),
        step_(step) {}
  std::int64_t step() const noexcept { return step_; }

private:
  std::int64_t step_;
};

class InsufficientTrajectories final : public ComputeError {
public:
  InsufficientTrajectories(std::size_t given, std::size_t required)
      : ComputeError("need at least " + std::to_string(required) +
                     " trajectories, got " + std::to_string(given)) {}
};

class DegenerateFit final : public ComputeError {
public:
  explicit DegenerateFit(std::size_t usable)
      : ComputeError("rate fit needs at least 3 usable points, got " +
                     std::to_string(usable)) {}
};

}  // namespace scx
