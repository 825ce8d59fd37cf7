#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anco {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input sits on a coordinate singularity (e.g. the angle at the phase-space origin).
class DegenerateInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Basis too small to hold a coherent state to the required tail mass.
class TruncationError : public ValidationError {
 public:
  TruncationError(const std::string& what, std::size_t min_dim)
      : ValidationError(what), min_dim_(min_dim) {}
  std::size_t min_dim() const noexcept { return min_dim_; }

 private:
  std::size_t min_dim_;
};

// A numerical procedure did not meet its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::size_t achieved)
      : NumericalError(what), achieved_(achieved) {}
  // Number of levels that did converge.
  std::size_t achieved() const noexcept { return achieved_; }

 private:
  std::size_t achieved_;
};

class RoundTripError : public NumericalError {
 public:
  RoundTripError(const std::string& what, double worst_energy, double residual)
      : NumericalError(what), worst_energy_(worst_energy), residual_(residual) {}
  double worst_energy() const noexcept { return worst_energy_; }
  double residual() const noexcept { return residual_; }

 private:
  double worst_energy_;
  double residual_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace anco
