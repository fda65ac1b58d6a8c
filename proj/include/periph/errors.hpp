#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace periph {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A peripheral eigenvalue whose left/right eigenvector Gram matrix is
// singular (geometric multiplicity < algebraic multiplicity).
class DefectiveEigenvalue : public Error {
 public:
  using Error::Error;
};

// A product eigenvalue falls inside the clustering radius of two distinct
// peripheral clusters.
class ToleranceConflict : public Error {
 public:
  using Error::Error;
};

class NotInPeripheralSpan : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  CapExceeded(std::size_t required, std::size_t allowed)
      : Error("ambient dimension " + std::to_string(required) +
              " exceeds cap " + std::to_string(allowed)),
        required_(required),
        allowed_(allowed) {}

  std::size_t required() const { return required_; }
  std::size_t allowed() const { return allowed_; }

 private:
  std::size_t required_;
  std::size_t allowed_;
};

class AlmostPeriodExhausted : public Error {
 public:
  AlmostPeriodExhausted(std::size_t n_max, std::size_t best_n, double best_defect)
      : Error("n_max exhausted (n_max=" + std::to_string(n_max) +
              ", best n=" + std::to_string(best_n) +
              ", defect=" + std::to_string(best_defect) + ")"),
        n_max_(n_max),
        best_n_(best_n),
        best_defect_(best_defect) {}

  std::size_t n_max() const { return n_max_; }
  std::size_t best_n() const { return best_n_; }
  double best_defect() const { return best_defect_; }

 private:
  std::size_t n_max_;
  std::size_t best_n_;
  double best_defect_;
};

}  // namespace periph
