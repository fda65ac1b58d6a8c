#pragma once

#include <cstdint>
#include <random>

#include "periph/matrixcore.hpp"

namespace periph {

// Seeded source of complex Gaussian samples. All randomized verifiers draw
// from one of these so that a recorded seed reproduces a report exactly.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double real() { return normal_(engine_); }

  Complex complex() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re / std::sqrt(2.0), im / std::sqrt(2.0)};
  }

  CMatrix matrix(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex();
    return m;
  }

  CVector vector(Eigen::Index n) { return matrix(n, 1).col(0); }

  // Haar-ish unitary from the QR factor of a Gaussian matrix.
  CMatrix unitary(Eigen::Index d) {
    Eigen::HouseholderQR<CMatrix> qr(matrix(d, d));
    return qr.householderQ() * CMatrix::Identity(d, d);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace periph
