#pragma once

// Bridges between library types and the test oracle, plus random inputs.

#include <algorithm>
#include <cmath>
#include <random>

#include "ias/qcore.hpp"
#include "oracle.hpp"

namespace support {

inline oracle::Mat to_oracle(const ias::ComplexMatrix& m) {
  oracle::Mat o(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) o(i, j) = m(i, j);
  return o;
}

inline ias::ComplexVector to_eigen(const oracle::Vec& v) {
  ias::ComplexVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[k];
  return out;
}

inline double max_diff(const ias::ComplexMatrix& m, const oracle::Mat& o) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) d = std::max(d, std::abs(m(i, j) - o(i, j)));
  return d;
}

inline ias::ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  ias::ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = ias::Complex(n(rng), n(rng));
  return m;
}

inline ias::ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const ias::ComplexMatrix a = random_matrix(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

inline ias::ComplexVector random_state(std::mt19937_64& rng, Eigen::Index n) {
  ias::ComplexVector v = random_matrix(rng, n, 1).col(0);
  return v / v.norm();
}

/// Random full-rank density matrix A A^dag / Tr.
inline ias::ComplexMatrix random_density(std::mt19937_64& rng, Eigen::Index n) {
  const ias::ComplexMatrix a = random_matrix(rng, n, n);
  ias::ComplexMatrix r = a * a.adjoint();
  r /= r.trace().real();
  return 0.5 * (r + r.adjoint());
}

inline double max_abs(const ias::ComplexMatrix& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace support
