#include "ias/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ias/error.hpp"

namespace ias {

namespace ops {

ComplexMatrix identity(std::size_t n) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

ComplexMatrix sigma_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix sigma_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix sigma_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix sigma_minus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

ComplexMatrix annihilation(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

ComplexMatrix number(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) m(k, k) = static_cast<double>(k);
  return m;
}

}  // namespace ops

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t max_dimension) {
  const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  if (rows > max_dimension || cols > max_dimension) {
    std::ostringstream os;
    os << "kron: result " << rows << "x" << cols << " exceeds maximum dimension " << max_dimension;
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double hermiticity_defect(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  double defect = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = i; j < h.cols(); ++j)
      defect = std::max(defect, std::abs(h(i, j) - std::conj(h(j, i))));
  return defect;
}

bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

EigenSystem eigh(const ComplexMatrix& h, double tol) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw Error(ErrorKind::dimension_mismatch, "eigh: matrix must be square and non-empty");
  if (!h.allFinite()) throw Error(ErrorKind::numerical, "eigh: non-finite entries");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const double defect = hermiticity_defect(h);
  if (defect > tol * scale) {
    std::ostringstream os;
    os << "eigh: matrix is not Hermitian (defect " << defect << ", allowed " << tol * scale << ")";
    throw Error(ErrorKind::not_hermitian, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(h), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::numerical, "eigh: solver did not converge");
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm_unitary(const ComplexMatrix& h, double dt) {
  const EigenSystem es = eigh(h);
  ComplexVector phases(es.values.size());
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    phases(k) = std::polar(1.0, -es.values(k) * dt);
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

QuantumState::QuantumState(ComplexVector amplitudes, double tol) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw Error(ErrorKind::invalid_argument, "QuantumState: empty vector");
  if (!amplitudes_.allFinite()) throw Error(ErrorKind::numerical, "QuantumState: non-finite amplitudes");
  const double defect = std::abs(amplitudes_.norm() - 1.0);
  if (defect > tol) {
    std::ostringstream os;
    os << "QuantumState: norm defect " << defect << " exceeds " << tol;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
}

QuantumState QuantumState::normalized(ComplexVector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::invalid_argument, "QuantumState: zero or non-finite vector");
  amplitudes /= n;
  return QuantumState(std::move(amplitudes));
}

DensityMatrix::DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
    throw Error(ErrorKind::dimension_mismatch, "DensityMatrix: matrix must be square");
  if (!rho_.allFinite()) throw Error(ErrorKind::numerical, "DensityMatrix: non-finite entries");
  const double herm = hermiticity_defect(rho_);
  if (herm > kTolerances.density_hermiticity) {
    std::ostringstream os;
    os << "DensityMatrix: Hermiticity defect " << herm;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  const double trace_defect = std::abs(rho_.trace() - Complex(1.0));
  if (trace_defect > kTolerances.density_trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace defect " << trace_defect;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(rho_), Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kTolerances.density_min_eigenvalue)
    throw Error(ErrorKind::invalid_argument, "DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::from_state(const ComplexVector& psi) {
  return DensityMatrix(psi * psi.adjoint());
}

ComplexMatrix partial_trace_spectator_raw(const ComplexVector& psi, std::size_t spectator_dim) {
  const auto n = static_cast<Eigen::Index>(spectator_dim);
  if (spectator_dim == 0 || psi.size() != 2 * n)
    throw Error(ErrorKind::dimension_mismatch, "partial trace: composite dimension must be 2 x spectator dimension");
  // Row a of `m` holds the spectator amplitudes of qubit level a.
  const Eigen::Map<const Eigen::Matrix<Complex, 2, Eigen::Dynamic, Eigen::RowMajor>> m(psi.data(), 2, n);
  return m * m.adjoint();
}

ComplexMatrix partial_trace_spectator_raw(const ComplexMatrix& rho, std::size_t spectator_dim) {
  const auto n = static_cast<Eigen::Index>(spectator_dim);
  if (spectator_dim == 0 || rho.rows() != 2 * n || rho.cols() != 2 * n)
    throw Error(ErrorKind::dimension_mismatch, "partial trace: composite dimension must be 2 x spectator dimension");
  ComplexMatrix out(2, 2);
  for (Eigen::Index a = 0; a < 2; ++a)
    for (Eigen::Index b = 0; b < 2; ++b) out(a, b) = rho.block(a * n, b * n, n, n).trace();
  return out;
}

namespace {

// Partial traces can carry round-off at the 1e-16 level; symmetrize before
// handing the result to the validating constructor.
DensityMatrix hermitize(ComplexMatrix m) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  return DensityMatrix(std::move(h));
}

}  // namespace

DensityMatrix partial_trace_spectator(const QuantumState& psi, std::size_t spectator_dim) {
  return hermitize(partial_trace_spectator_raw(psi.amplitudes(), spectator_dim));
}

DensityMatrix partial_trace_spectator(const DensityMatrix& rho, std::size_t spectator_dim) {
  return hermitize(partial_trace_spectator_raw(rho.matrix(), spectator_dim));
}

double purity(const ComplexMatrix& rho) {
  // Tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho.
  return rho.cwiseAbs2().sum();
}

double purity(const DensityMatrix& rho) {
  return purity(rho.matrix());
}

double renyi2(const DensityMatrix& rho) {
  const double gamma = purity(rho);
  return gamma >= 1.0 ? 0.0 : -std::log(gamma);
}

}  // namespace ias
