#pragma once

// Dense complex linear algebra for the small Hilbert spaces of the LZ qubit and
// its spectator. Everything here is a pure function on values.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "ias/tolerances.hpp"

namespace ias {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace ops {
ComplexMatrix identity(std::size_t n);
ComplexMatrix sigma_x();
ComplexMatrix sigma_y();
ComplexMatrix sigma_z();
/// Lowering operator |1><0| in the {|0>, |1>} = {up, down} ordering is tau^-
/// = |down><up|.
ComplexMatrix sigma_minus();
/// Truncated annihilation operator on Fock states 0..n-1.
ComplexMatrix annihilation(std::size_t n);
ComplexMatrix number(std::size_t n);
}  // namespace ops

/// Kronecker product. Throws if the resulting dimension exceeds `max_dimension`.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t max_dimension = kTolerances.max_dimension);

/// max_ij |h_ij - conj(h_ji)|; infinity for non-square input.
double hermiticity_defect(const ComplexMatrix& h);

bool all_finite(const ComplexMatrix& m);

struct EigenSystem {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // column k belongs to values[k]
};

/// Hermitian eigendecomposition. Rejects inputs whose Hermiticity defect
/// exceeds `tol` (relative to max(1, |h|_max)).
EigenSystem eigh(const ComplexMatrix& h, double tol = kTolerances.hermiticity);

/// exp(-i h dt) through the eigendecomposition of h.
ComplexMatrix expm_unitary(const ComplexMatrix& h, double dt);

/// Normalized state vector on the composite space.
class QuantumState {
 public:
  /// Throws unless the Euclidean norm is 1 within `tol`.
  explicit QuantumState(ComplexVector amplitudes, double tol = kTolerances.state_norm);

  static QuantumState normalized(ComplexVector amplitudes);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }

 private:
  ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  /// Validates Hermiticity, trace and spectrum against `kTolerances`.
  explicit DensityMatrix(ComplexMatrix rho);

  static DensityMatrix from_state(const ComplexVector& psi);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
  const ComplexMatrix& matrix() const noexcept { return rho_; }

 private:
  ComplexMatrix rho_;
};

/// Reduced 2x2 qubit matrix from a composite (qubit x spectator) object.
/// Unnormalized inputs are traced as given; the result is returned without
/// validation so callers can report defects themselves.
ComplexMatrix partial_trace_spectator_raw(const ComplexVector& psi, std::size_t spectator_dim);
ComplexMatrix partial_trace_spectator_raw(const ComplexMatrix& rho, std::size_t spectator_dim);

DensityMatrix partial_trace_spectator(const QuantumState& psi, std::size_t spectator_dim);
DensityMatrix partial_trace_spectator(const DensityMatrix& rho, std::size_t spectator_dim);

/// Tr(rho^2).
double purity(const DensityMatrix& rho);
double purity(const ComplexMatrix& rho);

/// Second Renyi entropy S2 = -ln Tr(rho^2).
double renyi2(const DensityMatrix& rho);

}  // namespace ias
