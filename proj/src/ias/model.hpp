#pragma once

// Hamiltonian of the LZ qubit coupled to a spectator.
//
// Basis ordering is qubit first, spectator second. Qubit: |0> (sigma_z = +1),
// |1> (sigma_z = -1). Spectator qubit: |up> (tau_z = +1), |down>. Oscillator:
// Fock states in ascending n. Units: hbar = 1, energies in units of g.

#include <cstddef>
#include <string>

#include "ias/qcore.hpp"

namespace ias {

enum class SpectatorKind { qubit, oscillator };

enum class SpectatorInit { ground, excited, tau_x_plus, tau_x_minus, fock };

/// Pauli matrix of the LZ qubit that enters the coupling.
enum class CouplingAxis { x, y };

struct SpectatorSpec {
  SpectatorKind kind = SpectatorKind::qubit;
  std::size_t truncation = 2;
  SpectatorInit initial = SpectatorInit::ground;
  std::size_t fock_level = 0;  // used when initial == fock

  static SpectatorSpec qubit(SpectatorInit init = SpectatorInit::ground);
  static SpectatorSpec oscillator(std::size_t truncation = 20, SpectatorInit init = SpectatorInit::ground);

  std::size_t dim() const noexcept { return truncation; }
  void validate() const;
};

struct ModelParams {
  double g = 1.0;
  double epsilon = 2.0;
  double x0 = 0.0;
  double omega_c = 0.0;
  SpectatorSpec spectator{};
  CouplingAxis coupling_axis = CouplingAxis::x;

  std::size_t dim() const noexcept { return 2 * spectator.dim(); }
  void validate() const;
};

/// (eps t sigma_z + g sigma_x) / 2
ComplexMatrix h_system(double t, const ModelParams& p);

/// omega_c tau_z / 2 for the qubit, omega_c a^dagger a for the oscillator.
ComplexMatrix h_spectator(const ModelParams& p);

/// x0 sigma_{x|y} (x) tau_x, or x0 sigma_{x|y} (x) (a + a^dagger).
ComplexMatrix h_interaction(const ModelParams& p);

ComplexMatrix h_total(double t, const ModelParams& p);

/// d h_total / dt = (eps / 2) sigma_z (x) I; independent of t.
ComplexMatrix dh_dt(const ModelParams& p);

/// h_total(t) = static_part + t * slope, precomputed once for propagation.
class LinearHamiltonian {
 public:
  explicit LinearHamiltonian(const ModelParams& p);
  /// `slope` must be diagonal.
  LinearHamiltonian(ComplexMatrix static_part, ComplexMatrix slope);

  ComplexMatrix at(double t) const { return static_part_ + t * slope_; }
  const ComplexMatrix& static_part() const noexcept { return static_part_; }
  const ComplexMatrix& slope() const noexcept { return slope_; }
  /// Diagonal of the slope; the slope is diagonal in the product basis.
  const RealVector& slope_diagonal() const noexcept { return slope_diag_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(static_part_.rows()); }

 private:
  ComplexMatrix static_part_;
  ComplexMatrix slope_;
  RealVector slope_diag_;
};

std::string to_string(SpectatorKind kind);
std::string to_string(SpectatorInit init);

}  // namespace ias
