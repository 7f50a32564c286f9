#pragma once

// Time evolution of the composite qubit-spectator system and the observables
// P(t) (upper-branch population of the bare LZ qubit) and purity.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ias/model.hpp"

namespace ias {

struct TimeGrid {
  double t_start = -5.0;
  double t_end = 5.0;
  std::size_t sample_count = 2001;

  void validate() const;
  std::vector<double> times() const;

  /// The default protocol window [-10 g/eps, +10 g/eps].
  static TimeGrid protocol(const ModelParams& p, std::size_t samples = 2001);
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> p_of_t;
  std::vector<double> purity_of_t;
  std::vector<double> renyi_of_t;
  std::vector<double> norm_defect;  // | ||psi|| - 1 |, or | Tr rho - 1 | for master-equation runs
  std::vector<ComplexVector> state_snapshots;   // filled on request (unitary runs)
  std::vector<ComplexMatrix> density_snapshots;  // filled on request (master-equation runs)

  bool tolerance_met = true;
  bool positivity_violated = false;  // master equation: eigenvalue below -1e-8 seen
  double min_eigenvalue = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  std::size_t size() const noexcept { return times.size(); }
};

struct EvolveOptions {
  double tol = 1e-9;
  bool keep_snapshots = false;
};

/// Lower-branch qubit eigenvector of h_system(t_i) times the spectator state.
QuantumState initial_state(const ModelParams& p, double t_i);

/// Spectator factor selected by p.spectator.initial.
ComplexVector spectator_state(const SpectatorSpec& spec);

/// Upper eigenvector |+>_t of h_system(t).
ComplexVector upper_branch(double t, const ModelParams& p);

/// Tr{rho_qubit |+>_t<+|} for a composite pure state or density matrix.
double transition_probability(const ComplexVector& psi, double t, const ModelParams& p);
double transition_probability(const ComplexMatrix& rho, double t, const ModelParams& p);

/// exp(-pi g^2 / (2 eps)).
double lz_infidelity_analytic(double g, double epsilon);

/// Adaptive Dormand-Prince propagation of i d/dt psi = h_total(t) psi.
Trajectory evolve_unitary(const ModelParams& p, const TimeGrid& grid, const QuantumState& psi0,
                          const EvolveOptions& opts = {});

/// Same integrator on an arbitrary Hamiltonian h(t) = static_part + t * slope.
/// Only the state snapshots and step counts are filled.
Trajectory propagate(const LinearHamiltonian& h, const TimeGrid& grid, const ComplexVector& psi0,
                     const EvolveOptions& opts);

/// Fixed-step exponential midpoint propagator,
/// psi <- exp(-i h(t + dt/2) dt) psi, with at least `n_steps` steps in total.
/// Second order; intended as an independent check of evolve_unitary.
Trajectory evolve_oracle(const ModelParams& p, const TimeGrid& grid, const QuantumState& psi0,
                         std::size_t n_steps = 200000, bool keep_snapshots = false);

enum class DissipationChannel { spectator_decay, spectator_dephasing };

struct DissipationSpec {
  double rate = 0.0;  // kappa
  DissipationChannel channel = DissipationChannel::spectator_decay;
};

/// Jump operator on the composite space: I (x) tau^- or I (x) a for decay,
/// I (x) tau_z or I (x) a^dagger a for dephasing.
ComplexMatrix jump_operator(const ModelParams& p, DissipationChannel channel);

/// Lindblad master equation with a single spectator channel,
/// d rho/dt = -i[H, rho] + kappa (L rho L^dagger - {L^dagger L, rho}/2).
Trajectory evolve_lindblad(const ModelParams& p, const TimeGrid& grid, const DensityMatrix& rho0,
                           const DissipationSpec& diss, const EvolveOptions& opts = {});

/// |P_N(t_end) - P_{N_plus}(t_end)| for the oscillator spectator.
double truncation_convergence(const ModelParams& p, const TimeGrid& grid, std::size_t n, std::size_t n_plus,
                              const EvolveOptions& opts = {});

std::string to_string(DissipationChannel c);

}  // namespace ias
