#include "ias/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ias/error.hpp"
#include "ias/integrator.hpp"

namespace ias {

namespace {

constexpr double kPositivityLimit = -1e-8;

// Eigenvector of the 2x2 h_system with the larger eigenvalue.
ComplexVector upper_branch_of(double t, const ModelParams& p) {
  const EigenSystem es = eigh(h_system(t, p));
  return es.vectors.col(1);
}

void fill_observables(Trajectory& traj, std::size_t k, double t, const ComplexMatrix& reduced, const ModelParams& p,
                      double norm_defect) {
  const ComplexVector up = upper_branch_of(t, p);
  const double prob = std::real(up.dot(reduced * up));
  const double gamma = purity(reduced);
  traj.times[k] = t;
  traj.p_of_t[k] = std::clamp(prob, 0.0, 1.0);
  traj.purity_of_t[k] = gamma;
  traj.renyi_of_t[k] = gamma >= 1.0 ? 0.0 : -std::log(gamma);
  traj.norm_defect[k] = norm_defect;
}

void allocate(Trajectory& traj, std::size_t n) {
  traj.times.assign(n, 0.0);
  traj.p_of_t.assign(n, 0.0);
  traj.purity_of_t.assign(n, 0.0);
  traj.renyi_of_t.assign(n, 0.0);
  traj.norm_defect.assign(n, 0.0);
}

void check_state(const ModelParams& p, const ComplexVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != p.dim()) {
    std::ostringstream os;
    os << "state dimension " << psi.size() << " does not match model dimension " << p.dim();
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
}

}  // namespace

void TimeGrid::validate() const {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_start < t_end))
    throw Error(ErrorKind::invalid_argument, "time grid requires finite t_start < t_end");
  if (sample_count < 2) throw Error(ErrorKind::invalid_argument, "time grid requires at least 2 samples");
}

std::vector<double> TimeGrid::times() const {
  validate();
  std::vector<double> out(sample_count);
  const double dt = (t_end - t_start) / static_cast<double>(sample_count - 1);
  for (std::size_t k = 0; k + 1 < sample_count; ++k) out[k] = t_start + static_cast<double>(k) * dt;
  out.back() = t_end;
  return out;
}

TimeGrid TimeGrid::protocol(const ModelParams& p, std::size_t samples) {
  const double t = 10.0 * p.g / p.epsilon;
  return TimeGrid{-t, t, samples};
}

ComplexVector spectator_state(const SpectatorSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.dim());
  ComplexVector s = ComplexVector::Zero(n);
  const bool qubit = spec.kind == SpectatorKind::qubit;
  switch (spec.initial) {
    case SpectatorInit::ground: s(qubit ? 1 : 0) = 1.0; break;  // |down> or vacuum
    case SpectatorInit::excited: s(qubit ? 0 : 1) = 1.0; break;
    case SpectatorInit::tau_x_plus:
      s(0) = std::numbers::sqrt2 / 2.0;
      s(1) = std::numbers::sqrt2 / 2.0;
      break;
    case SpectatorInit::tau_x_minus:
      s(0) = std::numbers::sqrt2 / 2.0;
      s(1) = -std::numbers::sqrt2 / 2.0;
      break;
    case SpectatorInit::fock: s(static_cast<Eigen::Index>(spec.fock_level)) = 1.0; break;
  }
  return s;
}

QuantumState initial_state(const ModelParams& p, double t_i) {
  p.validate();
  const EigenSystem es = eigh(h_system(t_i, p));
  ComplexVector lower = es.vectors.col(0);
  Eigen::Index imax = 0;
  lower.cwiseAbs().maxCoeff(&imax);
  lower *= std::conj(lower(imax)) / std::abs(lower(imax));
  const ComplexMatrix q = lower;
  const ComplexMatrix s = spectator_state(p.spectator);
  const ComplexMatrix product = kron(q, s);
  return QuantumState::normalized(product.col(0));
}

ComplexVector upper_branch(double t, const ModelParams& p) {
  return upper_branch_of(t, p);
}

double transition_probability(const ComplexVector& psi, double t, const ModelParams& p) {
  check_state(p, psi);
  const ComplexMatrix reduced = partial_trace_spectator_raw(psi, p.spectator.dim());
  const ComplexVector up = upper_branch_of(t, p);
  return std::clamp(std::real(up.dot(reduced * up)), 0.0, 1.0);
}

double transition_probability(const ComplexMatrix& rho, double t, const ModelParams& p) {
  const ComplexMatrix reduced = partial_trace_spectator_raw(rho, p.spectator.dim());
  const ComplexVector up = upper_branch_of(t, p);
  return std::clamp(std::real(up.dot(reduced * up)), 0.0, 1.0);
}

double lz_infidelity_analytic(double g, double epsilon) {
  if (g < 0.0 || !(epsilon > 0.0))
    throw Error(ErrorKind::invalid_argument, "lz_infidelity_analytic: requires g >= 0 and epsilon > 0");
  return std::exp(-std::numbers::pi * g * g / (2.0 * epsilon));
}

Trajectory propagate(const LinearHamiltonian& h, const TimeGrid& grid, const ComplexVector& psi0,
                     const EvolveOptions& opts) {
  const std::vector<double> times = grid.times();
  if (static_cast<std::size_t>(psi0.size()) != h.dim())
    throw Error(ErrorKind::dimension_mismatch, "propagate: state and Hamiltonian dimensions differ");
  const ComplexMatrix& h0 = h.static_part();
  const RealVector& slope = h.slope_diagonal();
  const Complex minus_i(0.0, -1.0);
  DormandPrince solver(
      [&](double t, const ComplexVector& y, ComplexVector& dy) {
        dy.noalias() = h0 * y;
        dy += t * slope.cwiseProduct(y);
        dy *= minus_i;
      },
      opts.tol);
  solver.conserve_norm(kTolerances.unitary_norm_budget);
  Trajectory traj;
  traj.times = times;
  traj.state_snapshots.resize(times.size());
  const auto stats = solver.integrate(psi0, times, [&](std::size_t k, double, const ComplexVector& y) {
    traj.state_snapshots[k] = y;
  });
  traj.accepted_steps = stats.accepted;
  traj.rejected_steps = stats.rejected;
  return traj;
}

Trajectory evolve_unitary(const ModelParams& p, const TimeGrid& grid, const QuantumState& psi0,
                          const EvolveOptions& opts) {
  p.validate();
  check_state(p, psi0.amplitudes());
  const LinearHamiltonian h(p);
  const std::vector<double> times = grid.times();
  const ComplexMatrix& h0 = h.static_part();
  const RealVector& slope = h.slope_diagonal();
  const Complex minus_i(0.0, -1.0);
  DormandPrince solver(
      [&](double t, const ComplexVector& y, ComplexVector& dy) {
        dy.noalias() = h0 * y;
        dy += t * slope.cwiseProduct(y);
        dy *= minus_i;
      },
      opts.tol);
  solver.conserve_norm(kTolerances.unitary_norm_budget);

  Trajectory traj;
  allocate(traj, times.size());
  if (opts.keep_snapshots) traj.state_snapshots.resize(times.size());
  const std::size_t n_spec = p.spectator.dim();
  const auto stats = solver.integrate(psi0.amplitudes(), times, [&](std::size_t k, double t, const ComplexVector& y) {
    fill_observables(traj, k, t, partial_trace_spectator_raw(y, n_spec), p, std::abs(y.norm() - 1.0));
    if (opts.keep_snapshots) traj.state_snapshots[k] = y;
  });
  traj.accepted_steps = stats.accepted;
  traj.rejected_steps = stats.rejected;
  return traj;
}

Trajectory evolve_oracle(const ModelParams& p, const TimeGrid& grid, const QuantumState& psi0, std::size_t n_steps,
                         bool keep_snapshots) {
  p.validate();
  check_state(p, psi0.amplitudes());
  const std::vector<double> times = grid.times();
  const std::size_t intervals = times.size() - 1;
  const std::size_t per_interval = std::max<std::size_t>(1, (n_steps + intervals - 1) / intervals);
  const LinearHamiltonian h(p);

  Trajectory traj;
  allocate(traj, times.size());
  if (keep_snapshots) traj.state_snapshots.resize(times.size());
  const std::size_t n_spec = p.spectator.dim();
  ComplexVector psi = psi0.amplitudes();
  const auto record = [&](std::size_t k) {
    fill_observables(traj, k, times[k], partial_trace_spectator_raw(psi, n_spec), p, std::abs(psi.norm() - 1.0));
    if (keep_snapshots) traj.state_snapshots[k] = psi;
  };
  record(0);
  for (std::size_t k = 0; k < intervals; ++k) {
    const double a = times[k];
    const double dt = (times[k + 1] - a) / static_cast<double>(per_interval);
    for (std::size_t s = 0; s < per_interval; ++s) {
      const double mid = a + (static_cast<double>(s) + 0.5) * dt;
      psi = expm_unitary(h.at(mid), dt) * psi;
    }
    traj.accepted_steps += per_interval;
    record(k + 1);
  }
  return traj;
}

ComplexMatrix jump_operator(const ModelParams& p, DissipationChannel channel) {
  const std::size_t n = p.spectator.dim();
  ComplexMatrix local;
  if (p.spectator.kind == SpectatorKind::qubit)
    local = channel == DissipationChannel::spectator_decay ? ops::sigma_minus() : ops::sigma_z();
  else
    local = channel == DissipationChannel::spectator_decay ? ops::annihilation(n) : ops::number(n);
  return kron(ops::identity(2), local);
}

Trajectory evolve_lindblad(const ModelParams& p, const TimeGrid& grid, const DensityMatrix& rho0,
                           const DissipationSpec& diss, const EvolveOptions& opts) {
  p.validate();
  if (!(diss.rate >= 0.0) || !std::isfinite(diss.rate))
    throw Error(ErrorKind::invalid_argument, "dissipation rate must be finite and >= 0");
  const auto dim = static_cast<Eigen::Index>(p.dim());
  if (rho0.matrix().rows() != dim) throw Error(ErrorKind::dimension_mismatch, "initial density matrix dimension");

  const LinearHamiltonian h(p);
  const ComplexMatrix& h0 = h.static_part();
  const RealVector& slope = h.slope_diagonal();
  const ComplexMatrix jump = jump_operator(p, diss.channel);
  const ComplexMatrix jump_dag = jump.adjoint();
  const ComplexMatrix anti = 0.5 * diss.rate * (jump_dag * jump);
  const double kappa = diss.rate;
  const Complex minus_i(0.0, -1.0);
  using RowMap = Eigen::Map<ComplexMatrix>;
  using ConstRowMap = Eigen::Map<const ComplexMatrix>;

  // rho is stored row-major as a flat vector of length dim^2.
  DormandPrince solver(
      [&](double t, const ComplexVector& y, ComplexVector& dy) {
        const ConstRowMap rho(y.data(), dim, dim);
        RowMap out(dy.data(), dim, dim);
        ComplexMatrix hr = h0 * rho;
        hr += (t * slope).asDiagonal() * rho;
        // -i (H rho - rho H) with rho H = (H rho)^dagger for Hermitian rho.
        out = minus_i * (hr - hr.adjoint());
        if (kappa > 0.0) {
          out += kappa * (jump * rho * jump_dag);
          const ComplexMatrix ar = anti * rho;
          out -= ar + ar.adjoint();
        }
      },
      opts.tol);

  const std::vector<double> times = grid.times();
  Trajectory traj;
  allocate(traj, times.size());
  if (opts.keep_snapshots) traj.density_snapshots.resize(times.size());
  const std::size_t n_spec = p.spectator.dim();
  ComplexVector y0(dim * dim);
  RowMap(y0.data(), dim, dim) = rho0.matrix();
  double min_eig = 0.0;
  const auto stats = solver.integrate(y0, times, [&](std::size_t k, double t, const ComplexVector& y) {
    const ConstRowMap rho(y.data(), dim, dim);
    const ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
    fill_observables(traj, k, t, partial_trace_spectator_raw(herm, n_spec), p, std::abs(rho.trace() - Complex(1.0)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(herm), Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    if (opts.keep_snapshots) traj.density_snapshots[k] = rho;
  });
  traj.accepted_steps = stats.accepted;
  traj.rejected_steps = stats.rejected;
  traj.min_eigenvalue = min_eig;
  traj.positivity_violated = min_eig < kPositivityLimit;
  return traj;
}

double truncation_convergence(const ModelParams& p, const TimeGrid& grid, std::size_t n, std::size_t n_plus,
                              const EvolveOptions& opts) {
  if (p.spectator.kind != SpectatorKind::oscillator)
    throw Error(ErrorKind::invalid_argument, "truncation_convergence requires an oscillator spectator");
  if (!(n_plus > n)) throw Error(ErrorKind::invalid_argument, "truncation_convergence requires N_plus > N");
  const auto final_p = [&](std::size_t levels) {
    ModelParams q = p;
    q.spectator.truncation = levels;
    const Trajectory traj = evolve_unitary(q, grid, initial_state(q, grid.t_start), opts);
    return traj.p_of_t.back();
  };
  return std::abs(final_p(n) - final_p(n_plus));
}

std::string to_string(DissipationChannel c) {
  return c == DissipationChannel::spectator_decay ? "decay" : "dephasing";
}

}  // namespace ias
