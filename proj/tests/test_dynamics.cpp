#include <cmath>

#include "doctest.h"
#include "ias/dynamics.hpp"
#include "ias/error.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace ias;

namespace {

ModelParams point(double x0, double wc, double g = 1.0, double eps = 2.0) {
  ModelParams p;
  p.g = g;
  p.epsilon = eps;
  p.x0 = x0;
  p.omega_c = wc;
  return p;
}

oracle::Vec to_vec(const ComplexVector& v) {
  oracle::Vec out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) out[static_cast<std::size_t>(k)] = v(k);
  return out;
}

ComplexVector kroneckerish(const ComplexVector& a, const ComplexVector& b) {
  return kron(ComplexMatrix(a), ComplexMatrix(b)).col(0);
}

// Largest P(t) swing over samples with t >= t_from.
double swing(const Trajectory& tr, double t_from) {
  double lo = 1.0, hi = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (tr.times[k] < t_from) continue;
    lo = std::min(lo, tr.p_of_t[k]);
    hi = std::max(hi, tr.p_of_t[k]);
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("initial state: lower LZ branch times the spectator factor") {
  const ModelParams p = point(0.0, 0.0);
  const QuantumState far = initial_state(p, -1e3 / p.epsilon);
  // Lower branch at large negative t is sigma_z = +1 (index 0 of the qubit).
  CHECK(std::abs(far.amplitudes()(1)) > 1.0 - 1e-6);  // |0> (x) |down>
  CHECK(far.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-14));

  const double ti = -10.0 * p.g / p.epsilon;
  const QuantumState psi0 = initial_state(p, ti);
  CHECK(transition_probability(psi0.amplitudes(), ti, p) <= 1e-3);
  const oracle::Vec lower = oracle::lz_lower(ti, p.g, p.epsilon);
  CHECK(std::abs(std::abs(psi0.amplitudes()(1)) - std::abs(lower[0])) < 1e-14);
  CHECK(std::abs(std::abs(psi0.amplitudes()(3)) - std::abs(lower[1])) < 1e-14);
}

TEST_CASE("spectator initial states") {
  using Init = SpectatorInit;
  const auto amp = [](SpectatorSpec s) { return spectator_state(s); };
  CHECK(std::abs(amp(SpectatorSpec::qubit(Init::ground))(1) - 1.0) < 1e-15);
  CHECK(std::abs(amp(SpectatorSpec::qubit(Init::excited))(0) - 1.0) < 1e-15);
  const ComplexVector plus = amp(SpectatorSpec::qubit(Init::tau_x_plus));
  CHECK(support::max_abs(ops::sigma_x() * plus - plus) < 1e-15);
  const ComplexVector minus = amp(SpectatorSpec::qubit(Init::tau_x_minus));
  CHECK(support::max_abs(ops::sigma_x() * minus + minus) < 1e-15);
  CHECK(std::abs(amp(SpectatorSpec::oscillator(6))(0) - 1.0) < 1e-15);
  SpectatorSpec f = SpectatorSpec::oscillator(6, Init::fock);
  f.fock_level = 4;
  CHECK(std::abs(amp(f)(4) - 1.0) < 1e-15);
  f.fock_level = 6;
  CHECK_THROWS_AS(amp(f), Error);
}

TEST_CASE("analytic LZ infidelity") {
  CHECK(lz_infidelity_analytic(0.0, 1.0) == 1.0);
  CHECK(lz_infidelity_analytic(1.0, 2.0) == doctest::Approx(std::exp(-M_PI / 4.0)));
  CHECK(lz_infidelity_analytic(1.0, 2.0) == doctest::Approx(0.45594).epsilon(1e-5));
  CHECK(lz_infidelity_analytic(1.0, 0.5) == doctest::Approx(0.04322).epsilon(1e-4));
  CHECK_THROWS_AS(lz_infidelity_analytic(1.0, 0.0), Error);
}

TEST_CASE("transition probability examples") {
  const ModelParams p = point(0.7, 0.4);
  const double t = 0.8;
  const ComplexVector up = upper_branch(t, p);
  std::mt19937_64 rng(2);
  const ComplexVector spec = support::random_state(rng, 2);
  const ComplexVector plus_state = kroneckerish(up, spec);
  CHECK(transition_probability(plus_state, t, p) == doctest::Approx(1.0).epsilon(1e-14));
  const ComplexVector down = ops::sigma_y() * up.conjugate();  // orthogonal to up
  CHECK(std::abs(up.dot(down)) < 1e-15);
  CHECK(transition_probability(kroneckerish(down, spec), t, p) < 1e-14);
  CHECK(transition_probability(ComplexMatrix(0.25 * ops::identity(4)), t, p) == doctest::Approx(0.5));
}

TEST_CASE("P computed from the reduced state equals the composite projector expectation") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p = point(0.5, 0.5);
    p.spectator = trial % 2 == 0 ? SpectatorSpec::qubit() : SpectatorSpec::oscillator(5);
    const double t = -2.0 + 0.4 * trial;
    const ComplexVector psi = support::random_state(rng, static_cast<Eigen::Index>(p.dim()));
    const ComplexVector up = upper_branch(t, p);
    const ComplexMatrix proj = kron(ComplexMatrix(up * up.adjoint()), ops::identity(p.spectator.dim()));
    const double direct = psi.dot(proj * psi).real();
    CHECK(std::abs(transition_probability(psi, t, p) - direct) < 1e-12);
    CHECK(std::abs(oracle::upper_population(to_vec(psi), t, p.g, p.epsilon) - direct) < 1e-12);
  }
}

TEST_CASE("bare LZ trajectory agrees with an independent RK4 run") {
  const ModelParams p = point(0.0, 0.0);
  const TimeGrid grid = TimeGrid::protocol(p, 401);
  const QuantumState psi0 = initial_state(p, grid.t_start);
  const Trajectory tr = evolve_unitary(p, grid, psi0, EvolveOptions{1e-10, true});
  const oracle::Vec out = oracle::rk4([&](double t) { return oracle::h_qubit_spectator(t, 1.0, 2.0, 0.0, 0.0); },
                                     to_vec(psi0.amplitudes()), grid.t_start, grid.t_end, 40000);
  CHECK(std::abs(tr.p_of_t.back() - oracle::upper_population(out, grid.t_end, 1.0, 2.0)) < 1e-8);
  // Final value sits in the finite-time band around the asymptote.
  CHECK(std::abs(tr.p_of_t.back() - lz_infidelity_analytic(1.0, 2.0)) < 0.03);
  for (double d : tr.norm_defect) CHECK(d <= 1e-10);
}

TEST_CASE("coupled trajectories agree with independent RK4 runs") {
  for (const auto& [x0, wc] : {std::pair{2.0, 0.5}, {0.25, 0.5}, {1.0, 3.0}}) {
    const ModelParams p = point(x0, wc);
    const TimeGrid grid{-5.0, 5.0, 11};
    const QuantumState psi0 = initial_state(p, grid.t_start);
    const Trajectory tr = evolve_unitary(p, grid, psi0, EvolveOptions{1e-11, true});
    const oracle::Vec out = oracle::rk4([&](double t) { return oracle::h_qubit_spectator(t, 1.0, 2.0, x0, wc); },
                                       to_vec(psi0.amplitudes()), -5.0, 5.0, 80000);
    const ComplexVector diff = tr.state_snapshots.back() - support::to_eigen(out);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-8);
  }

  ModelParams osc = point(0.4, 1.0);
  osc.spectator = SpectatorSpec::oscillator(6);
  const TimeGrid grid{-5.0, 5.0, 11};
  const QuantumState psi0 = initial_state(osc, grid.t_start);
  const Trajectory tr = evolve_unitary(osc, grid, psi0, EvolveOptions{1e-11, true});
  const oracle::Vec out =
      oracle::rk4([&](double t) { return oracle::h_oscillator_spectator(t, 1.0, 2.0, 0.4, 1.0, 6); },
                  to_vec(psi0.amplitudes()), -5.0, 5.0, 80000);
  CHECK((tr.state_snapshots.back() - support::to_eigen(out)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("time-independent Hamiltonian is propagated exactly") {
  const ModelParams p = point(1.2, 0.7);
  const ComplexMatrix h0 = h_total(0.0, p);
  const LinearHamiltonian frozen(h0, ComplexMatrix::Zero(4, 4));
  const QuantumState psi0 = initial_state(p, 0.0);
  const TimeGrid grid{0.0, 3.0, 7};
  const Trajectory tr = propagate(frozen, grid, psi0.amplitudes(), EvolveOptions{1e-11, true});
  for (std::size_t k = 0; k < grid.sample_count; ++k) {
    const ComplexVector exact = expm_unitary(h0, tr.times[k]) * psi0.amplitudes();
    CHECK((tr.state_snapshots[k] - exact).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("regime-II trajectory: post-crossing oscillations dip below 0.05, purity dips") {
  const ModelParams p = point(2.0, 0.5);
  const TimeGrid grid{-5.0, 7.0, 2401};
  const Trajectory tr = evolve_unitary(p, grid, initial_state(p, grid.t_start));
  double min_late = 1.0, min_gamma = 1.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (tr.times[k] > 3.0) min_late = std::min(min_late, tr.p_of_t[k]);
    min_gamma = std::min(min_gamma, tr.purity_of_t[k]);
    CHECK(tr.purity_of_t[k] <= 1.0 + 1e-12);
    CHECK(tr.p_of_t[k] >= 0.0);
    CHECK(tr.p_of_t[k] <= 1.0);
    CHECK(std::abs(tr.renyi_of_t[k] + std::log(tr.purity_of_t[k])) < 1e-12);
    CHECK(tr.norm_defect[k] <= 1e-10);
  }
  CHECK(min_late < 0.05);
  CHECK(swing(tr, 3.0) > 0.05);
  CHECK(std::abs(tr.purity_of_t.front() - 1.0) < 1e-10);
  CHECK(min_gamma < tr.purity_of_t.front() - 0.05);
  CHECK(tr.tolerance_met);
}

TEST_CASE("exponential-midpoint oracle: unitary, second order, agrees with the main propagator") {
  const ModelParams p = point(2.0, 0.5);
  const TimeGrid grid{-5.0, 5.0, 3};
  const QuantumState psi0 = initial_state(p, grid.t_start);
  const Trajectory ref = evolve_unitary(p, grid, psi0, EvolveOptions{1e-12, true});
  const Trajectory coarse = evolve_oracle(p, grid, psi0, 4000, true);
  const Trajectory fine = evolve_oracle(p, grid, psi0, 8000, true);
  const double e1 = (coarse.state_snapshots.back() - ref.state_snapshots.back()).cwiseAbs().maxCoeff();
  const double e2 = (fine.state_snapshots.back() - ref.state_snapshots.back()).cwiseAbs().maxCoeff();
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  for (double d : fine.norm_defect) CHECK(d <= 1e-12);
}

TEST_CASE("x0 = 0: composite P(t) equals the bare two-level run for several spectator states") {
  for (SpectatorInit init : {SpectatorInit::ground, SpectatorInit::excited, SpectatorInit::tau_x_plus}) {
    ModelParams p = point(0.0, 0.8);
    p.spectator = SpectatorSpec::qubit(init);
    const TimeGrid grid = TimeGrid::protocol(p, 201);
    const Trajectory tr = evolve_unitary(p, grid, initial_state(p, grid.t_start));
    const oracle::Vec lower = oracle::lz_lower(grid.t_start, 1.0, 2.0);
    for (std::size_t k = 50; k < tr.size(); k += 50) {
      const oracle::Vec out = oracle::rk4([](double t) {
        oracle::Mat h = oracle::h_qubit_spectator(t, 1.0, 2.0, 0.0, 0.0);
        oracle::Mat h2(2);
        h2(0, 0) = h(0, 0);
        h2(0, 1) = h(0, 2);
        h2(1, 0) = h(2, 0);
        h2(1, 1) = h(2, 2);
        return h2;
      }, lower, grid.t_start, tr.times[k], 20000);
      CHECK(std::abs(tr.p_of_t[k] - oracle::upper_population(out, tr.times[k], 1.0, 2.0)) < 1e-8);
    }
    // Decoupled: the qubit stays pure.
    for (double g : tr.purity_of_t) CHECK(g > 1.0 - 1e-9);
  }
}

TEST_CASE("master equation: kappa = 0 reproduces the unitary run") {
  const ModelParams p = point(2.0, 0.5);
  const TimeGrid grid{-5.0, 5.0, 401};
  const QuantumState psi0 = initial_state(p, grid.t_start);
  const Trajectory u = evolve_unitary(p, grid, psi0);
  const Trajectory l = evolve_lindblad(p, grid, DensityMatrix::from_state(psi0.amplitudes()), {0.0});
  for (std::size_t k = 0; k < u.size(); ++k) {
    CHECK(std::abs(u.p_of_t[k] - l.p_of_t[k]) < 1e-7);
    CHECK(std::abs(u.purity_of_t[k] - l.purity_of_t[k]) < 1e-7);
  }
}

TEST_CASE("master equation with decay: trace, Hermiticity, damping, and an RK4 cross-check") {
  const ModelParams p = point(2.0, 0.5);
  const TimeGrid grid{-5.0, 7.0, 481};
  const QuantumState psi0 = initial_state(p, grid.t_start);
  const DensityMatrix rho0 = DensityMatrix::from_state(psi0.amplitudes());
  EvolveOptions opts;
  opts.keep_snapshots = true;
  const Trajectory closed = evolve_lindblad(p, grid, rho0, {0.0}, opts);
  const Trajectory open = evolve_lindblad(p, grid, rho0, {0.1, DissipationChannel::spectator_decay}, opts);
  for (std::size_t k = 0; k < open.size(); ++k) {
    const ComplexMatrix& r = open.density_snapshots[k];
    CHECK(std::abs(r.trace() - 1.0) < 1e-8);
    CHECK(hermiticity_defect(r) < 1e-10);
  }
  CHECK_FALSE(open.positivity_violated);
  CHECK(swing(open, 1.0) < swing(closed, 1.0));

  // Independent RK4 of the same master equation, L = I (x) tau^-.
  oracle::Mat lop = oracle::kron(oracle::eye(2), oracle::Mat(2));
  lop(1, 0) = lop(3, 2) = 1.0;
  oracle::Mat ldag(4), ldl(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) ldag(i, j) = std::conj(lop(j, i));
  ldl = ldag * lop;
  const double kappa = 0.1;
  const auto rhs = [&](double t, const oracle::Mat& r) {
    const oracle::Mat h = oracle::h_qubit_spectator(t, 1.0, 2.0, 2.0, 0.5);
    const oracle::Mat mi_hr = oracle::cx(0, -1) * (h * r);
    const oracle::Mat i_rh = oracle::cx(0, 1) * (r * h);
    const oracle::Mat jump = oracle::cx(kappa) * (lop * r * ldag);
    const oracle::Mat anti = oracle::cx(-0.5 * kappa) * (ldl * r + r * ldl);
    return mi_hr + i_rh + jump + anti;
  };
  oracle::Mat r(4);
  const ComplexMatrix& r0 = rho0.matrix();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) r(i, j) = r0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const std::size_t steps = 60000;
  const double dt = (grid.t_end - grid.t_start) / steps;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = grid.t_start + s * dt;
    const oracle::Mat k1 = rhs(t, r);
    const oracle::Mat k2 = rhs(t + dt / 2, r + oracle::cx(dt / 2) * k1);
    const oracle::Mat k3 = rhs(t + dt / 2, r + oracle::cx(dt / 2) * k2);
    const oracle::Mat k4 = rhs(t + dt, r + oracle::cx(dt) * k3);
    r = r + oracle::cx(dt / 6) * (k1 + oracle::cx(2) * k2 + oracle::cx(2) * k3 + k4);
  }
  CHECK(support::max_diff(open.density_snapshots.back(), r) < 1e-7);
}

TEST_CASE("dephasing channel and jump operators") {
  const ModelParams p = point(1.0, 1.0);
  CHECK(support::max_abs(jump_operator(p, DissipationChannel::spectator_decay) -
                         kron(ops::identity(2), ops::sigma_minus())) == 0.0);
  CHECK(support::max_abs(jump_operator(p, DissipationChannel::spectator_dephasing) -
                         kron(ops::identity(2), ops::sigma_z())) == 0.0);
  ModelParams osc = p;
  osc.spectator = SpectatorSpec::oscillator(4);
  CHECK(support::max_abs(jump_operator(osc, DissipationChannel::spectator_decay) -
                         kron(ops::identity(2), ops::annihilation(4))) == 0.0);
  CHECK(support::max_abs(jump_operator(osc, DissipationChannel::spectator_dephasing) -
                         kron(ops::identity(2), ops::number(4))) == 0.0);

  const TimeGrid grid{-5.0, 5.0, 101};
  const QuantumState psi0 = initial_state(p, grid.t_start);
  const Trajectory tr = evolve_lindblad(p, grid, DensityMatrix::from_state(psi0.amplitudes()),
                                        {0.2, DissipationChannel::spectator_dephasing});
  for (double d : tr.norm_defect) CHECK(d < 1e-8);
  CHECK_THROWS_AS(evolve_lindblad(p, grid, DensityMatrix::from_state(psi0.amplitudes()), {-0.1}), Error);
}

TEST_CASE("truncation convergence") {
  ModelParams p = point(0.0, 0.5);
  p.spectator = SpectatorSpec::oscillator(10);
  const TimeGrid grid = TimeGrid::protocol(p, 101);
  CHECK(truncation_convergence(p, grid, 10, 20) == 0.0);

  // Small displacement x0 / omega_c: converged well before N = 12.
  p.x0 = 0.2;
  p.omega_c = 1.0;
  const double coarse = truncation_convergence(p, grid, 4, 16);
  const double fine = truncation_convergence(p, grid, 10, 16);
  CHECK(fine < 1e-8);
  CHECK(coarse >= fine);
  CHECK_THROWS_AS(truncation_convergence(point(0.2, 1.0), grid, 10, 16), Error);
  CHECK_THROWS_AS(truncation_convergence(p, grid, 16, 10), Error);
}

TEST_CASE("argument validation and propagation failures") {
  const ModelParams p = point(1.0, 1.0);
  const QuantumState psi0 = initial_state(p, -5.0);
  CHECK_THROWS_AS(evolve_unitary(p, TimeGrid{1.0, 1.0, 10}, psi0), Error);
  CHECK_THROWS_AS(evolve_unitary(p, TimeGrid{-1.0, 1.0, 1}, psi0), Error);
  CHECK_THROWS_AS(evolve_unitary(p, TimeGrid{-1.0, 1.0, 10}, psi0, EvolveOptions{1e-3}), Error);
  CHECK_THROWS_AS(evolve_unitary(p, TimeGrid{-1.0, 1.0, 10}, psi0, EvolveOptions{1e-15}), Error);
  ModelParams osc = p;
  osc.spectator = SpectatorSpec::oscillator(4);
  CHECK_THROWS_AS(evolve_unitary(osc, TimeGrid{-1.0, 1.0, 10}, psi0), Error);

  const LinearHamiltonian wild(1e306 * ops::sigma_x(), ComplexMatrix::Zero(2, 2));
  ComplexVector v(2);
  v << 1.0, 0.0;
  try {
    (void)propagate(wild, TimeGrid{0.0, 1.0, 3}, v, EvolveOptions{});
    FAIL("expected a propagation failure");
  } catch (const PropagationError& e) {
    CHECK(e.kind() == ErrorKind::propagation);
    CHECK(e.failed_at() >= 0.0);
    CHECK(e.failed_at() < 1.0);
  }
}
