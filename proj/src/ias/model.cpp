#include "ias/model.hpp"

#include <cmath>
#include <sstream>

#include "ias/error.hpp"

namespace ias {

SpectatorSpec SpectatorSpec::qubit(SpectatorInit init) {
  return SpectatorSpec{SpectatorKind::qubit, 2, init, 0};
}

SpectatorSpec SpectatorSpec::oscillator(std::size_t truncation, SpectatorInit init) {
  return SpectatorSpec{SpectatorKind::oscillator, truncation, init, 0};
}

void SpectatorSpec::validate() const {
  if (truncation < 2) throw Error(ErrorKind::invalid_argument, "spectator truncation must be >= 2");
  if (kind == SpectatorKind::qubit && truncation != 2)
    throw Error(ErrorKind::invalid_argument, "qubit spectator requires truncation 2");
  if (initial == SpectatorInit::fock && fock_level >= truncation) {
    std::ostringstream os;
    os << "fock(" << fock_level << ") is outside the truncation " << truncation;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  if (kind == SpectatorKind::oscillator &&
      (initial == SpectatorInit::tau_x_plus || initial == SpectatorInit::tau_x_minus))
    throw Error(ErrorKind::invalid_argument, "tau_x initial states require a qubit spectator");
}

void ModelParams::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(g) || !finite(epsilon) || !finite(x0) || !finite(omega_c))
    throw Error(ErrorKind::invalid_argument, "model parameters must be finite");
  if (!(g > 0.0)) throw Error(ErrorKind::invalid_argument, "g must be > 0");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::invalid_argument, "epsilon must be > 0");
  if (x0 < 0.0) throw Error(ErrorKind::invalid_argument, "x0 must be >= 0");
  if (omega_c < 0.0) throw Error(ErrorKind::invalid_argument, "omega_c must be >= 0");
  spectator.validate();
}

ComplexMatrix h_system(double t, const ModelParams& p) {
  return 0.5 * (p.epsilon * t * ops::sigma_z() + p.g * ops::sigma_x());
}

ComplexMatrix h_spectator(const ModelParams& p) {
  if (p.spectator.kind == SpectatorKind::qubit) return 0.5 * p.omega_c * ops::sigma_z();
  return p.omega_c * ops::number(p.spectator.truncation);
}

ComplexMatrix h_interaction(const ModelParams& p) {
  const ComplexMatrix qubit_op = p.coupling_axis == CouplingAxis::x ? ops::sigma_x() : ops::sigma_y();
  ComplexMatrix spectator_op;
  if (p.spectator.kind == SpectatorKind::qubit) {
    spectator_op = ops::sigma_x();
  } else {
    const ComplexMatrix a = ops::annihilation(p.spectator.truncation);
    spectator_op = a + a.adjoint();
  }
  return p.x0 * kron(qubit_op, spectator_op);
}

ComplexMatrix h_total(double t, const ModelParams& p) {
  const std::size_t n = p.spectator.dim();
  return kron(h_system(t, p), ops::identity(n)) + h_interaction(p) + kron(ops::identity(2), h_spectator(p));
}

ComplexMatrix dh_dt(const ModelParams& p) {
  return kron(0.5 * p.epsilon * ops::sigma_z(), ops::identity(p.spectator.dim()));
}

LinearHamiltonian::LinearHamiltonian(const ModelParams& p)
    : static_part_(h_total(0.0, p)), slope_(dh_dt(p)), slope_diag_(slope_.diagonal().real()) {}

LinearHamiltonian::LinearHamiltonian(ComplexMatrix static_part, ComplexMatrix slope)
    : static_part_(std::move(static_part)), slope_(std::move(slope)) {
  if (static_part_.rows() != static_part_.cols() || slope_.rows() != static_part_.rows() ||
      slope_.cols() != static_part_.cols())
    throw Error(ErrorKind::dimension_mismatch, "LinearHamiltonian: matrices must be square and of equal size");
  const ComplexMatrix off = slope_ - ComplexMatrix(slope_.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() != 0.0)
    throw Error(ErrorKind::invalid_argument, "LinearHamiltonian: slope must be diagonal");
  slope_diag_ = slope_.diagonal().real();
}

std::string to_string(SpectatorKind kind) {
  return kind == SpectatorKind::qubit ? "qubit" : "oscillator";
}

std::string to_string(SpectatorInit init) {
  switch (init) {
    case SpectatorInit::ground: return "ground";
    case SpectatorInit::excited: return "excited";
    case SpectatorInit::tau_x_plus: return "tau_x_plus";
    case SpectatorInit::tau_x_minus: return "tau_x_minus";
    case SpectatorInit::fock: return "fock";
  }
  return "unknown";
}

}  // namespace ias
