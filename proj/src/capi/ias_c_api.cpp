#include "ias/ias.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "ias/dynamics.hpp"
#include "ias/error.hpp"
#include "ias/io.hpp"
#include "ias/model.hpp"
#include "ias/spectrum.hpp"
#include "ias/sweep.hpp"
#include "ias/version.hpp"

struct ias_model {
  ias::ModelParams params;
};

struct ias_spectrum {
  std::vector<ias::SpectrumSlice> slices;
};

struct ias_trajectory {
  ias::Trajectory traj;
};

struct ias_sweep_result {
  ias::SweepResult result;
};

namespace {

thread_local std::string g_last_error;
thread_local double g_failure_time = std::numeric_limits<double>::quiet_NaN();

ias_status fail(ias_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

ias_status map_kind(ias::ErrorKind kind) {
  switch (kind) {
    case ias::ErrorKind::invalid_argument: return IAS_ERROR_INVALID_ARGUMENT;
    case ias::ErrorKind::dimension_mismatch: return IAS_ERROR_DIMENSION;
    case ias::ErrorKind::not_hermitian: return IAS_ERROR_NOT_HERMITIAN;
    case ias::ErrorKind::propagation: return IAS_ERROR_PROPAGATION;
    case ias::ErrorKind::numerical: return IAS_ERROR_NUMERICAL;
    case ias::ErrorKind::io: return IAS_ERROR_IO;
  }
  return IAS_ERROR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
ias_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return IAS_OK;
  } catch (const ias::PropagationError& e) {
    g_failure_time = e.failed_at();
    return fail(IAS_ERROR_PROPAGATION, e.what());
  } catch (const ias::Error& e) {
    return fail(map_kind(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(IAS_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(IAS_ERROR_INTERNAL, e.what());
  }
}

#define IAS_REQUIRE(cond, msg) \
  do {                         \
    if (!(cond)) return fail(IAS_ERROR_INVALID_ARGUMENT, msg); \
  } while (0)

ias::ModelParams to_params(const ias_model_params& in) {
  ias::ModelParams p;
  p.g = in.g;
  p.epsilon = in.epsilon;
  p.x0 = in.x0;
  p.omega_c = in.omega_c;
  if (in.spectator_kind != IAS_SPECTATOR_QUBIT && in.spectator_kind != IAS_SPECTATOR_OSCILLATOR)
    throw ias::Error(ias::ErrorKind::invalid_argument, "unknown spectator kind");
  p.spectator.kind = in.spectator_kind == IAS_SPECTATOR_QUBIT ? ias::SpectatorKind::qubit : ias::SpectatorKind::oscillator;
  p.spectator.truncation = in.truncation;
  if (in.spectator_init < IAS_INIT_GROUND || in.spectator_init > IAS_INIT_FOCK)
    throw ias::Error(ias::ErrorKind::invalid_argument, "unknown spectator initial state");
  p.spectator.initial = static_cast<ias::SpectatorInit>(in.spectator_init);
  p.spectator.fock_level = in.fock_level;
  if (in.coupling_axis != IAS_COUPLING_X && in.coupling_axis != IAS_COUPLING_Y)
    throw ias::Error(ias::ErrorKind::invalid_argument, "unknown coupling axis");
  p.coupling_axis = in.coupling_axis == IAS_COUPLING_X ? ias::CouplingAxis::x : ias::CouplingAxis::y;
  p.validate();
  return p;
}

ias_model_params from_params(const ias::ModelParams& p) {
  ias_model_params out{};
  out.g = p.g;
  out.epsilon = p.epsilon;
  out.x0 = p.x0;
  out.omega_c = p.omega_c;
  out.spectator_kind = p.spectator.kind == ias::SpectatorKind::qubit ? IAS_SPECTATOR_QUBIT : IAS_SPECTATOR_OSCILLATOR;
  out.truncation = p.spectator.truncation;
  out.spectator_init = static_cast<int>(p.spectator.initial);
  out.fock_level = p.spectator.fock_level;
  out.coupling_axis = p.coupling_axis == ias::CouplingAxis::x ? IAS_COUPLING_X : IAS_COUPLING_Y;
  return out;
}

int regime_code(ias::Regime r) {
  switch (r) {
    case ias::Regime::I: return IAS_REGIME_I;
    case ias::Regime::II: return IAS_REGIME_II;
    case ias::Regime::III: return IAS_REGIME_III;
  }
  return 0;
}

ias::Regime regime_from_code(int code) {
  switch (code) {
    case IAS_REGIME_I: return ias::Regime::I;
    case IAS_REGIME_II: return ias::Regime::II;
    case IAS_REGIME_III: return ias::Regime::III;
    default: throw ias::Error(ias::ErrorKind::invalid_argument, "unknown regime code");
  }
}

ias_sweep_point to_c(const ias::SweepPoint& sp) {
  ias_sweep_point out{};
  out.i = sp.i;
  out.j = sp.j;
  out.x0 = sp.x0;
  out.omega_c = sp.omega_c;
  out.delta = sp.delta;
  out.delta_c2 = sp.delta_c2;
  out.regime = regime_code(sp.regime);
  out.tf_opt = sp.tf_opt;
  out.infidelity = sp.infidelity;
  out.purity = sp.purity;
  out.status = static_cast<int>(sp.status);
  return out;
}

ias::SweepPoint from_c(const ias_sweep_point& in) {
  ias::SweepPoint sp;
  sp.i = in.i;
  sp.j = in.j;
  sp.x0 = in.x0;
  sp.omega_c = in.omega_c;
  sp.delta = in.delta;
  sp.delta_c2 = in.delta_c2;
  sp.regime = regime_from_code(in.regime);
  sp.tf_opt = in.tf_opt;
  sp.infidelity = in.infidelity;
  sp.purity = in.purity;
  if (in.status < IAS_POINT_OK || in.status > IAS_POINT_FAILED)
    throw ias::Error(ias::ErrorKind::invalid_argument, "unknown point status");
  sp.status = static_cast<ias::PointStatus>(in.status);
  return sp;
}

template <class F>
void write_with(const char* path, F&& writer) {
  std::ostringstream os;
  writer(os);
  ias::io::write_file_atomically(path, os.str());
}

}  // namespace

extern "C" {

const char* ias_version(void) {
  return ias::kVersion;
}

const char* ias_last_error(void) {
  return g_last_error.c_str();
}

double ias_last_failure_time(void) {
  return g_failure_time;
}

void ias_model_params_default(ias_model_params* params) {
  if (params != nullptr) *params = from_params(ias::ModelParams{});
}

ias_status ias_model_create(const ias_model_params* params, ias_model** out) {
  IAS_REQUIRE(params != nullptr && out != nullptr, "ias_model_create: null argument");
  *out = nullptr;
  return guarded([&] { *out = new ias_model{to_params(*params)}; });
}

void ias_model_destroy(ias_model* model) {
  delete model;
}

ias_status ias_model_get_params(const ias_model* model, ias_model_params* out) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_model_get_params: null argument");
  *out = from_params(model->params);
  return IAS_OK;
}

size_t ias_model_dimension(const ias_model* model) {
  return model == nullptr ? 0 : model->params.dim();
}

ias_status ias_model_hamiltonian(const ias_model* model, double t, double* out, size_t capacity) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_model_hamiltonian: null argument");
  const size_t n = model->params.dim();
  IAS_REQUIRE(capacity >= 2 * n * n, "ias_model_hamiltonian: output buffer too small");
  return guarded([&] {
    const ias::ComplexMatrix h = ias::h_total(t, model->params);
    for (size_t r = 0; r < n; ++r)
      for (size_t c = 0; c < n; ++c) {
        const auto v = h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        out[2 * (r * n + c)] = v.real();
        out[2 * (r * n + c) + 1] = v.imag();
      }
  });
}

ias_status ias_model_eigenvalues(const ias_model* model, double t, double* out, size_t capacity) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_model_eigenvalues: null argument");
  IAS_REQUIRE(capacity >= model->params.dim(), "ias_model_eigenvalues: output buffer too small");
  return guarded([&] {
    const ias::RealVector e = ias::eigenvalues_at(t, model->params);
    for (Eigen::Index k = 0; k < e.size(); ++k) out[k] = e(k);
  });
}

ias_status ias_model_delta(const ias_model* model, double* out) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_model_delta: null argument");
  *out = ias::delta(model->params);
  return IAS_OK;
}

ias_status ias_classify(const ias_model* model, ias_regime_info* out) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_classify: null argument");
  return guarded([&] {
    const ias::RegimeClassification rc = ias::classify_regime(model->params);
    out->delta = rc.delta;
    out->delta_c1 = rc.delta_c1;
    out->delta_c2 = rc.delta_c2;
    out->delta_c2_found = rc.delta_c2_found ? 1 : 0;
    out->regime = regime_code(rc.regime);
  });
}

ias_status ias_minimal_gap(const ias_model* model, double t_lo, double t_hi, size_t samples, double* gap,
                           double* t_at) {
  IAS_REQUIRE(model != nullptr && gap != nullptr && t_at != nullptr, "ias_minimal_gap: null argument");
  return guarded([&] {
    const ias::MinimalGap mg = ias::minimal_gap(model->params, t_lo, t_hi, samples);
    *gap = mg.central.gap;
    *t_at = mg.central.t_at;
  });
}

ias_status ias_adiabaticity_ratio(const ias_model* model, double t, double* out) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_adiabaticity_ratio: null argument");
  return guarded([&] { *out = ias::adiabaticity_ratio(t, model->params).value; });
}

ias_status ias_spectrum_scan(const ias_model* model, double t0, double t1, size_t samples, ias_spectrum** out) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_spectrum_scan: null argument");
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<ias_spectrum>();
    s->slices = ias::spectrum_scan(model->params, t0, t1, samples);
    *out = s.release();
  });
}

void ias_spectrum_destroy(ias_spectrum* spectrum) {
  delete spectrum;
}

size_t ias_spectrum_samples(const ias_spectrum* spectrum) {
  return spectrum == nullptr ? 0 : spectrum->slices.size();
}

size_t ias_spectrum_branches(const ias_spectrum* spectrum) {
  if (spectrum == nullptr || spectrum->slices.empty()) return 0;
  return static_cast<size_t>(spectrum->slices.front().eigenvalues.size());
}

ias_status ias_spectrum_time(const ias_spectrum* spectrum, size_t sample, double* out) {
  IAS_REQUIRE(spectrum != nullptr && out != nullptr, "ias_spectrum_time: null argument");
  IAS_REQUIRE(sample < spectrum->slices.size(), "ias_spectrum_time: sample out of range");
  *out = spectrum->slices[sample].t;
  return IAS_OK;
}

ias_status ias_spectrum_energy(const ias_spectrum* spectrum, size_t sample, size_t branch, double* out) {
  IAS_REQUIRE(spectrum != nullptr && out != nullptr, "ias_spectrum_energy: null argument");
  IAS_REQUIRE(sample < spectrum->slices.size(), "ias_spectrum_energy: sample out of range");
  const auto& e = spectrum->slices[sample].eigenvalues;
  IAS_REQUIRE(branch < static_cast<size_t>(e.size()), "ias_spectrum_energy: branch out of range");
  *out = e(static_cast<Eigen::Index>(branch));
  return IAS_OK;
}

ias_status ias_spectrum_write_csv(const ias_spectrum* spectrum, const ias_spectrum* reference, const char* path) {
  IAS_REQUIRE(spectrum != nullptr && path != nullptr, "ias_spectrum_write_csv: null argument");
  return guarded([&] {
    write_with(path, [&](std::ostream& os) {
      ias::io::write_spectrum_csv(os, spectrum->slices, reference != nullptr ? &reference->slices : nullptr);
    });
  });
}

ias_status ias_evolve_options_default(const ias_model* model, ias_evolve_options* out) {
  IAS_REQUIRE(model != nullptr && out != nullptr, "ias_evolve_options_default: null argument");
  const ias::TimeGrid grid = ias::TimeGrid::protocol(model->params);
  *out = ias_evolve_options{grid.t_start, grid.t_end, grid.sample_count, 1e-9, 0, 0.0, IAS_CHANNEL_DECAY};
  return IAS_OK;
}

ias_status ias_evolve(const ias_model* model, const ias_evolve_options* options, ias_trajectory** out) {
  IAS_REQUIRE(model != nullptr && options != nullptr && out != nullptr, "ias_evolve: null argument");
  IAS_REQUIRE(options->lindblad != 0 || options->kappa == 0.0, "ias_evolve: kappa > 0 requires lindblad = 1");
  *out = nullptr;
  return guarded([&] {
    const ias::ModelParams& p = model->params;
    const ias::TimeGrid grid{options->t_start, options->t_end, options->samples};
    grid.validate();
    const ias::EvolveOptions eo{options->tol, false};
    auto t = std::make_unique<ias_trajectory>();
    const ias::QuantumState psi0 = ias::initial_state(p, grid.t_start);
    if (options->lindblad != 0) {
      if (options->channel != IAS_CHANNEL_DECAY && options->channel != IAS_CHANNEL_DEPHASING)
        throw ias::Error(ias::ErrorKind::invalid_argument, "unknown dissipation channel");
      const ias::DissipationSpec diss{options->kappa, options->channel == IAS_CHANNEL_DECAY
                                                          ? ias::DissipationChannel::spectator_decay
                                                          : ias::DissipationChannel::spectator_dephasing};
      t->traj = ias::evolve_lindblad(p, grid, ias::DensityMatrix::from_state(psi0.amplitudes()), diss, eo);
      if (t->traj.positivity_violated) {
        std::ostringstream os;
        os << "master equation lost positivity (min eigenvalue " << t->traj.min_eigenvalue << ")";
        throw ias::Error(ias::ErrorKind::numerical, os.str());
      }
    } else {
      t->traj = ias::evolve_unitary(p, grid, psi0, eo);
    }
    *out = t.release();
  });
}

void ias_trajectory_destroy(ias_trajectory* trajectory) {
  delete trajectory;
}

size_t ias_trajectory_size(const ias_trajectory* trajectory) {
  return trajectory == nullptr ? 0 : trajectory->traj.size();
}

ias_status ias_trajectory_sample(const ias_trajectory* trajectory, size_t index, ias_sample* out) {
  IAS_REQUIRE(trajectory != nullptr && out != nullptr, "ias_trajectory_sample: null argument");
  const ias::Trajectory& tr = trajectory->traj;
  IAS_REQUIRE(index < tr.size(), "ias_trajectory_sample: index out of range");
  *out = ias_sample{tr.times[index], tr.p_of_t[index], tr.purity_of_t[index], tr.renyi_of_t[index],
                    tr.norm_defect[index]};
  return IAS_OK;
}

ias_status ias_trajectory_optimize_tf(const ias_trajectory* trajectory, double target, double half_window,
                                      ias_tf_result* out) {
  IAS_REQUIRE(trajectory != nullptr && out != nullptr, "ias_trajectory_optimize_tf: null argument");
  return guarded([&] {
    const ias::TfOptimum opt = ias::optimize_tf(trajectory->traj, target, half_window);
    *out = ias_tf_result{opt.t_f, opt.p_min, opt.purity, opt.monotone_window ? 1 : 0};
  });
}

ias_status ias_trajectory_write_csv(const ias_trajectory* trajectory, const char* path) {
  IAS_REQUIRE(trajectory != nullptr && path != nullptr, "ias_trajectory_write_csv: null argument");
  return guarded([&] {
    write_with(path, [&](std::ostream& os) { ias::io::write_trajectory_csv(os, trajectory->traj); });
  });
}

double ias_lz_infidelity(double g, double epsilon) {
  try {
    return ias::lz_infidelity_analytic(g, epsilon);
  } catch (const ias::Error& e) {
    g_last_error = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

ias_status ias_sweep_run(const ias_sweep_config* config, const ias_sweep_point* completed, size_t n_completed,
                         ias_sweep_callback callback, void* user, ias_sweep_result** out) {
  IAS_REQUIRE(config != nullptr && out != nullptr, "ias_sweep_run: null argument");
  IAS_REQUIRE(config->x0_over_g != nullptr && config->omega_axis != nullptr, "ias_sweep_run: null axis");
  IAS_REQUIRE(n_completed == 0 || completed != nullptr, "ias_sweep_run: null completed list");
  *out = nullptr;
  return guarded([&] {
    ias_model_params base = config->base;
    base.x0 = 0.0;
    base.omega_c = 0.0;
    const ias::ModelParams p = to_params(base);
    ias::SweepGrid grid;
    grid.x0_over_g.assign(config->x0_over_g, config->x0_over_g + config->n_x0);
    grid.omega_axis.assign(config->omega_axis, config->omega_axis + config->n_omega);
    grid.omega_mode = config->omega_over_g != 0 ? ias::OmegaAxis::ratio_to_g : ias::OmegaAxis::ratio_to_x0;
    grid.g = p.g;
    grid.epsilon = p.epsilon;
    grid.spectator = p.spectator;
    grid.coupling_axis = p.coupling_axis;

    ias::SweepOptions opts;
    opts.pipeline.tol = config->tol;
    opts.workers = config->workers;
    opts.completed.reserve(n_completed);
    for (size_t k = 0; k < n_completed; ++k) opts.completed.push_back(from_c(completed[k]));
    if (callback != nullptr)
      opts.on_point = [&](const ias::SweepPoint& sp) {
        const ias_sweep_point c = to_c(sp);
        callback(user, &c);
      };
    auto r = std::make_unique<ias_sweep_result>();
    r->result = ias::run_sweep(grid, opts);
    *out = r.release();
  });
}

void ias_sweep_result_destroy(ias_sweep_result* result) {
  delete result;
}

size_t ias_sweep_result_count(const ias_sweep_result* result) {
  return result == nullptr ? 0 : result->result.points.size();
}

size_t ias_sweep_result_failed(const ias_sweep_result* result) {
  return result == nullptr ? 0 : result->result.failed;
}

ias_status ias_sweep_result_point(const ias_sweep_result* result, size_t index, ias_sweep_point* out) {
  IAS_REQUIRE(result != nullptr && out != nullptr, "ias_sweep_result_point: null argument");
  IAS_REQUIRE(index < result->result.points.size(), "ias_sweep_result_point: index out of range");
  *out = to_c(result->result.points[index]);
  return IAS_OK;
}

ias_status ias_sweep_result_write_csv(const ias_sweep_result* result, const char* path) {
  IAS_REQUIRE(result != nullptr && path != nullptr, "ias_sweep_result_write_csv: null argument");
  return guarded([&] {
    write_with(path, [&](std::ostream& os) { ias::io::write_sweep_csv(os, result->result); });
  });
}

ias_status ias_robustness(const ias_model* model, const ias_robustness_options* options, ias_robustness_stats* out,
                          double* per_sample) {
  IAS_REQUIRE(model != nullptr && options != nullptr && out != nullptr, "ias_robustness: null argument");
  return guarded([&] {
    ias::RobustnessOptions ro;
    ro.rel_sigma = options->rel_sigma;
    ro.samples = options->samples;
    ro.seed = options->seed;
    ro.shape = options->gaussian != 0 ? ias::NoiseShape::gaussian : ias::NoiseShape::uniform;
    ro.pipeline.tol = options->tol;
    ro.workers = options->workers;
    const ias::RobustnessStats s = ias::robustness_study(model->params, ro);
    *out = ias_robustness_stats{s.samples, s.failed, s.nominal, s.mean, s.stddev, s.min, s.max, s.q50, s.q90, s.q99};
    if (per_sample != nullptr)
      for (size_t k = 0; k < s.infidelities.size(); ++k) per_sample[k] = s.infidelities[k];
  });
}

}  // extern "C"
