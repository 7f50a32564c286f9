#pragma once

// Parameter-space exploration: final-time optimisation, the (x0, omega_c)
// infidelity/purity maps and the parameter-noise robustness study.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ias/dynamics.hpp"
#include "ias/spectrum.hpp"

namespace ias {

struct TfOptimum {
  double t_f = 0.0;
  double p_min = 0.0;
  double purity = 0.0;            // interpolated at t_f
  bool monotone_window = false;   // no local minimum found; t_f is the target
};

/// Discrete local minimum of P(t) nearest to `target` within
/// [target - half_window, target + half_window], refined by a parabola through
/// the three neighbouring samples.
TfOptimum optimize_tf(const Trajectory& traj, double target, double half_window);

/// Settings shared by every point of a sweep or robustness study.
struct PipelineConfig {
  double tol = 1e-9;
  double target_factor = 10.0;    // t_f target = target_factor * g / eps; t_i = -target
  double window_factor = 4.0;     // evolve to target + window_factor * g / eps
  double samples_per_unit = 100.0;  // output samples per g/eps
};

struct PointOutcome {
  double t_f = 0.0;
  double infidelity = 0.0;
  double purity = 0.0;
  bool monotone_window = false;
};

/// The protocol for one parameter point: start in |-> (x) spectator at t_i,
/// evolve past the target and pick the nearest local minimum of P.
PointOutcome evaluate_point(const ModelParams& p, const PipelineConfig& cfg = {});

/// Output grid used by evaluate_point.
TimeGrid pipeline_grid(const ModelParams& p, const PipelineConfig& cfg);

enum class OmegaAxis { ratio_to_x0, ratio_to_g };

struct SweepGrid {
  std::vector<double> x0_over_g;
  std::vector<double> omega_axis;  // omega_c / x0 or omega_c / g
  OmegaAxis omega_mode = OmegaAxis::ratio_to_x0;
  double g = 1.0;
  double epsilon = 2.0;
  SpectatorSpec spectator{};
  CouplingAxis coupling_axis = CouplingAxis::x;

  void validate() const;
  std::size_t size() const noexcept { return x0_over_g.size() * omega_axis.size(); }
  ModelParams params_at(std::size_t i, std::size_t j) const;

  /// n log-spaced (or linear) values in [lo, hi].
  static std::vector<double> axis(double lo, double hi, std::size_t n, bool log_spaced);
};

enum class PointStatus { ok = 0, monotone_window = 1, failed = 2 };

struct SweepPoint {
  std::size_t i = 0;  // x0 index
  std::size_t j = 0;  // omega index
  double x0 = 0.0;
  double omega_c = 0.0;
  double delta = 0.0;
  double delta_c2 = 0.0;
  Regime regime = Regime::I;
  double tf_opt = 0.0;
  double infidelity = 0.0;
  double purity = 0.0;
  PointStatus status = PointStatus::ok;
  std::string error;
};

struct SweepOptions {
  PipelineConfig pipeline{};
  DeltaC2Options thresholds{};
  std::size_t workers = 1;
  /// Points already computed (e.g. from an interrupted run); matched by (i, j).
  std::vector<SweepPoint> completed{};
  /// Called once per freshly computed point, from the calling thread.
  std::function<void(const SweepPoint&)> on_point{};
};

struct SweepResult {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<SweepPoint> points;  // row-major in (i, j)
  std::size_t failed = 0;
};

SweepResult run_sweep(const SweepGrid& grid, const SweepOptions& opts = {});

enum class NoiseShape { uniform, gaussian };

struct RobustnessOptions {
  double rel_sigma = 0.1;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  NoiseShape shape = NoiseShape::uniform;
  PipelineConfig pipeline{};
  std::size_t workers = 1;
};

struct RobustnessStats {
  std::size_t samples = 0;
  std::size_t failed = 0;
  double nominal = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
  std::vector<double> infidelities;  // in draw order
};

/// Perturbs x0, omega_c and g independently by relative noise of size
/// rel_sigma (epsilon fixed) and reruns the single-point pipeline.
RobustnessStats robustness_study(const ModelParams& p, const RobustnessOptions& opts);

std::string to_string(PointStatus s);

}  // namespace ias
