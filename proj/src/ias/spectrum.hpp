#pragma once

// Instantaneous (adiabatic-basis) analysis of h_total(t).

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ias/model.hpp"

namespace ias {

struct SpectrumSlice {
  double t = 0.0;
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors;  // columns, phase-aligned with the previous slice
  bool gauge_skipped = false;  // some branch sat in a degenerate block
};

/// Spectator splitting energy sqrt(4 x0^2 + omega_c^2).
double delta(const ModelParams& p);

RealVector eigenvalues_at(double t, const ModelParams& p);

/// Eigendecomposition of h_total(t). With `prev`, each non-degenerate
/// eigenvector is rotated so that <prev_k|v_k> is real and positive; without
/// it, the largest component of each eigenvector is made real and positive.
SpectrumSlice spectrum_slice(double t, const ModelParams& p, const SpectrumSlice* prev = nullptr);

/// Branch-continuous slices on a uniform grid of `n` points in [t0, t1].
std::vector<SpectrumSlice> spectrum_scan(const ModelParams& p, double t0, double t1, std::size_t n);

struct PairGap {
  std::size_t lower = 0;  // branch index; the pair is (lower, lower + 1)
  double gap = 0.0;
  double t_at = 0.0;
  bool converged = true;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

struct MinimalGap {
  PairGap central;                // middle pair, e.g. branches 2 and 3 of 4
  PairGap smallest;               // smallest over all adjacent pairs
  std::vector<PairGap> per_pair;  // one entry per adjacent pair
};

/// Coarse scan with `n_samples` points followed by golden-section refinement.
MinimalGap minimal_gap(const ModelParams& p, double t_lo, double t_hi, std::size_t n_samples = 2001);

struct DeltaC2Options {
  double gap_fraction = 0.1;     // depth of the off-centre dip, in units of g
  double t_width_factor = 0.5;   // off-centre means |t| > t_width_factor * g / eps
  double window_factor = 10.0;   // window |t| <= window_factor * g / eps
  double delta_cap_factor = 100.0;  // scan Delta up to delta_cap_factor * g
  double rel_precision = 1e-3;
  std::size_t t_samples = 801;
  std::size_t coarse_steps = 240;
};

struct DeltaC2 {
  bool found = false;  // false: no off-centre closing up to the cap ("above window")
  double value = std::numeric_limits<double>::infinity();
};

/// Whether the middle gap of the qubit-spectator spectrum at (x0, omega_c) has
/// an off-centre local minimum lying at least gap_fraction * g below its t = 0
/// value. Exact crossings of decoupled branches do not count.
bool has_off_center_closing(double x0, double omega_c, double g, double epsilon, const DeltaC2Options& opts = {});

/// Smallest Delta along the ray (x0, omega_c) = s * (ray_x0, ray_omega_c) at
/// which an off-centre closing appears.
DeltaC2 delta_c2(double ray_x0, double ray_omega_c, double g, double epsilon, const DeltaC2Options& opts = {});

enum class Regime { I, II, III };

struct RegimeClassification {
  double delta = 0.0;
  double delta_c1 = 0.0;
  double delta_c2 = std::numeric_limits<double>::infinity();
  bool delta_c2_found = false;
  Regime regime = Regime::I;
};

/// Half-open bins: [0, c1) -> I, [c1, c2) -> II, [c2, inf) -> III.
Regime regime_for(double delta, double delta_c1, double delta_c2);

RegimeClassification classify_regime(const ModelParams& p, const DeltaC2Options& opts = {});

struct AdiabaticityRatio {
  double value = 0.0;
  std::size_t excluded_pairs = 0;  // level pairs inside a degenerate group
};

/// max_{i != j} |<i|dH/dt|j>| / (E_i - E_j)^2. Levels closer than the
/// degeneracy tolerance form one group; between groups the matrix element is
/// replaced by the operator norm of the coupling block.
AdiabaticityRatio adiabaticity_ratio(double t, const ModelParams& p);

std::string to_string(Regime r);

}  // namespace ias
