#include "ias/spectrum.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "ias/error.hpp"

namespace ias {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio
constexpr double kExactCrossing = 1e-6;           // refined gap (units of g) treated as a true crossing

double adjacent_gap(const ModelParams& p, double t, std::size_t lower) {
  const RealVector e = eigenvalues_at(t, p);
  return e(static_cast<Eigen::Index>(lower + 1)) - e(static_cast<Eigen::Index>(lower));
}

template <class F>
PairGap golden_section(F&& f, double a, double b, std::size_t lower) {
  PairGap out;
  out.lower = lower;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int iter = 0;
  const int max_iter = 200;
  while (std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)) && iter < max_iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    ++iter;
  }
  out.converged = iter < max_iter;
  out.bracket_lo = a;
  out.bracket_hi = b;
  out.t_at = 0.5 * (a + b);
  out.gap = f(out.t_at);
  return out;
}

ComplexMatrix fix_phases(ComplexMatrix v, const RealVector& values, const SpectrumSlice* prev, bool& skipped) {
  const Eigen::Index n = v.cols();
  for (Eigen::Index k = 0; k < n; ++k) {
    const bool degenerate = (k > 0 && values(k) - values(k - 1) < kTolerances.degeneracy) ||
                            (k + 1 < n && values(k + 1) - values(k) < kTolerances.degeneracy);
    if (degenerate) {
      skipped = true;
      continue;
    }
    Complex ref;
    if (prev != nullptr) {
      ref = prev->eigenvectors.col(k).dot(v.col(k));  // <prev_k | v_k>
    } else {
      Eigen::Index imax = 0;
      v.col(k).cwiseAbs().maxCoeff(&imax);
      ref = v(imax, k);
    }
    const double mag = std::abs(ref);
    if (mag > 0.0) v.col(k) *= std::conj(ref) / mag;
  }
  return v;
}

}  // namespace

double delta(const ModelParams& p) {
  return std::hypot(2.0 * p.x0, p.omega_c);
}

RealVector eigenvalues_at(double t, const ModelParams& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(h_total(t, p)), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

SpectrumSlice spectrum_slice(double t, const ModelParams& p, const SpectrumSlice* prev) {
  if (prev != nullptr && static_cast<std::size_t>(prev->eigenvalues.size()) != p.dim())
    throw Error(ErrorKind::dimension_mismatch, "spectrum_slice: previous slice has a different dimension");
  EigenSystem es = eigh(h_total(t, p));
  SpectrumSlice slice;
  slice.t = t;
  slice.eigenvectors = fix_phases(std::move(es.vectors), es.values, prev, slice.gauge_skipped);
  slice.eigenvalues = std::move(es.values);
  return slice;
}

std::vector<SpectrumSlice> spectrum_scan(const ModelParams& p, double t0, double t1, std::size_t n) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "spectrum_scan: need at least 2 samples");
  if (!(t1 > t0)) throw Error(ErrorKind::invalid_argument, "spectrum_scan: t1 must exceed t0");
  std::vector<SpectrumSlice> out;
  out.reserve(n);
  const double dt = (t1 - t0) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = k + 1 == n ? t1 : t0 + static_cast<double>(k) * dt;
    out.push_back(spectrum_slice(t, p, out.empty() ? nullptr : &out.back()));
  }
  return out;
}

MinimalGap minimal_gap(const ModelParams& p, double t_lo, double t_hi, std::size_t n_samples) {
  if (n_samples < 3) throw Error(ErrorKind::invalid_argument, "minimal_gap: need at least 3 samples");
  if (!(t_hi > t_lo)) throw Error(ErrorKind::invalid_argument, "minimal_gap: empty time range");
  const std::size_t dim = p.dim();
  const std::size_t pairs = dim - 1;
  std::vector<double> ts(n_samples);
  std::vector<RealVector> spectra(n_samples);
  const double dt = (t_hi - t_lo) / static_cast<double>(n_samples - 1);
  for (std::size_t k = 0; k < n_samples; ++k) {
    ts[k] = t_lo + static_cast<double>(k) * dt;
    spectra[k] = eigenvalues_at(ts[k], p);
  }

  MinimalGap out;
  out.per_pair.reserve(pairs);
  for (std::size_t j = 0; j < pairs; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    std::size_t best = 0;
    for (std::size_t k = 1; k < n_samples; ++k)
      if (spectra[k](jj + 1) - spectra[k](jj) < spectra[best](jj + 1) - spectra[best](jj)) best = k;
    const double a = ts[best == 0 ? 0 : best - 1];
    const double b = ts[std::min(best + 1, n_samples - 1)];
    out.per_pair.push_back(golden_section([&](double t) { return adjacent_gap(p, t, j); }, a, b, j));
  }
  out.central = out.per_pair[dim / 2 - 1];
  out.smallest = *std::min_element(out.per_pair.begin(), out.per_pair.end(),
                                   [](const PairGap& l, const PairGap& r) { return l.gap < r.gap; });
  return out;
}

bool has_off_center_closing(double x0, double omega_c, double g, double epsilon, const DeltaC2Options& opts) {
  ModelParams p;
  p.g = g;
  p.epsilon = epsilon;
  p.x0 = x0;
  p.omega_c = omega_c;
  const double t_width = opts.t_width_factor * g / epsilon;
  const double t_max = opts.window_factor * g / epsilon;
  const std::size_t n = std::max<std::size_t>(opts.t_samples, 5);
  const double dt = t_max / static_cast<double>(n - 1);
  std::vector<double> gap(n);
  for (std::size_t k = 0; k < n; ++k) {
    const RealVector e = eigenvalues_at(static_cast<double>(k) * dt, p);
    gap[k] = e(2) - e(1);
  }
  // The spectrum is symmetric in t, so t >= 0 suffices.
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t <= t_width || gap[k] > gap[k - 1] || gap[k] > gap[k + 1]) continue;
    if (gap[k] >= gap[0] - opts.gap_fraction * g) continue;
    const PairGap refined = golden_section([&](double tt) { return adjacent_gap(p, tt, 1); }, t - dt, t + dt, 1);
    if (refined.gap < kExactCrossing * g) continue;
    return true;
  }
  return false;
}

DeltaC2 delta_c2(double ray_x0, double ray_omega_c, double g, double epsilon, const DeltaC2Options& opts) {
  if (ray_x0 < 0.0 || ray_omega_c < 0.0) throw Error(ErrorKind::invalid_argument, "delta_c2: ray components must be >= 0");
  if (!(opts.gap_fraction > 0.0 && opts.gap_fraction < 1.0))
    throw Error(ErrorKind::invalid_argument, "delta_c2: gap_fraction must lie in (0, 1)");
  DeltaC2 out;
  if (ray_x0 == 0.0 && ray_omega_c == 0.0) return out;
  // Canonical direction, so every point on one ray sees identical arithmetic.
  if (ray_x0 > 0.0) {
    ray_omega_c /= ray_x0;
    ray_x0 = 1.0;
  } else {
    ray_omega_c = 1.0;
  }
  const double norm = std::hypot(2.0 * ray_x0, ray_omega_c);
  const auto closes = [&](double d) {
    const double s = d / norm;
    return has_off_center_closing(s * ray_x0, s * ray_omega_c, g, epsilon, opts);
  };
  const double lo = 1e-2 * g;
  const double hi = opts.delta_cap_factor * g;
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(opts.coarse_steps));
  double prev = 0.0;
  for (std::size_t k = 0; k <= opts.coarse_steps; ++k) {
    const double d = k == opts.coarse_steps ? hi : lo * std::pow(ratio, static_cast<double>(k));
    if (!closes(d)) {
      prev = d;
      continue;
    }
    double a = prev;
    double b = d;
    while (b - a > opts.rel_precision * b) {
      const double m = 0.5 * (a + b);
      (closes(m) ? b : a) = m;
    }
    out.found = true;
    out.value = b;
    return out;
  }
  return out;
}

Regime regime_for(double delta_value, double delta_c1, double delta_c2_value) {
  if (delta_value < delta_c1) return Regime::I;
  if (delta_value < delta_c2_value) return Regime::II;
  return Regime::III;
}

RegimeClassification classify_regime(const ModelParams& p, const DeltaC2Options& opts) {
  p.validate();
  RegimeClassification out;
  out.delta = delta(p);
  out.delta_c1 = p.g;
  const DeltaC2 c2 = delta_c2(p.x0, p.omega_c, p.g, p.epsilon, opts);
  out.delta_c2 = c2.value;
  out.delta_c2_found = c2.found;
  out.regime = regime_for(out.delta, out.delta_c1, out.delta_c2);
  return out;
}

AdiabaticityRatio adiabaticity_ratio(double t, const ModelParams& p) {
  const EigenSystem es = eigh(h_total(t, p));
  const ComplexMatrix coupling = es.vectors.adjoint() * dh_dt(p) * es.vectors;
  const Eigen::Index n = es.values.size();
  // Degenerate levels are grouped; between two groups the basis-independent
  // quantity is the operator norm of the coupling block.
  std::vector<Eigen::Index> start{0};
  for (Eigen::Index k = 1; k < n; ++k)
    if (es.values(k) - es.values(k - 1) >= kTolerances.degeneracy) start.push_back(k);
  start.push_back(n);
  AdiabaticityRatio out;
  for (std::size_t a = 0; a + 1 < start.size(); ++a) {
    const Eigen::Index size = start[a + 1] - start[a];
    out.excluded_pairs += static_cast<std::size_t>(size * (size - 1) / 2);
  }
  const std::size_t groups = start.size() - 1;
  if (groups < 2) throw Error(ErrorKind::numerical, "adiabaticity_ratio: every pair of levels is degenerate");
  for (std::size_t a = 0; a < groups; ++a) {
    for (std::size_t b = a + 1; b < groups; ++b) {
      const Eigen::Index ra = start[a], na = start[a + 1] - ra;
      const Eigen::Index rb = start[b], nb = start[b + 1] - rb;
      const double ea = es.values.segment(ra, na).mean();
      const double eb = es.values.segment(rb, nb).mean();
      const ComplexMatrix block = coupling.block(ra, rb, na, nb);
      const double element = na == 1 && nb == 1 ? std::abs(block(0, 0))
                                                : Eigen::JacobiSVD<ComplexMatrix>(block).singularValues()(0);
      out.value = std::max(out.value, element / ((eb - ea) * (eb - ea)));
    }
  }
  return out;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    case Regime::III: return "III";
  }
  return "?";
}

}  // namespace ias
