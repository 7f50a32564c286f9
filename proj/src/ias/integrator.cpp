#include "ias/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ias/error.hpp"

namespace ias {

namespace {

// Butcher tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
// Fifth-order weights minus embedded fourth-order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;  // PI stabilisation
constexpr double kAlpha = 0.2 - 0.75 * kBeta;
constexpr double kNormFloor = 1e-13;  // roundoff allowance on top of the norm budget
constexpr double kStepDriftFloor = 1e-15;  // per-step drift below this is roundoff, not truncation
constexpr double kMaxNormRefinement = 16.0;

// Max norm: components that stay exactly zero (unused Fock levels) do not
// influence the step sequence.
double scaled_max(const ComplexVector& v, const ComplexVector& y0, const ComplexVector& y1, double tol) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = tol * (1.0 + std::max(std::abs(y0(i)), std::abs(y1(i))));
    out = std::max(out, std::abs(v(i)) / sc);
  }
  return out;
}

}  // namespace

DormandPrince::DormandPrince(Rhs rhs, double tol) : rhs_(std::move(rhs)), tol_(tol) {
  if (!(tol > 1e-14 && tol < 1e-4)) {
    std::ostringstream os;
    os << "integrator tolerance " << tol << " outside (1e-14, 1e-4)";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
}

double DormandPrince::initial_step(double t, const ComplexVector& y, const ComplexVector& f0, double t_end) const {
  const double d0 = scaled_max(y, y, y, tol_);
  const double d1 = scaled_max(f0, y, y, tol_);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, t_end - t);
  ComplexVector y1 = y + h0 * f0;
  ComplexVector f1(y.size());
  rhs_(t + h0, y1, f1);
  const double d2 = scaled_max(f1 - f0, y, y, tol_) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, t_end - t});
}

DormandPrince::Stats DormandPrince::integrate(ComplexVector y, const std::vector<double>& times,
                                              const Observer& observe) const {
  Stats stats;
  if (times.size() < 2) throw Error(ErrorKind::invalid_argument, "integrate: need at least two output times");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw Error(ErrorKind::invalid_argument, "integrate: output times must increase");

  const Eigen::Index n = y.size();
  ComplexVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

  double t = times.front();
  observe(0, t, y);
  rhs_(t, y, k1);
  ++stats.rhs_evaluations;
  double h = initial_step(t, y, k1, times.back());
  ++stats.rhs_evaluations;
  double err_prev = 1e-4;
  const double t0 = times.front();
  const double span = times.back() - t0;
  const double norm0 = y.norm();
  const double drift_rate = norm_budget_ / span;
  double h_norm = std::numeric_limits<double>::infinity();  // step limit from the norm budget

  for (std::size_t next = 1; next < times.size(); ++next) {
    const double target = times[next];
    while (t < target) {
      const double h_try = std::min(h, h_norm);
      const bool clipped = t + h_try >= target;
      const double step = clipped ? target - t : h_try;
      if (step < 1e-14 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "step size underflow at t = " << t;
        throw PropagationError(os.str(), t);
      }

      ytmp = y + step * a21 * k1;
      rhs_(t + c2 * step, ytmp, k2);
      ytmp = y + step * (a31 * k1 + a32 * k2);
      rhs_(t + c3 * step, ytmp, k3);
      ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs_(t + c4 * step, ytmp, k4);
      ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs_(t + c5 * step, ytmp, k5);
      ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const double t_new = clipped ? target : t + step;
      rhs_(t_new, ytmp, k6);
      ynew = y + step * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs_(t_new, ynew, k7);
      stats.rhs_evaluations += 6;
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double e = scaled_max(err, y, ynew, tol_);
      if (!std::isfinite(e)) {
        std::ostringstream os;
        os << "non-finite error estimate at t = " << t;
        throw PropagationError(os.str(), t);
      }

      // Drift of the norm per step scales like step^6; aim each step at half
      // its share of the budget.
      bool norm_ok = true;
      double h_drift = std::numeric_limits<double>::infinity();
      if (norm_budget_ > 0.0) {
        const double n_new = ynew.norm();
        const double step_drift = std::abs(n_new - y.norm());
        norm_ok = std::abs(n_new - norm0) <= drift_rate * (t_new - t0) + kNormFloor;
        if (step_drift > kStepDriftFloor) h_drift = step * std::pow(0.5 * drift_rate * step / step_drift, 0.2);
      }

      // The budget may cost at most kMaxNormRefinement times the steps that
      // accuracy alone needs; beyond that the drift is accepted and reported.
      const bool forced = step <= h / kMaxNormRefinement;
      if (e <= 1.0 && (norm_ok || forced)) {
        ++stats.accepted;
        y.swap(ynew);
        k1.swap(k7);
        t = t_new;
        const double fac =
            std::clamp(kSafety * std::pow(e, -kAlpha) * std::pow(err_prev, kBeta), kFacMin, kFacMax);
        err_prev = std::max(e, 1e-4);
        // A step shortened to hit an output time or to save norm says
        // nothing about the natural step size; keep the previous proposal.
        const double proposal = step * fac;
        if (step >= h || proposal > h) h = proposal;
        h_norm = std::max(h_drift, h / kMaxNormRefinement);
      } else {
        ++stats.rejected;
        if (e > 1.0) h = step * std::max(kFacMin, kSafety * std::pow(e, -kAlpha));
        if (!norm_ok) h_norm = std::max(std::min(h_drift, 0.5 * step), h / kMaxNormRefinement);
      }
    }
    observe(next, t, y);
  }
  return stats;
}

}  // namespace ias
