#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ias/qcore.hpp"

namespace ias {

/// Embedded Runge-Kutta pair of Dormand and Prince, order 5(4), for complex
/// first-order systems y' = f(t, y). Steps are shortened to land exactly on
/// each requested output time, so no interpolation error enters the samples.
class DormandPrince {
 public:
  using Rhs = std::function<void(double t, const ComplexVector& y, ComplexVector& dydt)>;
  using Observer = std::function<void(std::size_t index, double t, const ComplexVector& y)>;

  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
  };

  /// Relative and absolute tolerance are both `tol`; the error norm is the max
  /// of err_i / (tol * (1 + max(|y_i|, |y_new_i|))).
  DormandPrince(Rhs rhs, double tol);

  /// For norm-conserving flows: additionally keep | ||y(t)|| - ||y(t0)|| |
  /// below budget * (t - t0) / (t_end - t0), shortening steps as needed (at
  /// most 16x below the accuracy-controlled step). No renormalisation takes
  /// place. A budget of 0 disables the check.
  void conserve_norm(double budget) { norm_budget_ = budget; }

  /// Integrates from times.front() to times.back(); `times` must be strictly
  /// increasing. Throws PropagationError if the step size underflows.
  Stats integrate(ComplexVector y, const std::vector<double>& times, const Observer& observe) const;

 private:
  double initial_step(double t, const ComplexVector& y, const ComplexVector& f0, double t_end) const;

  Rhs rhs_;
  double tol_;
  double norm_budget_ = 0.0;
};

}  // namespace ias
