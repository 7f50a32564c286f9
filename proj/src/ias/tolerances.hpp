#pragma once

#include <cstddef>

namespace ias {

/// Numerical thresholds shared by every module.
struct Tolerances {
  double hermiticity = 1e-10;      // max |h - h^dagger| accepted by eigh
  double state_norm = 1e-10;       // |  ||psi|| - 1  |
  double unitary_norm_budget = 5e-11;  // allowed norm drift over one unitary run
  double density_hermiticity = 1e-12;
  double density_trace = 1e-10;
  double density_min_eigenvalue = -1e-10;
  double degeneracy = 1e-9;        // eigenvalue spacing treated as degenerate
  std::size_t max_dimension = 4096;  // kron guard against runaway truncation
};

inline constexpr Tolerances kTolerances{};

}  // namespace ias
