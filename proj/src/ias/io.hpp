#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ias/dynamics.hpp"
#include "ias/spectrum.hpp"
#include "ias/sweep.hpp"

namespace ias::io {

/// Shortest-safe decimal for a double: 17 significant digits, "%.17g".
std::string format_double(double v);

/// Columns: t, P, gamma, S2, norm_defect.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Columns: t, E_1..E_n, [E0_1..E0_n from `reference`], flags.
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumSlice>& slices,
                        const std::vector<SpectrumSlice>* reference = nullptr);

/// Columns: x0, omega_c, delta, regime, tf_opt, infidelity, purity, status.
void write_sweep_csv(std::ostream& os, const SweepResult& result);
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepPoint& sp);

/// Writes through a temporary file and renames, so readers never see a
/// half-written file.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace ias::io
