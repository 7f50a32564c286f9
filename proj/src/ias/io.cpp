#include "ias/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ias/error.hpp"

namespace ias::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,P,gamma,S2,norm_defect\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]) << ',' << format_double(traj.p_of_t[k]) << ','
       << format_double(traj.purity_of_t[k]) << ',' << format_double(traj.renyi_of_t[k]) << ','
       << format_double(traj.norm_defect[k]) << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumSlice>& slices,
                        const std::vector<SpectrumSlice>* reference) {
  if (slices.empty()) return;
  const Eigen::Index n = slices.front().eigenvalues.size();
  if (reference != nullptr && reference->size() != slices.size())
    throw Error(ErrorKind::dimension_mismatch, "spectrum csv: reference scan has a different length");
  os << 't';
  for (Eigen::Index k = 1; k <= n; ++k) os << ",E_" << k;
  if (reference != nullptr)
    for (Eigen::Index k = 1; k <= n; ++k) os << ",E0_" << k;
  os << ",flags\n";
  for (std::size_t s = 0; s < slices.size(); ++s) {
    os << format_double(slices[s].t);
    for (Eigen::Index k = 0; k < n; ++k) os << ',' << format_double(slices[s].eigenvalues(k));
    if (reference != nullptr)
      for (Eigen::Index k = 0; k < n; ++k) os << ',' << format_double((*reference)[s].eigenvalues(k));
    os << ',' << (slices[s].gauge_skipped ? "degenerate" : "") << '\n';
  }
}

std::string sweep_csv_header() {
  return "x0,omega_c,delta,regime,tf_opt,infidelity,purity,status";
}

std::string sweep_csv_row(const SweepPoint& sp) {
  std::ostringstream os;
  os << format_double(sp.x0) << ',' << format_double(sp.omega_c) << ',' << format_double(sp.delta) << ','
     << to_string(sp.regime) << ',' << format_double(sp.tf_opt) << ',' << format_double(sp.infidelity) << ','
     << format_double(sp.purity) << ',' << to_string(sp.status);
  return os.str();
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << sweep_csv_header() << '\n';
  for (const SweepPoint& sp : result.points) os << sweep_csv_row(sp) << '\n';
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp + " for writing");
    out << contents;
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace ias::io
