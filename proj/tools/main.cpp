// ias: command-line front end of the simulator (links the C API only).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "ias/ias.h"
#include "json.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using cli::Command;
using cli::ConfigError;
using cli::RunConfig;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kPropagation = 3, kPartialSweep = 4 };

struct RuntimeFailure : std::runtime_error {
  RuntimeFailure(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
  int code;
};

void check(ias_status s, const char* what) {
  if (s == IAS_OK) return;
  const std::string msg = std::string(what) + ": " + ias_last_error();
  // Propagation messages already carry the failure time.
  if (s == IAS_ERROR_PROPAGATION || s == IAS_ERROR_NUMERICAL) throw RuntimeFailure(kPropagation, msg);
  throw RuntimeFailure(kFailure, msg);
}

template <class T, void (*Destroy)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Destroy(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};
using Model = Handle<ias_model, ias_model_destroy>;
using Spectrum = Handle<ias_spectrum, ias_spectrum_destroy>;
using Trajectory = Handle<ias_trajectory, ias_trajectory_destroy>;
using SweepResult = Handle<ias_sweep_result, ias_sweep_result_destroy>;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw RuntimeFailure(kFailure, "cannot write '" + tmp + "'");
    os << contents;
    if (!os.flush()) throw RuntimeFailure(kFailure, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw RuntimeFailure(kFailure, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

// --out, else $IAS_OUT_DIR/<subcommand>.<ext>, else ./<subcommand>.csv for
// tables and stdout (empty string) for JSON records.
std::string output_path(const RunConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  const bool table = cfg.command == Command::spectrum || cfg.command == Command::evolve || cfg.command == Command::sweep;
  const std::string name = std::string(cli::to_string(cfg.command)) + (table ? ".csv" : ".json");
  if (const char* dir = std::getenv("IAS_OUT_DIR"); dir != nullptr && *dir != '\0') return (fs::path(dir) / name).string();
  return table ? name : std::string();
}

class Manifest {
 public:
  explicit Manifest(const RunConfig& cfg)
      : cfg_(cfg), started_(std::chrono::steady_clock::now()), started_at_(utc_now()) {}

  void write(const std::string& output, const json& extra = json::object()) const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    json m = {
        {"tool", "ias"},
        {"version", ias_version()},
        {"subcommand", cli::to_string(cfg_.command)},
        {"config", cfg_.resolved},
        {"config_hash", cli::config_hash(cfg_.command, cfg_.resolved)},
        {"seed", cfg_.seed},
        {"workers", cfg_.workers},
        {"output", output},
        {"started_at", started_at_},
        {"wall_clock_seconds", wall},
    };
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    write_atomically(output + ".manifest.json", m.dump(2) + "\n");
  }

 private:
  const RunConfig& cfg_;
  std::chrono::steady_clock::time_point started_;
  std::string started_at_;
};

void create_model(const ias_model_params& p, Model& m) {
  check(ias_model_create(&p, m.out()), "model");
}

int cmd_spectrum(const RunConfig& cfg) {
  Manifest manifest(cfg);
  Model model, bare;
  create_model(cfg.model, model);
  ias_model_params p0 = cfg.model;
  p0.x0 = 0.0;
  create_model(p0, bare);
  Spectrum spec, ref;
  check(ias_spectrum_scan(model.get(), cfg.ti, cfg.tf, cfg.samples, spec.out()), "spectrum");
  check(ias_spectrum_scan(bare.get(), cfg.ti, cfg.tf, cfg.samples, ref.out()), "reference spectrum");
  const std::string path = output_path(cfg);
  check(ias_spectrum_write_csv(spec.get(), ref.get(), path.c_str()), "write spectrum");
  manifest.write(path, {{"branches", ias_spectrum_branches(spec.get())}});
  return kOk;
}

int cmd_evolve(const RunConfig& cfg) {
  Manifest manifest(cfg);
  Model model;
  create_model(cfg.model, model);
  ias_evolve_options opts;
  check(ias_evolve_options_default(model.get(), &opts), "options");
  opts.t_start = cfg.ti;
  opts.t_end = cfg.tf;
  opts.samples = cfg.samples;
  opts.tol = cfg.tol;
  opts.lindblad = cfg.lindblad ? 1 : 0;
  opts.kappa = cfg.kappa;
  opts.channel = cfg.channel;
  Trajectory traj;
  check(ias_evolve(model.get(), &opts, traj.out()), "evolve");

  Trajectory base;
  if (cfg.baseline) {
    ias_model_params p0 = cfg.model;
    p0.x0 = 0.0;
    Model bare;
    create_model(p0, bare);
    ias_evolve_options bo = opts;
    bo.lindblad = 0;
    bo.kappa = 0.0;
    check(ias_evolve(bare.get(), &bo, base.out()), "baseline evolve");
  }

  const std::size_t n = ias_trajectory_size(traj.get());
  std::string csv = cfg.baseline ? "t,P,gamma,S2,norm_defect,P_lz\n" : "t,P,gamma,S2,norm_defect\n";
  double purity_min = 1.0;
  ias_sample s{}, b{};
  for (std::size_t k = 0; k < n; ++k) {
    check(ias_trajectory_sample(traj.get(), k, &s), "sample");
    purity_min = std::min(purity_min, s.purity);
    csv += fmt(s.t) + ',' + fmt(s.p) + ',' + fmt(s.purity) + ',' + fmt(s.renyi) + ',' + fmt(s.norm_defect);
    if (cfg.baseline) {
      check(ias_trajectory_sample(base.get(), k, &b), "baseline sample");
      csv += ',' + fmt(b.p);
    }
    csv += '\n';
  }
  const std::string path = output_path(cfg);
  write_atomically(path, csv);

  const double unit = cfg.model.g / cfg.model.epsilon;
  ias_tf_result tf{};
  check(ias_trajectory_optimize_tf(traj.get(), 10.0 * unit, 4.0 * unit, &tf), "optimize t_f");
  json summary = {
      {"p_final", s.p},
      {"purity_final", s.purity},
      {"purity_min", purity_min},
      {"tf_opt", tf.t_f},
      {"infidelity_at_tf_opt", tf.p_min},
      {"purity_at_tf_opt", tf.purity},
      {"monotone_window", tf.monotone_window != 0},
  };
  if (cfg.baseline) summary["p_final_lz"] = b.p;
  manifest.write(path, {{"summary", summary}});
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

// Partial sweep file: a hash line, a header, then one row per finished point.
// Rows are appended and flushed as points complete; --resume reads them back.
constexpr const char* kPartialTag = "# ias sweep partial ";
constexpr const char* kPartialHeader = "i,j,x0,omega_c,delta,delta_c2,regime,tf_opt,infidelity,purity,status";

std::string partial_row(const ias_sweep_point& p) {
  return std::to_string(p.i) + ',' + std::to_string(p.j) + ',' + fmt(p.x0) + ',' + fmt(p.omega_c) + ',' +
         fmt(p.delta) + ',' + fmt(p.delta_c2) + ',' + std::to_string(p.regime) + ',' + fmt(p.tf_opt) + ',' +
         fmt(p.infidelity) + ',' + fmt(p.purity) + ',' + std::to_string(p.status) + '\n';
}

bool parse_partial_row(const std::string& line, std::size_t rows, std::size_t cols, ias_sweep_point& p) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
  if (f.size() != 11) return false;
  try {
    std::size_t used = 0;
    const auto whole = [&](const std::string& s, auto parse) {
      auto v = parse(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    };
    const auto u = [&](const std::string& s) { return whole(s, [](const std::string& x, std::size_t* n) { return std::stoull(x, n); }); };
    const auto d = [&](const std::string& s) { return whole(s, [](const std::string& x, std::size_t* n) { return std::stod(x, n); }); };
    const auto i = [&](const std::string& s) { return whole(s, [](const std::string& x, std::size_t* n) { return std::stoi(x, n); }); };
    p.i = u(f[0]);
    p.j = u(f[1]);
    p.x0 = d(f[2]);
    p.omega_c = d(f[3]);
    p.delta = d(f[4]);
    p.delta_c2 = d(f[5]);
    p.regime = i(f[6]);
    p.tf_opt = d(f[7]);
    p.infidelity = d(f[8]);
    p.purity = d(f[9]);
    p.status = i(f[10]);
  } catch (const std::exception&) {
    return false;
  }
  return p.i < rows && p.j < cols && p.status != IAS_POINT_FAILED;
}

std::vector<ias_sweep_point> read_partial(const std::string& path, const std::string& hash, std::size_t rows,
                                          std::size_t cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream ss(contents);
  std::string line;
  if (!std::getline(ss, line) || line != kPartialTag + hash)
    throw ConfigError("'" + path + "' was written for a different configuration; remove it or drop --resume");
  if (!std::getline(ss, line) || line != kPartialHeader) return {};
  std::map<std::pair<std::size_t, std::size_t>, ias_sweep_point> done;
  // Only newline-terminated rows count: an interrupted write leaves a torn last line.
  std::size_t consumed = static_cast<std::size_t>(ss.tellg());
  while (consumed < contents.size()) {
    const std::size_t nl = contents.find('\n', consumed);
    if (nl == std::string::npos) break;
    ias_sweep_point p{};
    if (parse_partial_row(contents.substr(consumed, nl - consumed), rows, cols, p)) done[{p.i, p.j}] = p;
    consumed = nl + 1;
  }
  std::vector<ias_sweep_point> out;
  out.reserve(done.size());
  for (const auto& [key, p] : done) out.push_back(p);
  return out;
}

struct PartialWriter {
  std::FILE* file = nullptr;
  ~PartialWriter() {
    if (file != nullptr) std::fclose(file);
  }
};

void on_point(void* user, const ias_sweep_point* point) {
  auto* w = static_cast<PartialWriter*>(user);
  if (w->file == nullptr || point->status == IAS_POINT_FAILED) return;
  const std::string row = partial_row(*point);
  std::fwrite(row.data(), 1, row.size(), w->file);
  std::fflush(w->file);
}

int cmd_sweep(const RunConfig& cfg) {
  Manifest manifest(cfg);
  const std::string path = output_path(cfg);
  const std::string partial_path = path + ".partial";
  const std::string hash = cli::config_hash(cfg.command, cfg.resolved);
  const std::vector<double> x0 = cfg.grid_x0.values();
  const std::vector<double> wc = cfg.grid_wc.values();

  std::vector<ias_sweep_point> done;
  if (cfg.resume) done = read_partial(partial_path, hash, x0.size(), wc.size());

  std::string head = std::string(kPartialTag) + hash + "\n" + kPartialHeader + "\n";
  for (const auto& p : done) head += partial_row(p);
  write_atomically(partial_path, head);
  PartialWriter writer;
  writer.file = std::fopen(partial_path.c_str(), "ab");
  if (writer.file == nullptr) throw RuntimeFailure(kFailure, "cannot append to '" + partial_path + "'");

  ias_sweep_config sc{};
  sc.base = cfg.model;
  sc.x0_over_g = x0.data();
  sc.n_x0 = x0.size();
  sc.omega_axis = wc.data();
  sc.n_omega = wc.size();
  sc.omega_over_g = cfg.omega_over_g ? 1 : 0;
  sc.tol = cfg.tol;
  sc.workers = cfg.workers;
  SweepResult result;
  check(ias_sweep_run(&sc, done.data(), done.size(), on_point, &writer, result.out()), "sweep");
  std::fclose(writer.file);
  writer.file = nullptr;

  check(ias_sweep_result_write_csv(result.get(), path.c_str()), "write sweep");
  const std::size_t failed = ias_sweep_result_failed(result.get());
  std::size_t regime_count[4] = {0, 0, 0, 0};
  std::size_t below = 0;
  for (std::size_t k = 0; k < ias_sweep_result_count(result.get()); ++k) {
    ias_sweep_point p{};
    check(ias_sweep_result_point(result.get(), k, &p), "sweep point");
    if (p.regime >= 1 && p.regime <= 3) ++regime_count[p.regime];
    if (p.regime == IAS_REGIME_II && p.infidelity < 5e-3) ++below;
  }
  manifest.write(path, {{"points", ias_sweep_result_count(result.get())},
                        {"resumed_points", done.size()},
                        {"failed_points", failed},
                        {"regime_counts", {{"I", regime_count[1]}, {"II", regime_count[2]}, {"III", regime_count[3]}}},
                        {"regime_II_below_5e-3", below}});
  std::remove(partial_path.c_str());
  if (failed > 0) {
    std::cerr << "ias: " << failed << " sweep point(s) failed; see the status column of " << path << '\n';
    return kPartialSweep;
  }
  return kOk;
}

void emit_json(const RunConfig& cfg, const json& record) {
  const std::string path = output_path(cfg);
  if (path.empty()) {
    std::cout << record.dump(2) << '\n';
    return;
  }
  Manifest manifest(cfg);
  write_atomically(path, record.dump(2) + "\n");
  manifest.write(path);
}

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

int cmd_classify(const RunConfig& cfg) {
  Model model;
  create_model(cfg.model, model);
  ias_regime_info info{};
  check(ias_classify(model.get(), &info), "classify");
  static const char* names[] = {"?", "I", "II", "III"};
  emit_json(cfg, {{"delta", info.delta},
                  {"delta_c1", info.delta_c1},
                  {"delta_c2", finite_or_null(info.delta_c2)},
                  {"delta_c2_found", info.delta_c2_found != 0},
                  {"regime", names[info.regime >= 1 && info.regime <= 3 ? info.regime : 0]}});
  return kOk;
}

int cmd_robustness(const RunConfig& cfg) {
  Model model;
  create_model(cfg.model, model);
  ias_robustness_options ro{cfg.rel_sigma, cfg.n_samples, cfg.seed, cfg.gaussian ? 1 : 0, cfg.tol, cfg.workers};
  ias_robustness_stats st{};
  std::vector<double> per(cfg.n_samples);
  check(ias_robustness(model.get(), &ro, &st, per.data()), "robustness");
  json values = json::array();
  for (double v : per) values.push_back(finite_or_null(v));
  emit_json(cfg, {{"samples", st.samples},
                  {"failed", st.failed},
                  {"nominal", finite_or_null(st.nominal)},
                  {"mean", finite_or_null(st.mean)},
                  {"stddev", finite_or_null(st.stddev)},
                  {"min", finite_or_null(st.min)},
                  {"max", finite_or_null(st.max)},
                  {"q50", finite_or_null(st.q50)},
                  {"q90", finite_or_null(st.q90)},
                  {"q99", finite_or_null(st.q99)},
                  {"infidelities", values}});
  return st.failed > 0 ? kPropagation : kOk;
}

// Registers a typed flag whose value lands in the flag layer under `key`.
template <class T>
void flag(CLI::App* app, json& layer, const std::string& name, const std::string& key, const std::string& help) {
  app->add_option_function<T>(name, [&layer, key](const T& v) { layer[key] = v; }, help);
}

void switch_flag(CLI::App* app, json& layer, const std::string& name, const std::string& key, const std::string& help) {
  app->add_flag_function(name, [&layer, key](std::int64_t) { layer[key] = true; }, help);
}

void model_flags(CLI::App* app, json& layer, bool point) {
  flag<double>(app, layer, "--g", "g", "minimum LZ gap g (default 1)");
  flag<double>(app, layer, "--epsilon", "epsilon", "sweep rate eps (default 2)");
  if (point) {
    flag<double>(app, layer, "--x0", "x0", "coupling x0 (default 0)");
    flag<double>(app, layer, "--omega-c", "omega_c", "spectator frequency (default 0)");
  }
  flag<std::string>(app, layer, "--spectator", "spectator", "qubit | oscillator");
  flag<std::uint64_t>(app, layer, "--truncation", "truncation", "oscillator Fock dimension (default 20)");
  flag<std::string>(app, layer, "--spectator-init", "spectator_init",
                    "ground | excited | tau_x_plus | tau_x_minus | fock");
  flag<std::uint64_t>(app, layer, "--fock-level", "fock_level", "Fock level for --spectator-init fock");
  flag<std::string>(app, layer, "--coupling-axis", "coupling_axis", "x | y");
}

void window_flags(CLI::App* app, json& layer) {
  flag<double>(app, layer, "--ti", "ti", "start time (default -10 g/eps)");
  flag<double>(app, layer, "--tf", "tf", "end time (default +10 g/eps)");
  flag<std::uint64_t>(app, layer, "--samples", "samples", "output samples (default 2001)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landau-Zener qubit with a quantum spectator: spectra, dynamics, sweeps"};
  app.set_version_flag("--version", std::string(ias_version()));
  app.require_subcommand(1);

  json flags = json::object();
  std::string config_path;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat JSON config file (or a run manifest)");
    flag<std::string>(sub, flags, "--out", "out", "output path");
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "eigenvalue branches over a time window");
  model_flags(spectrum, flags, true);
  window_flags(spectrum, flags);
  common(spectrum);

  CLI::App* evolve = app.add_subcommand("evolve", "single trajectory P(t), purity, Renyi entropy");
  model_flags(evolve, flags, true);
  window_flags(evolve, flags);
  flag<double>(evolve, flags, "--tol", "tol", "integrator tolerance (default 1e-9)");
  flag<double>(evolve, flags, "--kappa", "kappa", "spectator dissipation rate (enables the master equation)");
  flag<std::string>(evolve, flags, "--channel", "channel", "decay | dephasing");
  switch_flag(evolve, flags, "--lindblad", "lindblad", "use the master equation");
  switch_flag(evolve, flags, "--baseline", "baseline", "add the bare LZ (x0 = 0) column P_lz");
  common(evolve);

  CLI::App* sweep = app.add_subcommand("sweep", "(x0, omega_c) infidelity and purity map");
  model_flags(sweep, flags, false);
  flag<std::string>(sweep, flags, "--grid-x0", "grid_x0", "x0/g axis lo:hi:n[:log|lin] (default 0.05:8:81:log)");
  flag<std::string>(sweep, flags, "--grid-wc", "grid_wc", "omega axis lo:hi:n[:log|lin] (default 0.05:8:81:log)");
  flag<std::string>(sweep, flags, "--omega-axis", "omega_axis", "ratio_to_x0 | ratio_to_g");
  flag<double>(sweep, flags, "--tol", "tol", "integrator tolerance (default 1e-9)");
  flag<std::uint64_t>(sweep, flags, "--workers", "workers", "worker threads (default 1)");
  switch_flag(sweep, flags, "--resume", "resume", "continue from the .partial file of an interrupted run");
  common(sweep);

  CLI::App* classify = app.add_subcommand("classify", "coupling regime of one parameter point");
  model_flags(classify, flags, true);
  common(classify);

  CLI::App* robustness = app.add_subcommand("robustness", "infidelity under relative parameter noise");
  model_flags(robustness, flags, true);
  flag<double>(robustness, flags, "--tol", "tol", "integrator tolerance (default 1e-9)");
  flag<double>(robustness, flags, "--rel-sigma", "rel_sigma", "relative noise amplitude (default 0.1)");
  flag<std::uint64_t>(robustness, flags, "--n-samples", "n_samples", "number of noisy samples (default 100)");
  flag<std::uint64_t>(robustness, flags, "--seed", "seed", "random seed (default 1)");
  flag<std::string>(robustness, flags, "--noise", "noise", "uniform | gaussian");
  flag<std::uint64_t>(robustness, flags, "--workers", "workers", "worker threads (default 1)");
  common(robustness);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  const std::pair<CLI::App*, Command> table[] = {{spectrum, Command::spectrum},
                                                 {evolve, Command::evolve},
                                                 {sweep, Command::sweep},
                                                 {classify, Command::classify},
                                                 {robustness, Command::robustness}};
  Command command = Command::spectrum;
  for (const auto& [sub, c] : table)
    if (sub->parsed()) command = c;

  RunConfig cfg;
  try {
    const json file_layer = config_path.empty() ? json::object() : cli::load_config_file(config_path, command);
    cfg = cli::resolve(command, file_layer, flags);
    if (command == Command::sweep) {
      const std::string path = output_path(cfg);
      if (cfg.resume && !fs::exists(path + ".partial"))
        std::cerr << "ias: no partial file for " << path << "; starting from scratch\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "ias: configuration error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    switch (command) {
      case Command::spectrum: return cmd_spectrum(cfg);
      case Command::evolve: return cmd_evolve(cfg);
      case Command::sweep: return cmd_sweep(cfg);
      case Command::classify: return cmd_classify(cfg);
      case Command::robustness: return cmd_robustness(cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "ias: configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const RuntimeFailure& e) {
    std::cerr << "ias: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "ias: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
