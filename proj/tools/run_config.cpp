#include "run_config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kModelKeys = {"g",          "epsilon",        "x0",         "omega_c",      "spectator",
                                             "truncation", "spectator_init", "fock_level", "coupling_axis"};

std::vector<std::string> with(std::vector<std::string> base, std::initializer_list<const char*> extra) {
  for (const char* k : extra) base.emplace_back(k);
  return base;
}

const std::vector<std::string>& keys_for(Command c) {
  static const auto spectrum = with(kModelKeys, {"ti", "tf", "samples", "out"});
  static const auto evolve =
      with(kModelKeys, {"ti", "tf", "samples", "tol", "lindblad", "kappa", "channel", "baseline", "out"});
  static const auto sweep =
      std::vector<std::string>{"g",        "epsilon", "spectator",  "truncation", "spectator_init", "fock_level",
                               "coupling_axis", "grid_x0", "grid_wc", "omega_axis", "tol",           "workers",
                               "out",      "resume"};
  static const auto classify = with(kModelKeys, {"out"});
  static const auto robustness =
      with(kModelKeys, {"tol", "rel_sigma", "n_samples", "seed", "noise", "workers", "out"});
  switch (c) {
    case Command::spectrum: return spectrum;
    case Command::evolve: return evolve;
    case Command::sweep: return sweep;
    case Command::classify: return classify;
    case Command::robustness: return robustness;
  }
  return spectrum;
}

// Typed accessors on the merged layer; each records the value it resolved to.
class Reader {
 public:
  explicit Reader(const json& merged) : merged_(merged) {}

  bool has(const char* key) const { return merged_.contains(key); }

  double number(const char* key, double fallback) {
    double v = fallback;
    if (merged_.contains(key)) {
      const json& j = merged_.at(key);
      if (!j.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
      v = j.get<double>();
    }
    if (!std::isfinite(v)) throw ConfigError(std::string("'") + key + "' must be finite");
    resolved_[key] = v;
    return v;
  }

  std::uint64_t integer(const char* key, std::uint64_t fallback, bool record = true) {
    std::uint64_t v = fallback;
    if (merged_.contains(key)) {
      const json& j = merged_.at(key);
      if (j.is_number_unsigned()) {
        v = j.get<std::uint64_t>();
      } else if (j.is_number_integer()) {
        if (j.get<std::int64_t>() < 0) throw ConfigError(std::string("'") + key + "' must be >= 0");
        v = j.get<std::uint64_t>();
      } else {
        throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
      }
    }
    if (record) resolved_[key] = v;
    return v;
  }

  bool boolean(const char* key, bool fallback) {
    bool v = fallback;
    if (merged_.contains(key)) {
      const json& j = merged_.at(key);
      if (!j.is_boolean()) throw ConfigError(std::string("'") + key + "' must be true or false");
      v = j.get<bool>();
    }
    resolved_[key] = v;
    return v;
  }

  std::string choice(const char* key, const std::string& fallback, std::initializer_list<const char*> options) {
    std::string v = fallback;
    if (merged_.contains(key)) {
      const json& j = merged_.at(key);
      if (!j.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
      v = j.get<std::string>();
    }
    if (std::none_of(options.begin(), options.end(), [&](const char* o) { return v == o; })) {
      std::string msg = std::string("'") + key + "' must be one of:";
      for (const char* o : options) msg += std::string(" ") + o;
      throw ConfigError(msg + " (got '" + v + "')");
    }
    resolved_[key] = v;
    return v;
  }

  AxisSpec axis(const char* key, const AxisSpec& fallback) {
    AxisSpec a = fallback;
    if (merged_.contains(key)) {
      const json& j = merged_.at(key);
      if (!j.is_string()) throw ConfigError(std::string("'") + key + "' must be a string lo:hi:n[:log|lin]");
      try {
        a = parse_axis(j.get<std::string>());
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("'") + key + "': " + e.what());
      }
    }
    resolved_[key] = a.text();
    return a;
  }

  json take() { return std::move(resolved_); }

 private:
  const json& merged_;
  json resolved_ = json::object();
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

ias_model_params read_model(Reader& r, Command c) {
  ias_model_params m;
  ias_model_params_default(&m);
  m.g = r.number("g", m.g);
  m.epsilon = r.number("epsilon", m.epsilon);
  if (c != Command::sweep) {
    m.x0 = r.number("x0", m.x0);
    m.omega_c = r.number("omega_c", m.omega_c);
  }
  const std::string kind = r.choice("spectator", "qubit", {"qubit", "oscillator"});
  m.spectator_kind = kind == "qubit" ? IAS_SPECTATOR_QUBIT : IAS_SPECTATOR_OSCILLATOR;
  m.truncation = r.integer("truncation", kind == "qubit" ? 2 : 20);
  const std::string init =
      r.choice("spectator_init", "ground", {"ground", "excited", "tau_x_plus", "tau_x_minus", "fock"});
  m.spectator_init = init == "ground"        ? IAS_INIT_GROUND
                     : init == "excited"     ? IAS_INIT_EXCITED
                     : init == "tau_x_plus"  ? IAS_INIT_TAU_X_PLUS
                     : init == "tau_x_minus" ? IAS_INIT_TAU_X_MINUS
                                             : IAS_INIT_FOCK;
  m.fock_level = r.integer("fock_level", 0);
  m.coupling_axis = r.choice("coupling_axis", "x", {"x", "y"}) == "x" ? IAS_COUPLING_X : IAS_COUPLING_Y;

  ias_model_params probe = m;
  if (c == Command::sweep) probe.x0 = probe.omega_c = 0.0;
  ias_model* model = nullptr;
  if (ias_model_create(&probe, &model) != IAS_OK) throw ConfigError(ias_last_error());
  ias_model_destroy(model);
  return m;
}

void read_window(Reader& r, RunConfig& cfg) {
  const double unit = cfg.model.g / cfg.model.epsilon;
  cfg.ti = r.number("ti", -10.0 * unit);
  cfg.tf = r.number("tf", 10.0 * unit);
  cfg.samples = r.integer("samples", 2001);
  require(cfg.tf > cfg.ti, "'tf' must be greater than 'ti'");
  require(cfg.samples >= 2, "'samples' must be at least 2");
  require(cfg.samples <= 10'000'000, "'samples' is unreasonably large");
}

void read_tol(Reader& r, RunConfig& cfg) {
  cfg.tol = r.number("tol", 1e-9);
  require(cfg.tol > 1e-14 && cfg.tol < 1e-4, "'tol' must lie in (1e-14, 1e-4)");
}

void read_workers(Reader& r, RunConfig& cfg) {
  cfg.workers = r.integer("workers", 1, false);
  require(cfg.workers >= 1 && cfg.workers <= 1024, "'workers' must lie in [1, 1024]");
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::evolve: return "evolve";
    case Command::sweep: return "sweep";
    case Command::classify: return "classify";
    case Command::robustness: return "robustness";
  }
  return "?";
}

std::vector<double> AxisSpec::values() const {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(n - 1);
    v[k] = log ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
  }
  v.back() = hi;
  return v;
}

std::string AxisSpec::text() const {
  std::ostringstream os;
  os.precision(17);
  os << lo << ':' << hi << ':' << n << ':' << (log ? "log" : "lin");
  return os.str();
}

AxisSpec parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3 && parts.size() != 4) throw ConfigError("expected lo:hi:n[:log|lin], got '" + text + "'");
  AxisSpec a;
  try {
    std::size_t used = 0;
    a.lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("lo");
    a.hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("hi");
    const long long n = std::stoll(parts[2], &used);
    if (used != parts[2].size() || n < 1) throw std::invalid_argument("n");
    a.n = static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("malformed axis '" + text + "'");
  }
  a.log = parts.size() == 3 || parts[3] == "log";
  if (parts.size() == 4 && parts[3] != "log" && parts[3] != "lin")
    throw ConfigError("axis spacing must be 'log' or 'lin', got '" + parts[3] + "'");
  if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || a.lo < 0.0) throw ConfigError("axis bounds must be finite and >= 0");
  if (a.n == 1 ? a.hi != a.lo : !(a.hi > a.lo)) throw ConfigError("axis must be strictly increasing (hi > lo)");
  if (a.log && a.lo <= 0.0) throw ConfigError("log-spaced axis needs lo > 0");
  if (a.n > 10'000) throw ConfigError("axis has too many points");
  return a;
}

const std::vector<std::string>& allowed_keys(Command c) {
  return keys_for(c);
}

json load_config_file(const std::string& path, Command c) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  // A run manifest can be used directly as a config file.
  if (doc.contains("config") && doc.contains("subcommand")) {
    if (doc.at("subcommand") != to_string(c))
      throw ConfigError("manifest belongs to subcommand '" + doc.at("subcommand").dump() + "'");
    if (!doc.at("config").is_object()) throw ConfigError("manifest 'config' must be an object");
    return doc.at("config");
  }
  return doc;
}

RunConfig resolve(Command c, const json& file_layer, const json& flag_layer) {
  json merged = json::object();
  for (const json* layer : {&file_layer, &flag_layer}) {
    if (layer->is_null()) continue;
    if (!layer->is_object()) throw ConfigError("configuration must be a JSON object");
    for (auto it = layer->begin(); it != layer->end(); ++it) merged[it.key()] = it.value();
  }
  const auto& allowed = keys_for(c);
  for (auto it = merged.begin(); it != merged.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key '" + it.key() + "' for subcommand '" + to_string(c) + "'");
  }

  RunConfig cfg;
  cfg.command = c;
  Reader r(merged);
  cfg.model = read_model(r, c);

  switch (c) {
    case Command::spectrum:
      read_window(r, cfg);
      break;
    case Command::evolve: {
      read_window(r, cfg);
      read_tol(r, cfg);
      cfg.lindblad = r.boolean("lindblad", r.has("kappa") || r.has("channel"));
      cfg.kappa = r.number("kappa", 0.0);
      cfg.channel = r.choice("channel", "decay", {"decay", "dephasing"}) == "decay" ? IAS_CHANNEL_DECAY
                                                                                   : IAS_CHANNEL_DEPHASING;
      cfg.baseline = r.boolean("baseline", false);
      require(cfg.kappa >= 0.0, "'kappa' must be >= 0");
      require(cfg.lindblad || cfg.kappa == 0.0, "'kappa' > 0 needs the master equation ('lindblad': true)");
      break;
    }
    case Command::sweep: {
      read_tol(r, cfg);
      cfg.grid_x0 = r.axis("grid_x0", AxisSpec{});
      cfg.grid_wc = r.axis("grid_wc", AxisSpec{});
      cfg.omega_over_g = r.choice("omega_axis", "ratio_to_x0", {"ratio_to_x0", "ratio_to_g"}) == "ratio_to_g";
      require(cfg.grid_x0.n * cfg.grid_wc.n <= 1'000'000, "sweep grid is too large");
      read_workers(r, cfg);
      cfg.resume = merged.contains("resume") && merged.at("resume").is_boolean() && merged.at("resume").get<bool>();
      if (merged.contains("resume") && !merged.at("resume").is_boolean()) throw ConfigError("'resume' must be true or false");
      break;
    }
    case Command::classify:
      break;
    case Command::robustness: {
      read_tol(r, cfg);
      cfg.rel_sigma = r.number("rel_sigma", 0.1);
      cfg.n_samples = r.integer("n_samples", 100);
      cfg.seed = r.integer("seed", 1);
      cfg.gaussian = r.choice("noise", "uniform", {"uniform", "gaussian"}) == "gaussian";
      require(cfg.rel_sigma >= 0.0 && cfg.rel_sigma <= 0.5, "'rel_sigma' must lie in [0, 0.5]");
      require(cfg.n_samples >= 10 && cfg.n_samples <= 1'000'000, "'n_samples' must lie in [10, 1e6]");
      read_workers(r, cfg);
      break;
    }
  }
  if (merged.contains("out")) {
    if (!merged.at("out").is_string() || merged.at("out").get<std::string>().empty())
      throw ConfigError("'out' must be a non-empty path");
    cfg.out = merged.at("out").get<std::string>();
  }
  cfg.resolved = r.take();
  return cfg;
}

std::string config_hash(Command c, const json& resolved) {
  const std::string canonical = json{{"subcommand", to_string(c)}, {"config", resolved}}.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace cli
