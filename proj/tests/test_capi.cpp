#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>
#include <unistd.h>

#include "doctest.h"
#include "ias/ias.h"

namespace {

ias_model* make_model(double x0, double wc, int kind = IAS_SPECTATOR_QUBIT, size_t truncation = 2) {
  ias_model_params p;
  ias_model_params_default(&p);
  p.x0 = x0;
  p.omega_c = wc;
  p.spectator_kind = kind;
  p.truncation = truncation;
  ias_model* m = nullptr;
  REQUIRE(ias_model_create(&p, &m) == IAS_OK);
  return m;
}

}  // namespace

TEST_CASE("version and defaults") {
  CHECK(std::string(ias_version()).size() > 0);
  ias_model_params p;
  ias_model_params_default(&p);
  CHECK(p.g == 1.0);
  CHECK(p.epsilon == 2.0);
  CHECK(p.x0 == 0.0);
  CHECK(p.truncation == 2);
  CHECK(std::isnan(ias_last_failure_time()));
}

TEST_CASE("model creation validates its input") {
  ias_model_params p;
  ias_model_params_default(&p);
  ias_model* m = nullptr;
  CHECK(ias_model_create(nullptr, &m) == IAS_ERROR_INVALID_ARGUMENT);
  CHECK(ias_model_create(&p, nullptr) == IAS_ERROR_INVALID_ARGUMENT);
  p.g = -1.0;
  CHECK(ias_model_create(&p, &m) == IAS_ERROR_INVALID_ARGUMENT);
  CHECK(m == nullptr);
  CHECK(std::string(ias_last_error()).size() > 0);
  ias_model_params_default(&p);
  p.spectator_kind = IAS_SPECTATOR_OSCILLATOR;
  p.truncation = 4;
  p.spectator_init = IAS_INIT_FOCK;
  p.fock_level = 9;
  CHECK(ias_model_create(&p, &m) == IAS_ERROR_INVALID_ARGUMENT);
  p.spectator_kind = 7;
  CHECK(ias_model_create(&p, &m) == IAS_ERROR_INVALID_ARGUMENT);
  ias_model_destroy(nullptr);
}

TEST_CASE("model queries") {
  ias_model* m = make_model(2.0, 0.5);
  CHECK(ias_model_dimension(m) == 4);
  ias_model_params back;
  REQUIRE(ias_model_get_params(m, &back) == IAS_OK);
  CHECK(back.x0 == 2.0);
  CHECK(back.omega_c == 0.5);

  double e[4];
  REQUIRE(ias_model_eigenvalues(m, 0.0, e, 4) == IAS_OK);
  CHECK(e[0] == doctest::Approx(-2.5156).epsilon(1e-4));
  CHECK(e[3] == doctest::Approx(2.5156).epsilon(1e-4));
  CHECK(ias_model_eigenvalues(m, 0.0, e, 3) == IAS_ERROR_INVALID_ARGUMENT);

  std::vector<double> h(32);
  REQUIRE(ias_model_hamiltonian(m, 0.0, h.data(), h.size()) == IAS_OK);
  double trace = 0.0;
  for (int k = 0; k < 4; ++k) trace += h[2 * (k * 4 + k)];
  CHECK(std::abs(trace) < 1e-15);
  CHECK(ias_model_hamiltonian(m, 0.0, h.data(), 31) == IAS_ERROR_INVALID_ARGUMENT);

  double d = 0.0;
  REQUIRE(ias_model_delta(m, &d) == IAS_OK);
  CHECK(d == doctest::Approx(std::sqrt(16.25)));
  double ratio = 0.0;
  CHECK(ias_adiabaticity_ratio(m, 0.0, &ratio) == IAS_OK);
  CHECK(ratio > 0.0);
  double gap = 0.0, at = 0.0;
  CHECK(ias_minimal_gap(m, -5.0, 5.0, 401, &gap, &at) == IAS_OK);
  CHECK(gap > 0.0);
  CHECK(ias_minimal_gap(m, -5.0, 5.0, 2, &gap, &at) == IAS_ERROR_INVALID_ARGUMENT);
  ias_model_destroy(m);
}

TEST_CASE("classification through the C interface") {
  ias_model* r1 = make_model(0.25, 0.5);
  ias_model* r2 = make_model(2.0, 0.5);
  ias_model* r3 = make_model(4.0, 12.0);
  ias_regime_info info;
  REQUIRE(ias_classify(r1, &info) == IAS_OK);
  CHECK(info.regime == IAS_REGIME_I);
  CHECK(info.delta_c1 == 1.0);
  REQUIRE(ias_classify(r2, &info) == IAS_OK);
  CHECK(info.regime == IAS_REGIME_II);
  REQUIRE(ias_classify(r3, &info) == IAS_OK);
  CHECK(info.regime == IAS_REGIME_III);
  CHECK(info.delta_c2_found == 1);
  CHECK(info.delta_c2 < info.delta);
  CHECK(ias_classify(r3, nullptr) == IAS_ERROR_INVALID_ARGUMENT);
  ias_model_destroy(r1);
  ias_model_destroy(r2);
  ias_model_destroy(r3);
}

TEST_CASE("spectrum scan handle") {
  ias_model* m = make_model(1.0, 1.0);
  ias_spectrum* s = nullptr;
  REQUIRE(ias_spectrum_scan(m, -2.0, 2.0, 21, &s) == IAS_OK);
  CHECK(ias_spectrum_samples(s) == 21);
  CHECK(ias_spectrum_branches(s) == 4);
  double t = 0.0, e0 = 0.0, e10 = 0.0;
  CHECK(ias_spectrum_time(s, 10, &t) == IAS_OK);
  CHECK(t == doctest::Approx(0.0));
  CHECK(ias_spectrum_energy(s, 0, 0, &e0) == IAS_OK);
  CHECK(ias_spectrum_energy(s, 20, 0, &e10) == IAS_OK);
  CHECK(e0 == doctest::Approx(e10).epsilon(1e-10));
  CHECK(ias_spectrum_energy(s, 21, 0, &e0) == IAS_ERROR_INVALID_ARGUMENT);
  CHECK(ias_spectrum_energy(s, 0, 4, &e0) == IAS_ERROR_INVALID_ARGUMENT);
  CHECK(ias_spectrum_scan(m, 2.0, -2.0, 21, &s) != IAS_OK);
  ias_spectrum_destroy(s);
  ias_model_destroy(m);
}

TEST_CASE("evolution through the C interface") {
  ias_model* m = make_model(2.0, 0.5);
  ias_evolve_options o;
  REQUIRE(ias_evolve_options_default(m, &o) == IAS_OK);
  CHECK(o.t_start == -5.0);
  CHECK(o.t_end == 5.0);
  CHECK(o.samples == 2001);
  o.t_end = 7.0;
  o.samples = 1201;
  ias_trajectory* tr = nullptr;
  REQUIRE(ias_evolve(m, &o, &tr) == IAS_OK);
  CHECK(ias_trajectory_size(tr) == 1201);
  ias_sample s;
  REQUIRE(ias_trajectory_sample(tr, 0, &s) == IAS_OK);
  CHECK(s.t == -5.0);
  CHECK(s.purity == doctest::Approx(1.0));
  CHECK(s.p < 1e-3);
  CHECK(ias_trajectory_sample(tr, 1201, &s) == IAS_ERROR_INVALID_ARGUMENT);
  ias_tf_result opt;
  REQUIRE(ias_trajectory_optimize_tf(tr, 5.0, 2.0, &opt) == IAS_OK);
  CHECK(opt.p_min < 0.05);
  CHECK(opt.monotone_window == 0);

  const auto path = std::filesystem::temp_directory_path() / ("ias_capi_" + std::to_string(::getpid()) + ".csv");
  CHECK(ias_trajectory_write_csv(tr, path.string().c_str()) == IAS_OK);
  CHECK(std::filesystem::file_size(path) > 0);
  std::filesystem::remove(path);
  CHECK(ias_trajectory_write_csv(tr, "/nonexistent-dir/x.csv") == IAS_ERROR_IO);
  ias_trajectory_destroy(tr);

  o.tol = 1.0;
  CHECK(ias_evolve(m, &o, &tr) == IAS_ERROR_INVALID_ARGUMENT);
  ias_evolve_options_default(m, &o);
  o.kappa = 0.1;
  CHECK(ias_evolve(m, &o, &tr) == IAS_ERROR_INVALID_ARGUMENT);  // kappa needs the master equation
  o.lindblad = 1;
  o.samples = 201;
  REQUIRE(ias_evolve(m, &o, &tr) == IAS_OK);
  REQUIRE(ias_trajectory_sample(tr, 200, &s) == IAS_OK);
  CHECK(s.purity < 1.0);
  ias_trajectory_destroy(tr);
  ias_model_destroy(m);

  CHECK(ias_lz_infidelity(1.0, 2.0) == doctest::Approx(std::exp(-M_PI / 4.0)));
  CHECK(std::isnan(ias_lz_infidelity(1.0, -1.0)));
}

namespace {

struct Collected {
  std::vector<ias_sweep_point> points;
};

void collect(void* user, const ias_sweep_point* p) {
  static_cast<Collected*>(user)->points.push_back(*p);
}

}  // namespace

TEST_CASE("sweep through the C interface, including resumption") {
  ias_sweep_config c{};
  ias_model_params_default(&c.base);
  const double x0[] = {0.3, 1.0, 2.0};
  const double wc[] = {0.25, 1.0};
  c.x0_over_g = x0;
  c.n_x0 = 3;
  c.omega_axis = wc;
  c.n_omega = 2;
  c.tol = 1e-9;
  c.workers = 2;

  Collected all;
  ias_sweep_result* r = nullptr;
  REQUIRE(ias_sweep_run(&c, nullptr, 0, collect, &all, &r) == IAS_OK);
  CHECK(ias_sweep_result_count(r) == 6);
  CHECK(ias_sweep_result_failed(r) == 0);
  CHECK(all.points.size() == 6);
  ias_sweep_point p;
  REQUIRE(ias_sweep_result_point(r, 5, &p) == IAS_OK);
  CHECK(p.i == 2);
  CHECK(p.j == 1);
  CHECK(p.omega_c == doctest::Approx(2.0));
  CHECK(ias_sweep_result_point(r, 6, &p) == IAS_ERROR_INVALID_ARGUMENT);

  std::vector<ias_sweep_point> done;
  for (size_t k = 0; k < 4; ++k) {
    ias_sweep_result_point(r, k, &p);
    done.push_back(p);
  }
  Collected rest;
  ias_sweep_result* r2 = nullptr;
  REQUIRE(ias_sweep_run(&c, done.data(), done.size(), collect, &rest, &r2) == IAS_OK);
  CHECK(rest.points.size() == 2);
  for (size_t k = 0; k < 6; ++k) {
    ias_sweep_point a, b;
    ias_sweep_result_point(r, k, &a);
    ias_sweep_result_point(r2, k, &b);
    CHECK(a.infidelity == b.infidelity);
    CHECK(a.regime == b.regime);
  }
  ias_sweep_result_destroy(r);
  ias_sweep_result_destroy(r2);

  c.n_omega = 0;
  CHECK(ias_sweep_run(&c, nullptr, 0, nullptr, nullptr, &r) == IAS_ERROR_INVALID_ARGUMENT);
  CHECK(ias_sweep_run(nullptr, nullptr, 0, nullptr, nullptr, &r) == IAS_ERROR_INVALID_ARGUMENT);
}

TEST_CASE("robustness through the C interface") {
  ias_model* m = make_model(2.0, 0.5);
  ias_robustness_options o{0.05, 10, 7, 0, 1e-9, 1};
  ias_robustness_stats a, b;
  std::vector<double> xs(10), ys(10);
  REQUIRE(ias_robustness(m, &o, &a, xs.data()) == IAS_OK);
  o.workers = 2;
  REQUIRE(ias_robustness(m, &o, &b, ys.data()) == IAS_OK);
  CHECK(xs == ys);
  CHECK(a.samples == 10);
  CHECK(a.min <= a.q50);
  CHECK(a.q50 <= a.max);
  CHECK(ias_robustness(m, &o, &a, nullptr) == IAS_OK);
  o.samples = 3;
  CHECK(ias_robustness(m, &o, &a, nullptr) == IAS_ERROR_INVALID_ARGUMENT);
  ias_model_destroy(m);
}
