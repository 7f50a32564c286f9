#include "ias/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "ias/error.hpp"

namespace ias {

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::nan("");
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return v[lo] + w * (v[hi] - v[lo]);
}

// Static block partition of [0, n) into `workers` contiguous ranges.
std::pair<std::size_t, std::size_t> block(std::size_t n, std::size_t workers, std::size_t w) {
  return {n * w / workers, n * (w + 1) / workers};
}

}  // namespace

TfOptimum optimize_tf(const Trajectory& traj, double target, double half_window) {
  const std::vector<double>& t = traj.times;
  const std::vector<double>& p = traj.p_of_t;
  if (t.size() < 3 || p.size() != t.size()) throw Error(ErrorKind::invalid_argument, "optimize_tf: need >= 3 samples");
  TfOptimum out;
  std::size_t best = t.size();
  double best_dist = 0.0;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    if (std::abs(t[k] - target) > half_window) continue;
    if (!(p[k] < p[k - 1] && p[k] <= p[k + 1])) continue;
    const double dist = std::abs(t[k] - target);
    if (best == t.size() || dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  const bool have_purity = traj.purity_of_t.size() == t.size();
  if (best == t.size()) {
    const auto it = std::min_element(t.begin(), t.end(),
                                     [&](double a, double b) { return std::abs(a - target) < std::abs(b - target); });
    const auto k = static_cast<std::size_t>(it - t.begin());
    out.t_f = t[k];
    out.p_min = p[k];
    out.purity = have_purity ? traj.purity_of_t[k] : 0.0;
    out.monotone_window = true;
    return out;
  }

  const double h = t[best + 1] - t[best];
  const double pm = p[best - 1], p0 = p[best], pp = p[best + 1];
  const double curv = pm - 2.0 * p0 + pp;
  double offset = 0.0;  // vertex position relative to t[best], in units of h
  if (curv > 0.0) offset = std::clamp(0.5 * (pm - pp) / curv, -1.0, 1.0);
  out.t_f = t[best] + offset * h;
  // Quadratic through the three samples, evaluated at the vertex.
  const auto quad = [&](double a, double b, double c) {
    return b + 0.5 * offset * (c - a) + 0.5 * offset * offset * (a - 2.0 * b + c);
  };
  out.p_min = std::clamp(quad(pm, p0, pp), 0.0, 1.0);
  if (have_purity) {
    const auto& g = traj.purity_of_t;
    out.purity = std::clamp(quad(g[best - 1], g[best], g[best + 1]), 0.0, 1.0);
  }
  return out;
}

TimeGrid pipeline_grid(const ModelParams& p, const PipelineConfig& cfg) {
  const double unit = p.g / p.epsilon;
  const double t_start = -cfg.target_factor * unit;
  const double t_end = (cfg.target_factor + cfg.window_factor) * unit;
  const auto intervals = static_cast<std::size_t>(
      std::llround((cfg.target_factor * 2.0 + cfg.window_factor) * cfg.samples_per_unit));
  return TimeGrid{t_start, t_end, std::max<std::size_t>(intervals, 2) + 1};
}

PointOutcome evaluate_point(const ModelParams& p, const PipelineConfig& cfg) {
  p.validate();
  const TimeGrid grid = pipeline_grid(p, cfg);
  const Trajectory traj = evolve_unitary(p, grid, initial_state(p, grid.t_start), EvolveOptions{cfg.tol, false});
  const double unit = p.g / p.epsilon;
  const TfOptimum opt = optimize_tf(traj, cfg.target_factor * unit, cfg.window_factor * unit);
  return PointOutcome{opt.t_f, opt.p_min, opt.purity, opt.monotone_window};
}

void SweepGrid::validate() const {
  if (x0_over_g.empty() || omega_axis.empty()) throw Error(ErrorKind::invalid_argument, "sweep grid axes must be non-empty");
  const auto increasing = [](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
      if (!(v[k] > v[k - 1])) return false;
    return true;
  };
  if (!increasing(x0_over_g) || !increasing(omega_axis))
    throw Error(ErrorKind::invalid_argument, "sweep grid axes must be strictly increasing");
  for (std::size_t i = 0; i < x0_over_g.size(); ++i)
    for (std::size_t j = 0; j < omega_axis.size(); ++j) params_at(i, j).validate();
}

ModelParams SweepGrid::params_at(std::size_t i, std::size_t j) const {
  ModelParams p;
  p.g = g;
  p.epsilon = epsilon;
  p.spectator = spectator;
  p.coupling_axis = coupling_axis;
  p.x0 = x0_over_g.at(i) * g;
  p.omega_c = omega_mode == OmegaAxis::ratio_to_x0 ? omega_axis.at(j) * p.x0 : omega_axis.at(j) * g;
  return p;
}

std::vector<double> SweepGrid::axis(double lo, double hi, std::size_t n, bool log_spaced) {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "axis: need at least one point");
  if (n == 1) return {lo};
  if (!(hi > lo)) throw Error(ErrorKind::invalid_argument, "axis: hi must exceed lo");
  if (log_spaced && !(lo > 0.0)) throw Error(ErrorKind::invalid_argument, "axis: log spacing requires lo > 0");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(n - 1);
    out[k] = log_spaced ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

SweepResult run_sweep(const SweepGrid& grid, const SweepOptions& opts) {
  grid.validate();
  SweepResult result;
  result.rows = grid.x0_over_g.size();
  result.cols = grid.omega_axis.size();
  result.points.resize(result.rows * result.cols);

  std::vector<char> done(result.points.size(), 0);
  for (const SweepPoint& sp : opts.completed) {
    if (sp.i >= result.rows || sp.j >= result.cols) continue;
    const std::size_t idx = sp.i * result.cols + sp.j;
    result.points[idx] = sp;
    done[idx] = 1;
  }

  // Delta_c2 depends only on the ray direction. In ratio mode every column is
  // one ray (1, omega_c / x0), so it is computed once per column up front.
  const std::size_t workers = std::max<std::size_t>(1, opts.workers);
  std::vector<DeltaC2> column_c2;
  if (grid.omega_mode == OmegaAxis::ratio_to_x0) {
    column_c2.resize(result.cols);
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(workers, result.cols);
    for (std::size_t w = 0; w < n; ++w) {
      pool.emplace_back([&, w, n] {
        const auto [b, e] = block(result.cols, n, w);
        for (std::size_t j = b; j < e; ++j)
          column_c2[j] = delta_c2(1.0, grid.omega_axis[j], grid.g, grid.epsilon, opts.thresholds);
      });
    }
  }
  const auto threshold = [&](const ModelParams& p, std::size_t j) {
    if (!column_c2.empty()) return column_c2[j];
    return delta_c2(p.x0, p.omega_c, p.g, p.epsilon, opts.thresholds);
  };

  const auto compute = [&](std::size_t i, std::size_t j) {
    SweepPoint sp;
    sp.i = i;
    sp.j = j;
    const ModelParams p = grid.params_at(i, j);
    sp.x0 = p.x0;
    sp.omega_c = p.omega_c;
    sp.delta = delta(p);
    try {
      const DeltaC2 c2 = threshold(p, j);
      sp.delta_c2 = c2.value;
      sp.regime = regime_for(sp.delta, p.g, c2.value);
      const PointOutcome out = evaluate_point(p, opts.pipeline);
      sp.tf_opt = out.t_f;
      sp.infidelity = out.infidelity;
      sp.purity = out.purity;
      sp.status = out.monotone_window ? PointStatus::monotone_window : PointStatus::ok;
    } catch (const Error& e) {
      sp.status = PointStatus::failed;
      sp.tf_opt = std::nan("");
      sp.infidelity = std::nan("");
      sp.purity = std::nan("");
      sp.error = e.what();
    }
    return sp;
  };

  std::deque<SweepPoint> finished;
  std::mutex mutex;
  std::condition_variable cv;
  const std::size_t row_workers = std::min(workers, result.rows);
  std::size_t pending = 0;
  for (char d : done) pending += d ? 0 : 1;

  {
    std::vector<std::jthread> pool;
    pool.reserve(row_workers);
    for (std::size_t w = 0; w < row_workers; ++w) {
      pool.emplace_back([&, w] {
        const auto [row_begin, row_end] = block(result.rows, row_workers, w);
        for (std::size_t i = row_begin; i < row_end; ++i) {
          for (std::size_t j = 0; j < result.cols; ++j) {
            if (done[i * result.cols + j]) continue;
            SweepPoint sp = compute(i, j);
            {
              std::lock_guard lock(mutex);
              finished.push_back(std::move(sp));
            }
            cv.notify_one();
          }
        }
      });
    }

    // Single collector: the calling thread owns the result and the callback.
    while (pending > 0) {
      std::unique_lock lock(mutex);
      cv.wait(lock, [&] { return !finished.empty(); });
      std::deque<SweepPoint> batch;
      batch.swap(finished);
      lock.unlock();
      for (SweepPoint& sp : batch) {
        if (opts.on_point) opts.on_point(sp);
        result.points[sp.i * result.cols + sp.j] = std::move(sp);
        --pending;
      }
    }
  }

  result.failed = static_cast<std::size_t>(std::count_if(
      result.points.begin(), result.points.end(), [](const SweepPoint& sp) { return sp.status == PointStatus::failed; }));
  return result;
}

RobustnessStats robustness_study(const ModelParams& p, const RobustnessOptions& opts) {
  p.validate();
  if (!(opts.rel_sigma >= 0.0 && opts.rel_sigma <= 0.5))
    throw Error(ErrorKind::invalid_argument, "robustness: rel_sigma must lie in [0, 0.5]");
  if (opts.samples < 10) throw Error(ErrorKind::invalid_argument, "robustness: need at least 10 samples");

  // Draw every perturbation up front so the result does not depend on the
  // number of workers.
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw = [&] {
    return 1.0 + opts.rel_sigma * (opts.shape == NoiseShape::uniform ? uniform(rng) : normal(rng));
  };
  std::vector<ModelParams> perturbed(opts.samples, p);
  for (ModelParams& q : perturbed) {
    q.x0 = std::max(0.0, p.x0 * draw());
    q.omega_c = std::max(0.0, p.omega_c * draw());
    q.g = p.g * draw();
  }

  RobustnessStats stats;
  stats.samples = opts.samples;
  stats.nominal = evaluate_point(p, opts.pipeline).infidelity;
  stats.infidelities.assign(opts.samples, std::nan(""));

  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, opts.samples));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const auto [b, e] = block(opts.samples, workers, w);
        for (std::size_t k = b; k < e; ++k) {
          try {
            stats.infidelities[k] = evaluate_point(perturbed[k], opts.pipeline).infidelity;
          } catch (const Error&) {
            // left as NaN and counted below
          }
        }
      });
    }
  }

  std::vector<double> ok;
  ok.reserve(opts.samples);
  for (double v : stats.infidelities) {
    if (std::isnan(v))
      ++stats.failed;
    else
      ok.push_back(v);
  }
  std::sort(ok.begin(), ok.end());
  if (!ok.empty()) {
    const double n = static_cast<double>(ok.size());
    stats.mean = std::accumulate(ok.begin(), ok.end(), 0.0) / n;
    double var = 0.0;
    for (double v : ok) var += (v - stats.mean) * (v - stats.mean);
    stats.stddev = ok.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    stats.min = ok.front();
    stats.max = ok.back();
    stats.q50 = quantile_sorted(ok, 0.5);
    stats.q90 = quantile_sorted(ok, 0.9);
    stats.q99 = quantile_sorted(ok, 0.99);
  }
  return stats;
}

std::string to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::monotone_window: return "monotone";
    case PointStatus::failed: return "failed";
  }
  return "unknown";
}

}  // namespace ias
