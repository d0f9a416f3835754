#include "needle/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace needle {

std::vector<Vec> sample_initial_states(const Scenario& s, int n, std::uint64_t seed) {
  if (!s.sampling) throw std::invalid_argument("scenario '" + s.name + "' has no sampling region");
  const SamplingRegion& r = *s.sampling;
  const ModelPtr model = make_model(s.model);
  const Objective obj = make_objective(s.objective, *model);
  const auto rows = model->position_rows();
  const auto k = static_cast<Eigen::Index>(rows.size());
  const Vec target = obj.target(0.0);

  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(out.size()) < n) {
    Vec p(k);
    if (r.ball_radius) {
      std::uniform_real_distribution<double> u(-*r.ball_radius, *r.ball_radius);
      do {
        for (Eigen::Index i = 0; i < k; ++i) p[i] = u(rng);
      } while (p.norm() > *r.ball_radius);
    } else {
      for (Eigen::Index i = 0; i < k; ++i) {
        std::uniform_real_distribution<double> u(r.box_lo[i], r.box_hi[i]);
        p[i] = u(rng);
      }
    }
    Vec x = r.base_state;
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      x[rows[static_cast<std::size_t>(i)]] = p[i];
      const double e = p[i] - target[rows[static_cast<std::size_t>(i)]];
      d2 += e * e;
    }
    if (std::sqrt(d2) <= r.exclusion_radius) continue;
    if (obj.clearance(x, 0.0) <= 0.0) continue;
    out.push_back(x);
  }
  return out;
}

std::vector<Vec> initial_states_for(const Scenario& s, int n_trials, std::uint64_t seed) {
  if (s.initial_state && (n_trials == 1 || !s.sampling)) {
    return std::vector<Vec>(static_cast<std::size_t>(n_trials), *s.initial_state);
  }
  return sample_initial_states(s, n_trials, seed);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

MonteCarloSummary summarize(const std::string& name, SynthesisMode mode, std::uint64_t seed,
                            const std::vector<TrialResult>& trials) {
  MonteCarloSummary s;
  s.scenario = name;
  s.mode = mode;
  s.seed = seed;
  s.trials = static_cast<int>(trials.size());
  s.min_clearance = std::numeric_limits<double>::infinity();
  std::vector<double> times;
  for (const auto& t : trials) {
    s.min_clearance = std::min(s.min_clearance, t.min_clearance);
    if (t.converged) times.push_back(t.time_to_converge);
  }
  s.converged = static_cast<int>(times.size());
  s.success_rate = s.trials > 0 ? static_cast<double>(s.converged) / s.trials : 0.0;
  double sum = 0.0;
  for (double v : times) sum += v;
  s.mean_time = times.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(times.size());
  s.median_time = quantile(times, 0.5);
  s.p90_time = quantile(times, 0.9);
  s.max_time = quantile(times, 1.0);
  return s;
}

MonteCarloResult run_monte_carlo(const Scenario& s, SynthesisMode mode, int n_trials, std::uint64_t seed,
                                 int threads) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  const std::vector<Vec> starts = initial_states_for(s, n_trials, seed);
  std::vector<TrialResult> results(starts.size());

  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n_trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        results[i] = run_closed_loop(s, starts[i], mode);
        results[i].trial = static_cast<int>(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  MonteCarloResult out;
  out.summary = summarize(s.name, mode, seed, results);
  out.trials = std::move(results);
  return out;
}

}  // namespace needle
