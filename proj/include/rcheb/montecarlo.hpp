#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "rcheb/closedform.hpp"
#include "rcheb/distribution.hpp"
#include "rcheb/errors.hpp"
#include "rcheb/numeric.hpp"
#include "rcheb/series.hpp"
#include "rcheb/stat_series.hpp"

namespace rcheb {

struct SimulationConfig {
  DistributionModel a_model;
  DistributionModel y0_model;
  DistributionModel y1_model;
  std::vector<double> grid;
  std::uint64_t m = 10000;
  std::uint64_t seed = 0;
};

namespace detail {

// Draw-index streams; each draw re-keys its own substream, so every variate is
// a pure function of (seed, stream, draw) and results cannot depend on how
// draws are partitioned across workers.
inline constexpr std::uint64_t kStreamA = 0;
inline constexpr std::uint64_t kStreamY0 = 1;
inline constexpr std::uint64_t kStreamY1 = 2;

// Fixed block decomposition: block boundaries depend only on m, never on the
// worker count, and block results merge in index order. This is what makes
// the output bit-identical across thread counts.
inline constexpr std::uint64_t kMcBlock = 4096;

struct McBlockResult {
  std::vector<WelfordAccumulator> stats;  // one per grid point
};

}  // namespace detail

/// Monte Carlo statistics of the solution: samples (A, Y0, Y1), evaluates the
/// trigonometric closed-form path on every grid point, and reports sample
/// mean, sample standard deviation (divisor m-1) and standard error.
inline StatSeries simulate(const SimulationConfig& config, int threads = 1) {
  if (config.m < 1) throw ConfigError("simulate: m must be >= 1");
  const std::size_t points = config.grid.size();
  std::vector<double> thetas;
  thetas.reserve(points);
  for (double s : config.grid) thetas.push_back(theta(s));

  const std::uint64_t blocks = (config.m + detail::kMcBlock - 1) / detail::kMcBlock;
  std::vector<detail::McBlockResult> results(blocks);

  auto run_block = [&](std::uint64_t b) {
    auto& stats = results[b].stats;
    stats.assign(points, WelfordAccumulator{});
    const std::uint64_t lo = b * detail::kMcBlock;
    const std::uint64_t hi = std::min(config.m, lo + detail::kMcBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RngStream ra(config.seed, detail::kStreamA, i);
      RngStream ry0(config.seed, detail::kStreamY0, i);
      RngStream ry1(config.seed, detail::kStreamY1, i);
      const double a = sample(config.a_model, ra);
      const double y0 = sample(config.y0_model, ry0);
      const double y1 = sample(config.y1_model, ry1);
      for (std::size_t j = 0; j < points; ++j)
        stats[j].add(path_Y_theta(a, y0, y1, thetas[j]));
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(blocks)));
  if (workers == 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::uint64_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1))
            run_block(b);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  StatSeries out;
  out.method = "mc";
  out.grid = config.grid;
  out.mean.reserve(points);
  out.std_dev.reserve(points);
  out.second_moment.reserve(points);
  out.std_error.reserve(points);
  const double sqrt_m = std::sqrt(static_cast<double>(config.m));
  for (std::size_t j = 0; j < points; ++j) {
    WelfordAccumulator acc;
    for (std::uint64_t b = 0; b < blocks; ++b) acc.merge(results[b].stats[j]);
    const double mean = acc.mean();
    const double var = acc.sample_variance();
    const double sd = std::sqrt(var);
    out.mean.push_back(mean);
    out.std_dev.push_back(sd);
    out.second_moment.push_back(mean * mean + var);
    out.std_error.push_back(sd / sqrt_m);
  }
  return out;
}

struct SweepRow {
  std::uint64_t m;
  double max_abs_error;  // max over the grid of |MC mean - reference mean|
};

/// Runs the simulation at each sample count and reports the worst deviation
/// of the empirical mean from the truncated-series mean at the given order.
inline std::vector<SweepRow> convergence_sweep(const SimulationConfig& config,
                                               std::span<const std::uint64_t> m_list,
                                               int reference_order = 20, int threads = 1) {
  if (m_list.empty()) throw ConfigError("convergence_sweep: m_list is empty");
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1])
      throw ConfigError("convergence_sweep: m_list must be strictly increasing");
  const TruncatedSolution reference(
      config.a_model, reference_order,
      InitialMoments::from_models(config.y0_model, config.y1_model));
  std::vector<double> ref_mean;
  ref_mean.reserve(config.grid.size());
  for (double s : config.grid) ref_mean.push_back(reference.mean(s));

  std::vector<SweepRow> rows;
  rows.reserve(m_list.size());
  for (std::uint64_t m : m_list) {
    SimulationConfig run = config;
    run.m = m;
    const StatSeries stats = simulate(run, threads);
    double err = 0.0;
    for (std::size_t j = 0; j < stats.size(); ++j)
      err = std::max(err, std::abs(stats.mean[j] - ref_mean[j]));
    rows.push_back({m, err});
  }
  return rows;
}

}  // namespace rcheb
