#pragma once

// Seeded batch Monte Carlo.  Every batch owns a generator seeded from
// (seed, stream, batch), so results do not depend on how batches are
// scheduled over threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "spde/errors.hpp"
#include "spde/numerics.hpp"

namespace spde {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed2024u;

struct McConfig {
  std::uint64_t samples = 10000;
  std::uint64_t seed = kDefaultSeed;
  int batches = 20;
  int n_max = 7;
  int time_draws = 4;  // simplex draws per spectral sample (>= 2)
  int threads = 1;
};

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;  // standard deviation of batch means / sqrt(batches)
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

inline McEstimate exact_estimate(double value, std::uint64_t seed = 0) {
  return {value, 0.0, 1, seed};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

inline Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t batch) {
  return Rng(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ batch));
}

// Uniform on the open interval (0,1), 53 random bits.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
  // Box-Muller, one output per call; the library distributions are not
  // reproducible across standard library implementations.
  const double u = uniform01(rng);
  const double v = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
}

// Runs `sample(rng)` cfg.samples times split over cfg.batches batches.
template <class SampleFn>
McEstimate run_batches(const McConfig& cfg, std::uint64_t stream, SampleFn&& sample) {
  require(cfg.samples > 0, ErrorKind::InvalidParams, "samples must be > 0");
  require(cfg.batches >= 2, ErrorKind::InvalidParams, "need at least 2 batches");
  require(cfg.samples >= static_cast<std::uint64_t>(cfg.batches), ErrorKind::InvalidParams,
          "samples must be >= batches");
  const auto nb = static_cast<std::uint64_t>(cfg.batches);
  std::vector<double> sums(nb, 0.0);
  std::vector<std::uint64_t> counts(nb, 0);

  auto run_one = [&](std::uint64_t b) {
    const std::uint64_t count = cfg.samples / nb + (b < cfg.samples % nb ? 1 : 0);
    Rng rng = substream(cfg.seed, stream, b);
    double s = 0.0;
    for (std::uint64_t i = 0; i < count; ++i) s += sample(rng);
    sums[b] = s;
    counts[b] = count;
  };

  const int threads = std::clamp(cfg.threads, 1, cfg.batches);
  if (threads == 1) {
    for (std::uint64_t b = 0; b < nb; ++b) run_one(b);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t b = w; b < nb; b += threads) run_one(b);
      });
    }
  }

  double total = 0.0;
  for (double s : sums) total += s;
  const double mean = total / static_cast<double>(cfg.samples);
  double var = 0.0;
  for (std::uint64_t b = 0; b < nb; ++b) {
    const double dev = sums[b] / static_cast<double>(counts[b]) - mean;
    var += dev * dev;
  }
  var /= static_cast<double>(nb - 1);
  return {mean, std::sqrt(var / static_cast<double>(nb)), cfg.samples, cfg.seed};
}

}  // namespace spde
