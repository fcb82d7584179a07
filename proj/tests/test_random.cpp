#include <cmath>

#include <gtest/gtest.h>

#include "spde/random.hpp"

using namespace spde;

TEST(Random, UniformStaysOpen) {
  Rng rng = substream(1, 2, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Random, StandardNormalMoments) {
  Rng rng = substream(5, 0, 0);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Random, BatchesAreReproducibleAndThreadIndependent) {
  McConfig cfg;
  cfg.samples = 10007;
  cfg.batches = 7;
  auto sample = [](Rng& rng) { return uniform01(rng); };
  const auto a = run_batches(cfg, 42, sample);
  const auto b = run_batches(cfg, 42, sample);
  cfg.threads = 3;
  const auto c = run_batches(cfg, 42, sample);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.value, c.value);
  EXPECT_EQ(a.std_err, c.std_err);
  EXPECT_NE(a.value, run_batches(cfg, 43, sample).value);
  EXPECT_EQ(a.samples, 10007u);
}

TEST(Random, StandardErrorCoversMean) {
  McConfig cfg;
  cfg.samples = 40000;
  cfg.batches = 40;
  // Uniform: mean 1/2, sd of the mean sqrt(1/12 / 40000).
  const auto e = run_batches(cfg, 9, [](Rng& rng) { return uniform01(rng); });
  EXPECT_NEAR(e.value, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 40000.0));
  EXPECT_NEAR(e.std_err / std::sqrt(1.0 / 12.0 / 40000.0), 1.0, 0.4);
}

TEST(Random, RejectsBadConfig) {
  McConfig cfg;
  cfg.batches = 1;
  EXPECT_THROW(run_batches(cfg, 0, [](Rng&) { return 0.0; }), Error);
  cfg.batches = 10;
  cfg.samples = 5;
  EXPECT_THROW(run_batches(cfg, 0, [](Rng&) { return 0.0; }), Error);
}
