#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "spde/classify.hpp"
#include "spde/variational.hpp"

using namespace spde;

namespace {
EquationParams heat(int d, double nu = 1.0, double theta = 1.0) { return EquationParams(2, 1, 0, nu, theta, d); }
NoiseSummary riesz(double alpha, int d) { return {NoiseClass::Riesz, alpha, d}; }
}  // namespace

TEST(Nonnegativity, Groups) {
  EXPECT_EQ(check_nonnegativity(EquationParams(2, 0.5, 0.3, 1, 1, 4)).group, 1);
  EXPECT_EQ(check_nonnegativity(EquationParams(2, 1.0, 0.0, 1, 1, 7)).group, 1);
  EXPECT_EQ(check_nonnegativity(EquationParams(1.8, 1.4, 0.2, 1, 1, 3)).group, 2);
  EXPECT_EQ(check_nonnegativity(EquationParams(1.8, 1.4, 0.0, 1, 1, 3)).group, 0);  // needs r > 0
  EXPECT_EQ(check_nonnegativity(EquationParams(1.8, 1.4, 0.2, 1, 1, 4)).group, 0);  // d <= 3
  // b = a < 2, r > (d+3)/2 - b
  EXPECT_EQ(check_nonnegativity(EquationParams(1.5, 1.5, 1.1, 1, 1, 1)).group, 3);
  EXPECT_EQ(check_nonnegativity(EquationParams(1.5, 1.5, 0.4, 1, 1, 1)).group, 0);
  const auto wave = check_nonnegativity(EquationParams(2, 2, 0, 1, 1, 1, WaveLimit::Formal));
  EXPECT_EQ(wave.group, 0);
  EXPECT_FALSE(wave.note.empty());
}

TEST(Classify, SheDiagramPoints) {
  EXPECT_EQ(classify_solvability(heat(1), riesz(0.5, 1)).regime, Regime::GlobalLp);
  EXPECT_EQ(classify_solvability(heat(1), NoiseSpec::white_1d()).regime, Regime::GlobalBoundaryWhite1D);
  EXPECT_EQ(classify_solvability(heat(2), riesz(1.5, 2)).regime, Regime::GlobalLp);
  EXPECT_EQ(classify_solvability(heat(2), NoiseSummary::white_limit(2)).regime, Regime::LocalLp);
  EXPECT_EQ(classify_solvability(heat(4), riesz(1.9, 4)).regime, Regime::GlobalLp);
  EXPECT_EQ(classify_solvability(heat(3), riesz(2.0, 3)).regime, Regime::LocalLp);
  EXPECT_EQ(classify_solvability(heat(3), riesz(2.5, 3)).regime, Regime::NoL2PerFigures);
  EXPECT_EQ(classify_solvability(heat(5), riesz(3.0, 5)).regime, Regime::NoL2PerFigures);
  EXPECT_TRUE(classify_solvability(heat(5), riesz(3.0, 5)).figure_level);
}

TEST(Classify, StableDiagramPoints) {
  auto stable = [](double a, int d) { return EquationParams(a, 1, 0, 1, 1, d); };
  EXPECT_EQ(classify_solvability(stable(0.5, 1), riesz(0.5, 1)).regime, Regime::LocalLp);
  EXPECT_EQ(classify_solvability(stable(1.0, 1), NoiseSpec::white_1d()).regime, Regime::LocalLp);
  EXPECT_EQ(classify_solvability(stable(1.5, 1), NoiseSpec::white_1d()).regime, Regime::GlobalBoundaryWhite1D);
  EXPECT_EQ(classify_solvability(stable(1.5, 2), riesz(1.8, 2)).regime, Regime::NoL2PerFigures);
}

TEST(Classify, BoundaryOffCriticalIsNotCovered) {
  // alpha = d below the critical value 3.2, d >= 2
  const auto v = classify_solvability(EquationParams(2, 1, 0.3, 1, 1, 2), NoiseSummary::white_limit(2));
  EXPECT_EQ(v.regime, Regime::NotCovered);
  EXPECT_TRUE(v.figure_level);
  // above it with r in [0,1/2] the figure bars apply
  EXPECT_EQ(classify_solvability(EquationParams(2, 0.5, 0, 1, 1, 2), NoiseSummary::white_limit(2)).regime,
            Regime::NoL2PerFigures);
}

TEST(Classify, ExhaustiveAndBlockPermutationInvariant) {
  for (double a : {0.6, 1.0, 1.7, 2.0}) {
    for (double b : {0.4, 1.0, 1.5}) {
      for (double r : {0.0, 0.3, 0.8}) {
        const EquationParams p(a, b, r, 1, 1, 3);
        for (double a1 : {0.2, 0.6, 0.95}) {
          for (double a2 : {0.3, 1.1, 1.9}) {
            const auto s12 = NoiseSpec::riesz({{1, a1}, {2, a2}});
            const auto s21 = NoiseSpec::riesz({{2, a2}, {1, a1}});
            const auto v = classify_solvability(p, s12);
            EXPECT_EQ(v.regime, classify_solvability(p, s21).regime);
            EXPECT_FALSE(v.trace.empty());
          }
        }
      }
    }
  }
}

TEST(CriticalTime, FractionalWhiteCase) {
  for (double p : {2.0, 4.0}) {
    for (double nu : {0.3, 1.0}) {
      for (double theta : {0.5, 3.0}) {
        const EquationParams prm(2, 2.0 / 3.0, 0, nu, theta, 1);
        const double t = critical_time(prm, NoiseSpec::white_1d(), p, kM21White);
        EXPECT_NEAR(t / (std::pow(2.0, 2.5) * std::sqrt(nu) / (3.0 * (p - 1.0) * theta)), 1.0, 1e-13);
      }
    }
  }
}

TEST(CriticalTime, HeatTwoDimensions) {
  // theta = nu = 1, p = 2, alpha = a = d = 2: T_2 = 1 / (2 M).
  EXPECT_NEAR(critical_time(heat(2), NoiseSummary::white_limit(2), 2.0, 0.0845), 1.0 / 0.169, 1e-12);
}

TEST(CriticalTime, MonotoneAndScaling) {
  const auto noise = NoiseSummary::white_limit(2);
  double prev = INFINITY;
  for (double p : {2.0, 2.5, 3.0, 6.0}) {
    const double t = critical_time(heat(2), noise, p, 0.08);
    EXPECT_LT(t, prev);
    prev = t;
  }
  prev = INFINITY;
  for (double theta : {0.1, 0.5, 2.0}) {
    const double t = critical_time(heat(2, 1.0, theta), noise, 2.0, 0.08);
    EXPECT_LT(t, prev);
    prev = t;
  }
  prev = INFINITY;
  for (double m : {0.01, 0.08, 0.3}) {
    const double t = critical_time(heat(2), noise, 2.0, m);
    EXPECT_LT(t, prev);
    prev = t;
  }
  // nu^{alpha/a} with alpha/a = 1 here.
  EXPECT_NEAR(critical_time(heat(2, 3.0), noise, 2.0, 0.08) / critical_time(heat(2, 1.0), noise, 2.0, 0.08), 3.0,
              1e-13);
}

TEST(CriticalTime, RequiresLocalRegime) {
  try {
    critical_time(heat(1), NoiseSpec::white_1d(), 2.0, kM21White);
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotLocalRegime);
  }
}

TEST(Sweep, RowsFollowGrid) {
  std::vector<SweepPoint> grid;
  for (int d = 1; d <= 5; ++d) {
    for (double alpha : {0.5, 1.0, 2.5}) grid.push_back({heat(d), riesz(alpha, d)});
  }
  const auto rows = sweep_phase_diagram(grid);
  ASSERT_EQ(rows.size(), grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].verdict.regime, classify_solvability(grid[i].params, grid[i].noise).regime);
  }
  EXPECT_THROW(sweep_phase_diagram({}), Error);
}
