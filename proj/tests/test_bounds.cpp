#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "spde/bounds.hpp"
#include "spde/chaos.hpp"
#include "spde/variational.hpp"

using namespace spde;

namespace {
constexpr double kPiTest = std::numbers::pi;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::InvalidParams;
}

EquationParams heat(double nu = 2.0, double theta = 1.0) { return EquationParams(2, 1, 0, nu, theta, 1); }

McConfig mc(std::uint64_t samples, std::uint64_t seed = 4242, int n_max = 7) {
  McConfig c;
  c.samples = samples;
  c.seed = seed;
  c.n_max = n_max;
  return c;
}
}  // namespace

TEST(GaussianHNorm, WhiteClosedForm) {
  // (2 pi)^{-1} int c^2 2 pi s^2 exp(-s^2 xi^2) dxi = c^2 s sqrt(pi)
  for (double s : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(gaussian_h_norm_sq(NoiseSpec::white_1d(), {1.7, s}), 1.7 * 1.7 * s * std::sqrt(kPiTest), 1e-12);
  }
}

TEST(GaussianHNorm, RieszMatchesRadialQuadrature) {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (auto [d, alpha] : {std::pair{1, 0.5}, std::pair{2, 1.0}, std::pair{3, 2.2}}) {
    const double s = 0.8, c = 1.3;
    const auto spec = NoiseSpec::riesz(d, alpha);
    const double area = 2.0 * std::pow(kPiTest, 0.5 * d) / std::tgamma(0.5 * d);
    const double cst = riesz_spectral_constant(alpha, d);
    const double radial = integrator.integrate([&](double r) {
      return std::pow(r, alpha - 1.0) * std::exp(-s * s * r * r);
    });
    const double expect = c * c * std::pow(2.0 * kPiTest * s * s, d) * area * cst * radial;
    EXPECT_NEAR(gaussian_h_norm_sq(spec, {c, s}) / expect, 1.0, 1e-9) << d;
  }
}

TEST(GaussianHNorm, RejectsZeroWidth) {
  EXPECT_EQ(kind_of([] { gaussian_h_norm_sq(NoiseSpec::white_1d(), {1.0, 0.0}); }), ErrorKind::InvalidParams);
}

TEST(W1, LaplaceTransformIsResolvent) {
  const auto check = w1_laplace_check(heat(), NoiseSpec::white_1d(), 1.0);
  EXPECT_NEAR(check.transform / check.resolvent, 1.0, 1e-7);
  const EquationParams frac(1.5, 0.7, 0.3, 1.0, 1.0, 1);
  const auto check2 = w1_laplace_check(frac, NoiseSpec::riesz(1, 0.5), 0.7);
  EXPECT_NEAR(check2.transform / check2.resolvent, 1.0, 1e-6);
}

TEST(W1, TimeScaling) {
  EXPECT_LT(w1_time_scaling_residual(heat(), NoiseSpec::white_1d(), 1.0, 0.8, 3.0), 1e-8);
  const EquationParams frac(1.5, 0.7, 0.3, 1.0, 1.0, 1);
  EXPECT_LT(w1_time_scaling_residual(frac, NoiseSpec::riesz(1, 0.5), 0.5, 1.2, 2.5), 1e-8);
}

TEST(W1, MonteCarloMatchesQuadrature) {
  const auto p = heat();
  const auto spec = NoiseSpec::white_1d();
  const double t = 1.3, s = 0.9;
  const double exact = w1_gaussian_quadrature(p, spec, t, s);

  const GaussianWEstimator est(p, spec, mc(40000));
  const double widths[] = {s};
  const auto w = est.estimate(t, widths, 1)[0];
  EXPECT_DOUBLE_EQ(w[0].value, 1.0);
  EXPECT_NEAR(w[1].value, exact, 4.0 * w[1].std_err);

  const auto direct = w_n(p, spec, 1, t, [&](std::span<const double> xi) { return gaussian_spectrum(1, s, xi); },
                          mc(40000));
  EXPECT_NEAR(direct.value, exact, 4.0 * direct.std_err);
}

TEST(LowerBound, ZeroTrialIsOne) {
  const auto lb = lower_bound_pth_moment(heat(), NoiseSpec::white_1d(), 2.0, 1.0, {0.0, 1.0}, 4, mc(100));
  EXPECT_EQ(lb.value, 1.0);
  EXPECT_EQ(lb.std_err, 0.0);
  EXPECT_EQ(lb.h_norm_sq, 0.0);
}

TEST(LowerBound, BelowSecondMomentOnHeatLine) {
  const auto p = heat(2.0, 1.0);
  const auto spec = NoiseSpec::white_1d();
  const double t = 2.0;
  const auto lower = optimize_lower_bound(p, spec, 2.0, t, 5, mc(4000));
  EXPECT_GE(lower.value, 1.0);
  const auto series = ChaosSeries::compute(p, spec, 5, mc(4000));
  const auto sm = series.second_moment(t, p.theta());
  const double upper = std::sqrt(sm.value + sm.tail_bound);
  const double slack = 3.0 * std::hypot(lower.std_err, 0.5 * sm.std_err / upper);
  EXPECT_LE(lower.value, upper + slack);
}

TEST(LowerBound, NeedsGlobalRegime) {
  const EquationParams p(1, 1, 0, 1, 1, 2);
  EXPECT_EQ(kind_of([&] { optimize_lower_bound(p, NoiseSpec::riesz(2, 1.5), 2.0, 1.0, 3, mc(100)); }),
            ErrorKind::OutsideConvergence);
  EXPECT_EQ(kind_of([] { lower_bound_pth_moment(heat(), NoiseSpec::white_1d(), 1.0, 1.0, {1.0, 1.0}, 3, mc(100)); }),
            ErrorKind::InvalidParams);
}

TEST(ScalingExponents, RelationsVanish) {
  const std::vector<std::pair<EquationParams, double>> cases{
      {heat(), 1.0},
      {EquationParams(1.5, 0.7, 0.3, 1, 1, 1), 0.5},
      {EquationParams(2, 0.8, 0.2, 1, 1, 3), 1.4},
      {EquationParams(2, 2, 0, 1, 1, 2, WaveLimit::Formal), 2.0},
  };
  for (const auto& [p, alpha] : cases) {
    const auto e = scaling_exponents(p, alpha);
    EXPECT_NEAR(e.amplitude_relation, 0.0, 1e-12);
    EXPECT_NEAR(e.time_relation, 0.0, 1e-12);
    EXPECT_NEAR(e.beta, beta_and_tp(p, alpha, 2.0, 1.0).beta, 1e-14);
  }
}

TEST(OptimalRate, MatchesGeneralCoefficient) {
  const std::vector<std::tuple<EquationParams, double, double>> cases{
      {heat(2.0, 1.0), 1.0, kM21White},
      {heat(0.5, 3.0), 1.0, kM21White},
      {EquationParams(1.5, 0.7, 0.3, 1.2, 0.8, 1), 0.5, 0.2},
      {EquationParams(2, 2, 0, 1, 1, 2, WaveLimit::Formal), 2.0, 0.0845},
  };
  for (const auto& [p, alpha, m] : cases) {
    const auto r = optimal_rate_constants(p, alpha, m);
    const double kappa = p.time_exponent(alpha);
    EXPECT_NEAR(r.h_value / limit_coefficient(p, alpha, m, AsymptoticMode::General), 1.0, 1e-12);
    EXPECT_NEAR(r.growth_in_c, 0.5 * kappa * r.c_star, 1e-12 * r.c_star);
    const double rho = rho_from_m(p.a(), alpha, m, p.nu());
    const double tr = p.theta() * rho;
    for (double f : {0.9, 0.99, 1.01, 1.1}) EXPECT_LT(growth_in_k(kappa, tr, f * r.k_star), r.h_value);
    for (double f : {0.9, 1.1}) EXPECT_LT(growth_in_c(kappa, p.theta(), rho, r.k_star, f * r.c_star), r.growth_in_c);
  }
}

TEST(ScalingExponents, HeatLineValues) {
  const auto e = scaling_exponents(heat(), 1.0);
  EXPECT_NEAR(e.beta, 3.0, 1e-14);
  EXPECT_NEAR(e.w, 1.0, 1e-14);
  EXPECT_NEAR(e.v, 2.0, 1e-14);
  const EquationParams same_order(1.5, 1.5, 0.0, 1, 1, 1);
  const auto s = scaling_exponents(same_order, 0.5);
  EXPECT_NEAR(s.w, s.beta - 1.0, 1e-14);
}

TEST(OptimalRate, InteriorMaximumAndSmallRho) {
  const auto p = heat(2.0, 1.0);
  const double kappa = p.time_exponent(1.0);
  const auto r = optimal_rate_constants(p, 1.0, kM21White);
  const double tr = p.theta() * rho_from_m(2.0, 1.0, kM21White, p.nu());
  const double h = 1e-5 * r.k_star;
  const double slope = (growth_in_k(kappa, tr, r.k_star + h) - growth_in_k(kappa, tr, r.k_star - h)) / (2.0 * h);
  EXPECT_LT(std::abs(slope), 1e-6 * std::max(1.0, r.h_value / r.k_star));
  double prev = r.h_value;
  for (double m : {1e-2, 1e-4, 1e-8}) {
    const double v = optimal_rate_constants(p, 1.0, m).h_value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-10);
}

TEST(W1, TimeScalingAtDoubleTime) {
  const EquationParams frac(1.8, 0.9, 0.2, 1.3, 1.0, 2);
  EXPECT_LT(w1_time_scaling_residual(frac, NoiseSpec::riesz(2, 0.9), 0.7, 1.0, 2.0), 1e-8);
}

TEST(Wn, NonnegativeForGaussianTrials) {
  const EquationParams frac(1.5, 0.7, 0.3, 1.0, 1.0, 1);
  const GaussianWEstimator est(frac, NoiseSpec::riesz(1, 0.5), mc(4000, 91, 5));
  const double widths[] = {0.2, 1.0, 5.0};
  for (const auto& per_width : est.estimate(1.5, widths, 5)) {
    for (const auto& w : per_width) EXPECT_GE(w.value, -3.0 * w.std_err);
  }
}

TEST(LowerBound, SandwichAtUnitTime) {
  const auto p = heat(2.0, 1.0);
  const auto spec = NoiseSpec::white_1d();
  const auto lower = optimize_lower_bound(p, spec, 2.0, 1.0, 5, mc(4000));
  const auto series = ChaosSeries::compute(p, spec, 5, mc(4000));
  const auto sm = series.second_moment(1.0, p.theta());
  const double upper = std::sqrt(sm.value + sm.tail_bound);
  EXPECT_LE(lower.value, upper + 3.0 * std::hypot(lower.std_err, 0.5 * sm.std_err / upper));
}

TEST(LowerBound, VanishingNoiseKeepsZeroTrial) {
  // theta = 0 is not a valid parameter; a tiny theta leaves only the damping factor
  const auto p = heat(2.0, 1e-12);
  const auto spec = NoiseSpec::white_1d();
  const auto some = lower_bound_pth_moment(p, spec, 2.0, 1.0, {1.0, 1.0}, 3, mc(1000));
  EXPECT_LE(some.value, 1.0);
  const auto best = optimize_lower_bound(p, spec, 2.0, 1.0, 3, mc(1000));
  EXPECT_NEAR(best.value, 1.0, 1e-9);
}
