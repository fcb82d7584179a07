#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "spde/model.hpp"
#include "spde/numerics.hpp"

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
}  // namespace

TEST(EquationParams, RejectsOutOfRange) {
  EXPECT_EQ(kind_of([] { EquationParams(0.0, 1, 0, 1, 1, 1); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EquationParams(2.5, 1, 0, 1, 1, 1); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EquationParams(2, 2.0, 0, 1, 1, 1); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EquationParams(2, 1, -0.1, 1, 1, 1); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EquationParams(2, 1, 0, 0, 1, 1); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EquationParams(2, 1, 0, 1, 0, 1); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EquationParams(2, 1, 0, 1, 1, 0); }), ErrorKind::InvalidParams);
  EXPECT_NO_THROW(EquationParams(2, 2.0, 0, 1, 1, 1, WaveLimit::Formal));
}

TEST(EquationParams, DerivedExponents) {
  const EquationParams p(2, 1, 0, 1, 1, 1);
  EXPECT_DOUBLE_EQ(p.time_exponent(1.0), 1.5);
  EXPECT_DOUBLE_EQ(p.critical_alpha(), 2.0);
  EXPECT_DOUBLE_EQ(p.resolvent_coeff(), 0.5);
  const EquationParams q(1.5, 0.7, 0.3, 2, 1, 1);
  EXPECT_NEAR(q.critical_alpha(), (1.5 / 0.7) * 1.0, 1e-15);
}

TEST(NoiseSpec, ValidatesBlocks) {
  EXPECT_EQ(kind_of([] { NoiseSpec::riesz(1, 1.0); }), ErrorKind::InvalidNoise);
  EXPECT_EQ(kind_of([] { NoiseSpec::riesz(1, 0.0); }), ErrorKind::InvalidNoise);
  EXPECT_EQ(kind_of([] { NoiseSpec::riesz(std::vector<RieszBlock>{}); }), ErrorKind::InvalidNoise);
  const auto s = NoiseSpec::riesz({{1, 0.5}, {2, 1.2}});
  EXPECT_EQ(s.dim(), 3);
  EXPECT_DOUBLE_EQ(s.alpha_total(), 1.7);
  EXPECT_EQ(kind_of([&] { require_compatible(EquationParams(2, 1, 0, 1, 1, 2), s); }), ErrorKind::InvalidNoise);
}

TEST(NoiseSpec, PointwiseEvaluation) {
  const auto s = NoiseSpec::riesz({{1, 0.5}, {2, 1.2}});
  const double x[] = {2.0, 3.0, 4.0};
  EXPECT_NEAR(gamma_eval(s, x), std::pow(2.0, -0.5) * std::pow(5.0, -1.2), 1e-15);
  const double on_axis[] = {0.0, 1.0, 1.0};
  EXPECT_EQ(kind_of([&] { gamma_eval(s, on_axis); }), ErrorKind::BlockAtOrigin);
  const auto w = NoiseSpec::white_1d();
  const double xi[] = {3.7};
  EXPECT_DOUBLE_EQ(phi_eval(w, xi), 1.0 / (2.0 * kPiTest));
  EXPECT_EQ(kind_of([&] { gamma_eval(w, xi); }), ErrorKind::WhiteNoisePointwise);
  EXPECT_EQ(kind_of([&] { k_kernel_eval(w, xi); }), ErrorKind::WhiteNoisePointwise);
}

// Parseval with exp(-|x|^2/2), whose transform is (2 pi)^{d/2} exp(-|xi|^2/2).
// phi carries the (2 pi)^{-d}, so integral |x|^{-alpha} g dx = integral phi F g.
TEST(NoiseSpec, SpectralConstantByParseval) {
  for (int d : {1, 2, 3, 5}) {
    for (double frac : {0.2, 0.5, 0.9}) {
      const double alpha = frac * d;
      const double area = sphere_area(d);
      const double real = area * std::pow(2.0, 0.5 * (d - alpha) - 1.0) * std::tgamma(0.5 * (d - alpha));
      // integral C |xi|^{alpha-d} (2 pi)^{d/2} e^{-|xi|^2/2} dxi
      const double spectral = riesz_spectral_constant(alpha, d) * std::pow(2.0 * kPiTest, 0.5 * d) * area *
                              std::pow(2.0, 0.5 * alpha - 1.0) * std::tgamma(0.5 * alpha);
      EXPECT_NEAR(spectral / real, 1.0, 1e-13) << "d=" << d << " alpha=" << alpha;
    }
  }
}

// K * K = gamma in Fourier space: (F K)^2 = (2 pi)^d phi, with F K radial and
// homogeneous of degree -(d-alpha)/2; checked through the Gaussian pairing
// integral K(x) e^{-|x|^2/2} dx = integral sqrt(phi) e^{-|xi|^2/2} dxi.
TEST(NoiseSpec, SqrtKernelConstantByParseval) {
  for (int d : {1, 2, 3}) {
    for (double frac : {0.2, 0.5, 0.8}) {
      const double alpha = frac * d;
      const double area = sphere_area(d);
      const double s = 0.5 * (d + alpha);  // K = beta |x|^{-s}
      const double real = riesz_sqrt_kernel_constant(alpha, d) * area * std::pow(2.0, 0.5 * (d - s) - 1.0) *
                          std::tgamma(0.5 * (d - s));
      const double e = 0.5 * (d - alpha);  // sqrt(phi) = sqrt(C) |xi|^{-e}
      const double spectral = std::sqrt(riesz_spectral_constant(alpha, d)) * area * std::pow(2.0, 0.5 * (d - e) - 1.0) * std::tgamma(0.5 * (d - e));
      EXPECT_NEAR(spectral / real, 1.0, 1e-13) << "d=" << d << " alpha=" << alpha;
    }
  }
}

TEST(NoiseSpec, AngularFactorMatchesSphericalIntegral) {
  // Single block: angular = C_{alpha,d} * area(d).
  const auto s = NoiseSpec::riesz(3, 1.4);
  EXPECT_NEAR(spectral_angular_factor(s), riesz_spectral_constant(1.4, 3) * sphere_area(3), 1e-14);
  EXPECT_NEAR(spectral_angular_factor(NoiseSpec::white_1d()), 1.0 / kPiTest, 1e-16);
  // Two blocks against a Gaussian test function integrated block by block:
  // integral e^{-|xi|^2} phi = prod_i C_i area_i Gamma(alpha_i/2)/2
  //                         = angular * Gamma(alpha/2)/2.
  const auto two = NoiseSpec::riesz({{1, 0.4}, {2, 0.9}});
  const double prod = riesz_spectral_constant(0.4, 1) * sphere_area(1) * std::tgamma(0.2) / 2.0 *
                      riesz_spectral_constant(0.9, 2) * sphere_area(2) * std::tgamma(0.45) / 2.0;
  EXPECT_NEAR(spectral_angular_factor(two) * std::tgamma(0.65) / 2.0 / prod, 1.0, 1e-14);
}

TEST(NoiseSpec, WeakNormRadiusInvariance) {
  for (const auto& s : {NoiseSpec::riesz(1, 0.5), NoiseSpec::riesz(4, 3.1), NoiseSpec::riesz({{2, 0.5}, {1, 0.7}})}) {
    const double ref = weak_norm_phi(s);
    for (double radius : {0.01, 0.7, 1.0, 13.0}) {
      EXPECT_NEAR(weak_norm_at_radius(s, radius) / ref, 1.0, 1e-12);
    }
  }
}
