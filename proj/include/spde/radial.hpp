#pragma once

// Radial profiles g(|x|) on R^d and the functionals of the variational
// problem:
//   norm_sq   = integral g^2
//   quartic   = <g^2 * g^2, gamma> = integral |F(g^2)|^2 phi  (white: integral g^4)
//   energy    = (2 pi)^{-d} integral |xi|^a |F g|^2            (a = 2: integral |grad g|^2)
// Fourier transforms of radial functions are Hankel transforms
//   F h(s) = (2 pi)^{d/2} s^{1-d/2} integral_0^inf h(r) J_{d/2-1}(s r) r^{d/2} dr.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "spde/errors.hpp"
#include "spde/model.hpp"
#include "spde/numerics.hpp"

namespace spde {

struct RadialProfile {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double extent;               // g is negligible beyond this radius
  std::vector<double> breaks;  // points where g is not smooth, inside (0, extent)
};

struct RadialFunctionals {
  double norm_sq;
  double quartic;
  double energy;
};

namespace detail {

// integral_0^extent f(r) r^{d-1} dr, split at the profile's break points.
template <class F>
double radial_moment(const RadialProfile& g, int d, F&& f) {
  std::vector<double> cuts{0.0};
  for (double b : g.breaks) {
    if (b > 0.0 && b < g.extent) cuts.push_back(b);
  }
  cuts.push_back(g.extent);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += quad::finite([&](double r) { return r <= 0.0 ? 0.0 : f(r) * std::pow(r, d - 1); },
                          cuts[i], cuts[i + 1], 1e-12)
                 .value;
  }
  return sphere_area(d) * total;
}

inline double bessel_kernel(int d, double x) {
  if (d == 1) return std::cos(x);
  if (d == 3) return x == 0.0 ? 1.0 : std::sin(x) / x;
  // J_{d/2-1}(x) / x^{d/2-1}, finite at 0.
  const double order = 0.5 * d - 1.0;
  if (x < 1e-8) return std::pow(0.5, order) / tgamma(order + 1.0);
  return boost::math::cyl_bessel_j(order, x) / std::pow(x, order);
}

// Fourier transform of the radial function h at frequency s, written with a
// kernel that is finite at s r = 0:
//   F h(s) = (2 pi)^{d/2} integral h(r) [J_{d/2-1}(sr)/(sr)^{d/2-1}] r^{d-1} dr,
// with the d = 1 and d = 3 kernels normalized to cos and sin(x)/x.
template <class H>
double hankel(H&& h, int d, double s, double extent) {
  const int panels = 8 + static_cast<int>(std::ceil(s * extent / kPi));
  const double integral = quad::panels(
      [&](double r) { return h(r) * bessel_kernel(d, s * r) * std::pow(r, d - 1); }, 0.0, extent, panels);
  double scale;
  if (d == 1) {
    scale = 2.0;
  } else if (d == 3) {
    scale = 4.0 * kPi;
  } else {
    scale = std::pow(2.0 * kPi, 0.5 * d);
  }
  return scale * integral;
}

// Gauss panels with breaks at S r^{-k}: mass near the origin and algebraic
// endpoint behaviour both get resolved.
template <class F>
double graded_panels(F&& f, double s_max, int panels) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  constexpr double ratio = 1.5;
  double hi = s_max;
  double total = 0.0;
  for (int k = 0; k + 1 < panels; ++k) {
    const double lo = hi / ratio;
    total += rule::integrate(f, lo, hi);
    hi = lo;
  }
  return total + rule::integrate(f, 0.0, hi);
}

// integral_0^S f(s) ds for an algebraically decaying f, plus a power-law
// estimate of the remainder fitted on [S/2, S].
template <class F>
double spectral_with_tail(F&& f, double s_max, int panels) {
  const double body = graded_panels(f, s_max, panels);
  const double f_half = f(0.5 * s_max);
  const double f_end = f(s_max);
  if (f_end > 0.0 && f_half > f_end) {
    const double k = std::log(f_half / f_end) / std::log(2.0);
    if (k > 1.05) return body + f_end * s_max / (k - 1.0);
  }
  return body;
}

}  // namespace detail

inline double profile_norm_sq(const RadialProfile& g, int d) {
  return detail::radial_moment(g, d, [&](double r) { return std::pow(g.value(r), 2); });
}

inline double profile_l4(const RadialProfile& g, int d) {
  return detail::radial_moment(g, d, [&](double r) { return std::pow(g.value(r), 4); });
}

inline double profile_gradient_sq(const RadialProfile& g, int d) {
  return detail::radial_moment(g, d, [&](double r) { return std::pow(g.derivative(r), 2); });
}

struct SpectralGrid {
  double s_max = 60.0;  // in units of 1/extent scale
  int panels = 32;
};

// (2 pi)^{-d} integral |xi|^a |F g|^2 d xi by the Hankel route.
inline double profile_energy_spectral(const RadialProfile& g, int d, double a, const SpectralGrid& grid = {}) {
  auto f = [&](double s) {
    const double ft = detail::hankel(g.value, d, s, g.extent);
    return std::pow(s, a + d - 1) * ft * ft;
  };
  return std::pow(2.0 * kPi, -d) * sphere_area(d) * detail::spectral_with_tail(f, grid.s_max, grid.panels);
}

// integral |F(g^2)|^2 phi for a Riesz product phi, through s = u^{1/alpha}.
inline double profile_quartic_spectral(const RadialProfile& g, const NoiseSpec& spec, const SpectralGrid& grid = {}) {
  require(!spec.is_white(), ErrorKind::InvalidNoise, "white noise uses the L4 route");
  const int d = spec.dim();
  const double alpha = spec.alpha_total();
  auto sq = [&](double r) { return std::pow(g.value(r), 2); };
  auto f = [&](double u) {
    if (u <= 0.0) {
      const double ft0 = detail::hankel(sq, d, 0.0, g.extent);
      return ft0 * ft0 / alpha;
    }
    const double s = std::pow(u, 1.0 / alpha);
    const double ft = detail::hankel(sq, d, s, g.extent);
    return ft * ft / alpha;
  };
  // In u the remainder decays like u^{-(2d+2q)/alpha}; the fitted tail applies.
  const double u_max = std::pow(grid.s_max, alpha);
  return spectral_angular_factor(spec) * detail::spectral_with_tail(f, u_max, grid.panels);
}

// Functionals for the equation order a and the given noise (white when
// spec is null).  a = 2 uses the real-space gradient.
inline RadialFunctionals radial_functionals(const RadialProfile& g, int d, double a, const NoiseSpec* spec,
                                            const SpectralGrid& grid = {}) {
  RadialFunctionals out{};
  out.norm_sq = profile_norm_sq(g, d);
  out.energy = a == 2.0 ? profile_gradient_sq(g, d) : profile_energy_spectral(g, d, a, grid);
  out.quartic = (spec == nullptr || spec->is_white()) ? profile_l4(g, d) : profile_quartic_spectral(g, *spec, grid);
  return out;
}

}  // namespace spde
