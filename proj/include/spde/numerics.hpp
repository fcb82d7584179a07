#pragma once

// Thin wrappers over Boost.Math special functions and quadrature, plus
// log-space helpers shared by the modules.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace spde {

inline constexpr double kPi = std::numbers::pi;

inline double tgamma(double x) { return boost::math::tgamma(x); }
inline double lgamma(double x) { return boost::math::lgamma(x); }
inline double beta_fn(double x, double y) { return boost::math::beta(x, y); }

// 1/Gamma(x), zero at the poles.
inline double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  return 1.0 / boost::math::tgamma(x);
}

// Surface area of the unit sphere S^{n-1} in R^n; |S^0| = 2.
inline double sphere_area(int n) {
  const double h = 0.5 * n;
  return 2.0 * std::pow(kPi, h) / boost::math::tgamma(h);
}

// log(exp(x) + exp(y)) without overflow.
inline double log_add(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

inline bool close_rel(double x, double y, double rel) {
  return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
}

namespace quad {

struct Result {
  double value;
  double error;
};

// Finite interval; tolerates integrable endpoint singularities.
template <class F>
Result finite(F&& f, double lo, double hi, double tol = 1e-12) {
  static thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  double err = 0.0;
  double l1 = 0.0;
  const double v = rule.integrate(f, lo, hi, tol, &err, &l1);
  return {v, err * std::max(1.0, l1)};
}

// [lo, inf); tolerates an integrable singularity at lo.
template <class F>
Result half_line(F&& f, double lo, double tol = 1e-12) {
  static thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  double err = 0.0;
  double l1 = 0.0;
  const double v =
      rule.integrate(f, lo, std::numeric_limits<double>::infinity(), tol, &err, &l1);
  return {v, err * std::max(1.0, l1)};
}

// Smooth integrand on a finite interval.
template <class F>
Result smooth(F&& f, double lo, double hi, double tol = 1e-12, unsigned depth = 15) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, depth, tol, &err);
  return {v, err};
}

// integral_0^inf f(s) s^{alpha-1} ds for f with algebraic decay: [0,1] directly,
// [1,inf) through s = 1/u.  Points beyond s = 1e30 are dropped.
template <class F>
Result radial(F&& f, double alpha, double tol = 1e-12) {
  auto near = [&](double s) { return s <= 0.0 ? 0.0 : f(s) * std::pow(s, alpha - 1.0); };
  auto far = [&](double u) {
    if (u < 1e-30) return 0.0;
    return f(1.0 / u) * std::pow(u, -alpha - 1.0);
  };
  const Result lo = finite(near, 0.0, 1.0, tol);
  const Result hi = finite(far, 0.0, 1.0, tol);
  return {lo.value + hi.value, lo.error + hi.error};
}

// Fixed composite Gauss-Legendre; deterministic cost, used inside optimizers.
template <class F>
double panels(F&& f, double lo, double hi, int n_panels) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const double w = (hi - lo) / n_panels;
  double s = 0.0;
  for (int i = 0; i < n_panels; ++i) {
    const double x0 = lo + i * w;
    s += rule::integrate(f, x0, x0 + w);
  }
  return s;
}

}  // namespace quad
}  // namespace spde
