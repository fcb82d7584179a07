#pragma once

// Fourier transform of the fundamental solution,
//   FG(t, rho) = t^{b+r-1} E_{b,b+r}(-(nu/2) rho^a t^b),
// and the identities that pin it down: the Laplace transform at s = 1 is
// 1/(1 + (nu/2) rho^a), plus the two scaling laws in t and rho.

#include <algorithm>
#include <cmath>

#include "spde/errors.hpp"
#include "spde/mittag_leffler.hpp"
#include "spde/model.hpp"
#include "spde/numerics.hpp"

namespace spde {

struct FourierGreenEval {
  double t;
  double rho;
  double value;
};

inline double fourier_green(const EquationParams& p, double t, double rho) {
  require(t > 0.0, ErrorKind::InvalidParams, "fourier_green needs t > 0");
  require(rho >= 0.0, ErrorKind::InvalidParams, "fourier_green needs rho >= 0");
  const double order = p.b() + p.r();
  const double z = rho == 0.0 ? 0.0 : -p.resolvent_coeff() * std::pow(rho, p.a()) * std::pow(t, p.b());
  return std::pow(t, order - 1.0) * mittag_leffler(p.b(), order, z);
}

inline FourierGreenEval evaluate_fourier_green(const EquationParams& p, double t, double rho) {
  return {t, rho, fourier_green(p, t, rho)};
}

// integral_0^t FG(s, rho) ds = t^{b+r} E_{b,b+r+1}(-(nu/2) rho^a t^b).
inline double integrated_fourier_green(const EquationParams& p, double t, double rho) {
  require(t >= 0.0, ErrorKind::InvalidParams, "time must be >= 0");
  require(rho >= 0.0, ErrorKind::InvalidParams, "rho must be >= 0");
  if (t == 0.0) return 0.0;
  const double order = p.b() + p.r();
  const double z = rho == 0.0 ? 0.0 : -p.resolvent_coeff() * std::pow(rho, p.a()) * std::pow(t, p.b());
  return std::pow(t, order) * mittag_leffler(p.b(), order + 1.0, z);
}

// 1 / (1 + (nu/2) rho^a): Laplace transform of FG at s = 1.
inline double resolvent(const EquationParams& p, double rho) {
  return 1.0 / (1.0 + p.resolvent_coeff() * std::pow(rho, p.a()));
}

struct LaplaceCheck {
  double quadrature;  // integral_0^inf exp(-t) FG(t, rho) dt
  double closed_form;
  double error_estimate;  // quadrature error plus tail bound

  double abs_diff() const { return std::abs(quadrature - closed_form); }
};

// The cut at t = cut is handled by a second quadrature on [cut, inf); its
// error estimate is added to the reported error.
inline LaplaceCheck laplace_check(const EquationParams& p, double rho, double cut = 40.0) {
  auto f = [&](double t) { return t <= 0.0 ? 0.0 : std::exp(-t) * fourier_green(p, t, rho); };
  const auto head = quad::finite(f, 0.0, cut, 1e-10);
  const auto tail = quad::half_line(f, cut, 1e-10);
  return {head.value + tail.value, resolvent(p, rho), head.error + tail.error};
}

// Relative residuals of the scaling laws
//   FG(t, c rho) = c^{-(a/b)(b+r-1)} FG(c^{a/b} t, rho),
//   FG(c t, rho) = c^{b+r-1} FG(t, c^{b/a} rho).
inline double space_scaling_residual(const EquationParams& p, double t, double rho, double c) {
  require(c > 0.0, ErrorKind::InvalidParams, "scale factor must be > 0");
  const double ab = p.a() / p.b();
  const double lhs = fourier_green(p, t, c * rho);
  const double rhs = std::pow(c, -ab * (p.b() + p.r() - 1.0)) * fourier_green(p, std::pow(c, ab) * t, rho);
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

inline double time_scaling_residual(const EquationParams& p, double t, double rho, double c) {
  require(c > 0.0, ErrorKind::InvalidParams, "scale factor must be > 0");
  const double lhs = fourier_green(p, c * t, rho);
  const double rhs =
      std::pow(c, p.b() + p.r() - 1.0) * fourier_green(p, t, std::pow(c, p.b() / p.a()) * rho);
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

}  // namespace spde
