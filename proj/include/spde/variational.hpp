#pragma once

// Variational constants of the noise and their closed-form relations.
//
// For unit-L2 g with energy E_a(g,g) (integral |grad g|^2 when a = 2):
//   Sigma   smallest s with <g^2*g^2, gamma> <= s E_a(g,g)^{alpha/a}
//   M       sup <g^2*g^2, gamma>^{1/2} - (theta/2) E_a(g,g)
//   E       sup <g^2*g^2, gamma>       - (theta/2) E_a(g,g)
//   Rho     M at theta = nu raised to (2a-alpha)/a
//   BoldM   E with gamma/2 and 2 theta
// Every constant is stored at a noise multiple Theta and a scale theta; the
// canonical internal quantity is Sigma, linear in Theta.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// pchip.hpp in Boost 1.74 uses isnan unqualified without including it.
#include <boost/math/special_functions/fpclassify.hpp>
namespace boost::math::interpolators { using boost::math::isnan; }
#include <boost/math/interpolators/pchip.hpp>

#include "spde/errors.hpp"
#include "spde/model.hpp"
#include "spde/numerics.hpp"
#include "spde/radial.hpp"
#include "spde/random.hpp"

namespace spde {

enum class VariationalKind { M, E, Sigma, Rho, BoldM };

constexpr std::string_view to_string(VariationalKind k) {
  switch (k) {
    case VariationalKind::M: return "M";
    case VariationalKind::E: return "E";
    case VariationalKind::Sigma: return "Sigma";
    case VariationalKind::Rho: return "Rho";
    case VariationalKind::BoldM: return "BoldM";
  }
  return "?";
}

struct VariationalValue {
  VariationalKind kind;
  double a;
  int d;
  double alpha;
  double noise_scale = 1.0;  // Theta: the constant belongs to Theta * gamma
  double theta_scale = 1.0;  // theta (nu for Rho)
  double value;
};

namespace detail {

inline void require_m_domain(double a, double alpha) {
  require(alpha > 0.0 && alpha < 2.0 * a, ErrorKind::ExponentDomain, "M and Rho need 0 < alpha < 2a");
}
inline void require_e_domain(double a, double alpha) {
  require(alpha > 0.0 && alpha < a, ErrorKind::ExponentDomain, "E relations need 0 < alpha < a");
}

// E and M as functions of sigma = Sigma(Theta gamma) and theta.
inline double e_from_sigma(double a, double alpha, double sigma, double theta) {
  const double k = a - alpha;
  return std::pow(theta, -alpha / k) * std::pow(2.0 * alpha / a, alpha / k) * (k / a) * std::pow(sigma, a / k);
}
inline double sigma_from_e(double a, double alpha, double e, double theta) {
  const double k = a - alpha;
  const double base = e / (std::pow(theta, -alpha / k) * std::pow(2.0 * alpha / a, alpha / k) * (k / a));
  return std::pow(base, k / a);
}
inline double m_from_sigma(double a, double alpha, double sigma, double theta) {
  const double k = 2.0 * a - alpha;
  return std::pow(theta, -alpha / k) * std::pow(alpha / a, alpha / k) * (k / (2.0 * a)) * std::pow(sigma, a / k);
}
inline double sigma_from_m(double a, double alpha, double m, double theta) {
  const double k = 2.0 * a - alpha;
  const double base = m / (std::pow(theta, -alpha / k) * std::pow(alpha / a, alpha / k) * (k / (2.0 * a)));
  return std::pow(base, k / a);
}

// sigma of the noise multiple Theta, from a stored value.
inline double sigma_of(const VariationalValue& v) {
  const double a = v.a, al = v.alpha, th = v.theta_scale;
  switch (v.kind) {
    case VariationalKind::Sigma:
      return v.value;
    case VariationalKind::M:
      require_m_domain(a, al);
      return sigma_from_m(a, al, v.value, th);
    case VariationalKind::Rho:
      require_m_domain(a, al);
      return sigma_from_m(a, al, std::pow(v.value, a / (2.0 * a - al)), th);
    case VariationalKind::E:
      require_e_domain(a, al);
      return sigma_from_e(a, al, v.value, th);
    case VariationalKind::BoldM:
      require_e_domain(a, al);
      return 2.0 * sigma_from_e(a, al, v.value, 2.0 * th);
  }
  return 0.0;
}

inline double value_from_sigma(VariationalKind kind, double a, double al, double sigma, double th) {
  switch (kind) {
    case VariationalKind::Sigma:
      return sigma;
    case VariationalKind::M:
      require_m_domain(a, al);
      return m_from_sigma(a, al, sigma, th);
    case VariationalKind::Rho:
      require_m_domain(a, al);
      return std::pow(m_from_sigma(a, al, sigma, th), (2.0 * a - al) / a);
    case VariationalKind::E:
      require_e_domain(a, al);
      return e_from_sigma(a, al, sigma, th);
    case VariationalKind::BoldM:
      require_e_domain(a, al);
      return e_from_sigma(a, al, 0.5 * sigma, 2.0 * th);
  }
  return 0.0;
}

}  // namespace detail

inline VariationalValue variational_convert(const VariationalValue& from, VariationalKind to) {
  require(from.value > 0.0, ErrorKind::InvalidParams, "variational value must be > 0");
  require(from.noise_scale > 0.0 && from.theta_scale > 0.0, ErrorKind::InvalidParams,
          "scales must be > 0");
  const double sigma = detail::sigma_of(from);
  VariationalValue out = from;
  out.kind = to;
  out.value = detail::value_from_sigma(to, from.a, from.alpha, sigma, from.theta_scale);
  return out;
}

// Same constant for another noise multiple and scale.
inline VariationalValue variational_rescale(const VariationalValue& from, double noise_scale, double theta_scale) {
  require(noise_scale > 0.0 && theta_scale > 0.0, ErrorKind::InvalidParams, "scales must be > 0");
  const double sigma = detail::sigma_of(from) * noise_scale / from.noise_scale;
  VariationalValue out = from;
  out.noise_scale = noise_scale;
  out.theta_scale = theta_scale;
  out.value = detail::value_from_sigma(from.kind, from.a, from.alpha, sigma, theta_scale);
  return out;
}

// Rho from M given at theta = 1: nu^{-alpha/a} M^{(2a-alpha)/a}.
inline double rho_from_m(double a, double alpha, double m_const, double nu) {
  const VariationalValue m{VariationalKind::M, a, 0, alpha, 1.0, 1.0, m_const};
  return variational_convert(variational_rescale(m, 1.0, nu), VariationalKind::Rho).value;
}

// ---------------------------------------------------------------- table

inline const double kM21White = 0.75 * std::cbrt(1.0 / 6.0);

struct KnownConstant {
  enum class Status { Value, OptimizerRequired, Absent };
  Status status;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct KnownConstantRow {
  double a;
  int d;
  bool white;
  KnownConstant entry;
};

inline std::vector<KnownConstantRow> known_constants() {
  return {
      {2.0, 1, true, {KnownConstant::Status::Value, kM21White, "M_{2,1}(delta_0) = (3/4)(1/6)^{1/3}"}},
      {2.0, 2, true,
       {KnownConstant::Status::OptimizerRequired, std::numeric_limits<double>::quiet_NaN(),
        "reduces to the Gagliardo-Nirenberg best constant; no closed value"}},
  };
}

inline KnownConstant lookup_known_constant(double a, int d, bool white) {
  for (const auto& row : known_constants()) {
    if (row.a == a && row.d == d && row.white == white) return row.entry;
  }
  return {KnownConstant::Status::Absent, std::numeric_limits<double>::quiet_NaN(), "not tabulated"};
}

// ------------------------------------------------------------ optimizer

enum class TrialFamilyKind { GeneralizedGaussian, RadialSpline };

// GeneralizedGaussian: parameters {q} or {q, lambda} for g = exp(-(lambda r)^q).
// RadialSpline: parameters {q, c_1, ..., c_K} for
//   log g = -r^q + s(r),  s the monotone cubic through (r_k, c_k), r_0 = 0,
//   c_0 = 0, constant past the last knot.
// A fixed family has exactly one member and no dilation freedom.
struct TrialFamily {
  TrialFamilyKind kind = TrialFamilyKind::GeneralizedGaussian;
  std::vector<double> parameters{};
  bool fixed = false;
  double knot_spacing = 0.5;
};

struct OptimizerConfig {
  double q_min = 0.6;
  double q_max = 4.0;
  int grid_points = 12;
  double tol = 1e-6;
  int sweeps = 6;
  int max_evals = 4000;
  int restarts = 1;
  std::uint64_t seed = kDefaultSeed;
  SpectralGrid grid{};
};

struct MDirectResult {
  VariationalValue value;  // certified lower bound on M (theta = 1)
  std::vector<double> best_parameters;
  int evaluations = 0;
  bool stalled = false;
  std::vector<double> trace;  // best value after each stage
};

namespace detail {

inline RadialProfile generalized_gaussian(double q, double lambda = 1.0) {
  RadialProfile g;
  g.value = [=](double r) { return std::exp(-std::pow(lambda * r, q)); };
  g.derivative = [=](double r) {
    if (r <= 0.0) return q > 1.0 ? 0.0 : (q == 1.0 ? -lambda : -std::numeric_limits<double>::infinity());
    const double x = std::pow(lambda * r, q);
    return -q * x / r * std::exp(-x);
  };
  g.extent = std::pow(45.0, 1.0 / q) / lambda;
  return g;
}

struct SplineProfile {
  std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> spline;
  double last_knot;
};

inline RadialProfile spline_profile(double q, std::span<const double> coeffs, double spacing) {
  std::vector<double> xs{0.0}, ys{0.0};
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    xs.push_back(spacing * static_cast<double>(k + 1));
    ys.push_back(coeffs[k]);
  }
  const double last = xs.back();
  const double tail = ys.back();
  RadialProfile g;
  g.extent = std::pow(45.0 + std::max(0.0, tail), 1.0 / q);
  g.breaks = std::vector<double>(xs.begin() + 1, xs.end());
  if (xs.size() < 3) {
    // pchip needs 4 points; with fewer knots the correction is piecewise linear.
    auto corr = [xs, ys](double r) {
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        if (r <= xs[k + 1]) return ys[k] + (ys[k + 1] - ys[k]) * (r - xs[k]) / (xs[k + 1] - xs[k]);
      }
      return ys.back();
    };
    auto slope = [xs, ys](double r) {
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        if (r <= xs[k + 1]) return (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
      }
      return 0.0;
    };
    g.value = [=](double r) { return std::exp(-std::pow(r, q) + corr(r)); };
    g.derivative = [=](double r) {
      const double base = r <= 0.0 ? 0.0 : -q * std::pow(r, q - 1.0);
      return (base + slope(r)) * std::exp(-std::pow(r, q) + corr(r));
    };
    return g;
  }
  auto sp = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs), std::move(ys));
  g.value = [=](double r) {
    const double s = r >= last ? tail : (*sp)(r);
    return std::exp(-std::pow(r, q) + s);
  };
  g.derivative = [=](double r) {
    const double s = r >= last ? tail : (*sp)(r);
    const double ds = r >= last ? 0.0 : sp->prime(r);
    const double base = r <= 0.0 ? 0.0 : -q * std::pow(r, q - 1.0);
    return (base + ds) * std::exp(-std::pow(r, q) + s);
  };
  return g;
}

// Closed forms for exp(-r^q) in R^d.
inline RadialFunctionals generalized_gaussian_real_space(double q, int d) {
  const double area = sphere_area(d);
  const double dq = d / q;
  RadialFunctionals f{};
  f.norm_sq = area * tgamma(dq) / (q * std::pow(2.0, dq));
  f.quartic = area * tgamma(dq) / (q * std::pow(4.0, dq));
  const double m = (2.0 * q + d - 2.0) / q;
  f.energy = area * q * tgamma(m) / std::pow(2.0, m);
  return f;
}

// Best value over dilations of <g^2*g^2,gamma>^{1/2} - E_a/2 for unit g, with
// A = quartic / norm^2 and B = energy / norm:
//   (1 - alpha/(2a)) (alpha/a)^{alpha/(2a-alpha)} A^{a/(2a-alpha)} B^{-alpha/(2a-alpha)}.
inline double dilation_optimum(const RadialFunctionals& f, double a, double alpha) {
  const double big_a = f.quartic / (f.norm_sq * f.norm_sq);
  const double big_b = f.energy / f.norm_sq;
  const double k = 2.0 * a - alpha;
  return (1.0 - alpha / (2.0 * a)) * std::pow(alpha / a, alpha / k) * std::pow(big_a, a / k) *
         std::pow(big_b, -alpha / k);
}

// Value at a fixed member (no dilation).
inline double functional_at(const RadialFunctionals& f) {
  return std::sqrt(f.quartic) / f.norm_sq - 0.5 * f.energy / f.norm_sq;
}

struct Problem {
  double a;
  int d;
  double alpha;
  std::optional<NoiseSpec> spec;  // empty for white noise
  SpectralGrid grid;

  RadialFunctionals functionals(const RadialProfile& g) const {
    return radial_functionals(g, d, a, spec ? &*spec : nullptr, grid);
  }
};

inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol, int& evals,
                         int max_evals) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  evals += 2;
  while (hi - lo > tol * (1.0 + std::abs(lo)) && evals < max_evals) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
    ++evals;
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace detail

// Lower bound on M_{a,d}(gamma) at theta = 1 by maximizing over a trial family.
// spec empty means white noise (d = 1 or 2; alpha = d).
inline MDirectResult estimate_M_direct(double a, int d, const std::optional<NoiseSpec>& spec,
                                       const TrialFamily& trial, const OptimizerConfig& opt = {}) {
  require(a > 0.0 && a <= 2.0, ErrorKind::InvalidParams, "a must lie in (0,2]");
  require(d >= 1, ErrorKind::InvalidParams, "d must be >= 1");
  double alpha;
  if (spec) {
    require(spec->dim() == d, ErrorKind::InvalidNoise, "noise dimension differs from d");
    alpha = spec->alpha_total();
    require(alpha < std::min(2.0 * a, static_cast<double>(d)), ErrorKind::ExponentDomain,
            "direct optimizer needs alpha < min(2a, d)");
  } else {
    require(d == 1 || d == 2, ErrorKind::InvalidNoise, "white noise optimizer supports d = 1, 2");
    alpha = d;
    require(alpha < 2.0 * a, ErrorKind::ExponentDomain, "white noise needs d < 2a");
  }
  const detail::Problem prob{a, d, alpha, spec, opt.grid};
  const bool closed_form = a == 2.0 && !spec;

  MDirectResult res{VariationalValue{VariationalKind::M, a, d, alpha, 1.0, 1.0, 0.0}, {}, 0, false, {}};
  int& evals = res.evaluations;

  auto gg_value = [&](double q) {
    ++evals;
    const auto f = closed_form ? detail::generalized_gaussian_real_space(q, d)
                               : prob.functionals(detail::generalized_gaussian(q));
    return detail::dilation_optimum(f, a, alpha);
  };

  if (trial.fixed) {
    require(!trial.parameters.empty(), ErrorKind::InvalidParams, "fixed trial member needs parameters");
    RadialProfile g;
    if (trial.kind == TrialFamilyKind::GeneralizedGaussian) {
      const double q = trial.parameters[0];
      const double lambda = trial.parameters.size() > 1 ? trial.parameters[1] : 1.0;
      g = detail::generalized_gaussian(q, lambda);
    } else {
      g = detail::spline_profile(trial.parameters[0], std::span(trial.parameters).subspan(1), trial.knot_spacing);
    }
    ++evals;
    res.value.value = detail::functional_at(prob.functionals(g));
    res.best_parameters = trial.parameters;
    res.trace.push_back(res.value.value);
    return res;
  }

  // Stage 1: shape of the generalized Gaussian, grid then golden section.
  double best_q = trial.parameters.empty() ? 2.0 : trial.parameters[0];
  double best = gg_value(best_q);
  int best_i = -1;
  std::vector<double> qs(opt.grid_points);
  for (int i = 0; i < opt.grid_points; ++i) {
    qs[i] = opt.q_min * std::pow(opt.q_max / opt.q_min, static_cast<double>(i) / (opt.grid_points - 1));
    const double v = gg_value(qs[i]);
    if (v > best) {
      best = v;
      best_q = qs[i];
      best_i = i;
    }
  }
  if (best_i >= 0) {
    const double lo = qs[std::max(0, best_i - 1)];
    const double hi = qs[std::min(opt.grid_points - 1, best_i + 1)];
    const double q = detail::golden_max(gg_value, lo, hi, opt.tol, evals, opt.max_evals);
    const double v = gg_value(q);
    if (v > best) {
      best = v;
      best_q = q;
    }
  }
  res.trace.push_back(best);
  res.best_parameters = {best_q};

  // Stage 2: spline correction of the log-profile by coordinate ascent.
  if (trial.kind == TrialFamilyKind::RadialSpline) {
    const std::size_t knots = trial.parameters.size() > 1 ? trial.parameters.size() - 1 : 4;
    std::vector<double> coeffs(knots, 0.0);
    auto value_of = [&](std::span<const double> c) {
      ++evals;
      const auto g = detail::spline_profile(best_q, c, trial.knot_spacing);
      return detail::dilation_optimum(prob.functionals(g), a, alpha);
    };
    std::vector<double> best_c = coeffs;
    double best_val = value_of(best_c);  // equals the stage-1 optimum up to quadrature
    if (best_val < best) best_val = best;
    for (int restart = 0; restart < opt.restarts; ++restart) {
      Rng rng = substream(opt.seed, 4000, restart);
      std::vector<double> c = best_c;
      if (restart > 0) {
        for (auto& x : c) x += 0.05 * (uniform01(rng) - 0.5);
      }
      double cur = value_of(c);
      double step = 0.2;
      for (int sweep = 0; sweep < opt.sweeps && evals < opt.max_evals; ++sweep) {
        for (std::size_t k = 0; k < c.size() && evals < opt.max_evals; ++k) {
          for (double dir : {1.0, -1.0}) {
            std::vector<double> trial_c = c;
            trial_c[k] += dir * step;
            const double v = value_of(trial_c);
            if (v > cur) {
              cur = v;
              c = trial_c;
              break;
            }
          }
        }
        step *= 0.5;
      }
      if (cur > best_val) {
        best_val = cur;
        best_c = c;
      }
    }
    if (best_val > best) {
      best = best_val;
      res.best_parameters = {best_q};
      res.best_parameters.insert(res.best_parameters.end(), best_c.begin(), best_c.end());
    }
    res.trace.push_back(best);
  }
  res.stalled = evals >= opt.max_evals;
  res.value.value = best;
  return res;
}

// ------------------------------------------------------------ rho from T_n

struct RhoEstimate {
  std::vector<int> n;
  std::vector<double> a_n;      // (1/n) log(T_n / (n!)^2)
  std::vector<double> a_n_err;  // delta-method standard errors
  std::vector<double> richardson;  // n a_n - (n-1) a_{n-1}
  double limit;                 // last Richardson value: estimate of log rho
};

struct TnEntry {
  int n;
  double value;
  double std_err;
};

inline RhoEstimate rho_from_tn(std::span<const TnEntry> tn) {
  require(tn.size() >= 3, ErrorKind::InsufficientTerms, "need T_n for at least 3 consecutive n");
  RhoEstimate out{};
  for (std::size_t i = 0; i < tn.size(); ++i) {
    const auto& e = tn[i];
    require(e.n >= 1, ErrorKind::InvalidParams, "n must be >= 1");
    if (i > 0) require(e.n == tn[i - 1].n + 1, ErrorKind::InsufficientTerms, "n values must be consecutive");
    require(e.value > 0.0, ErrorKind::InvalidParams, "T_n must be > 0");
    out.n.push_back(e.n);
    out.a_n.push_back((std::log(e.value) - 2.0 * lgamma(e.n + 1.0)) / e.n);
    out.a_n_err.push_back(e.std_err / e.value / e.n);
    if (i > 0) out.richardson.push_back(e.n * out.a_n[i] - (e.n - 1) * out.a_n[i - 1]);
  }
  out.limit = out.richardson.back();
  return out;
}

}  // namespace spde
