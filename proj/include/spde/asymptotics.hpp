#pragma once

// Exact moment-growth coefficients and their special cases.
//
// With kappa = 2(b+r) - b alpha / a > 1 and beta = kappa / (kappa - 1):
//   general  = (1/2) (2/kappa)^beta (theta rho)^{1/(kappa-1)} (kappa - 1),
//   rho      = nu^{-alpha/a} M^{(2a-alpha)/a},
//   fixed p  = general * p (p-1)^{1/(kappa-1)}   (limit of t^{-beta} log E|u|^p)
//   fixed t  = general * t^beta                  (limit of p^{-beta} log E|u|^p)

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spde/chaos.hpp"
#include "spde/errors.hpp"
#include "spde/model.hpp"
#include "spde/numerics.hpp"
#include "spde/variational.hpp"

namespace spde {

enum class AsymptoticMode { General, FixedP, FixedT };

constexpr std::string_view to_string(AsymptoticMode m) {
  switch (m) {
    case AsymptoticMode::General: return "General";
    case AsymptoticMode::FixedP: return "FixedP";
    case AsymptoticMode::FixedT: return "FixedT";
  }
  return "?";
}

struct BetaTp {
  double beta;
  double t_p;
};

namespace detail {
inline double supercritical_gap(const EquationParams& p, double alpha) {
  const double kappa = p.time_exponent(alpha);
  if (!(kappa - 1.0 > 0.0)) {
    throw Error(ErrorKind::CriticalOrSupercritical,
                "growth exponents need 2(b+r) - b alpha/a > 1, got " + std::to_string(kappa));
  }
  return kappa - 1.0;
}
}  // namespace detail

inline BetaTp beta_and_tp(const EquationParams& prm, double alpha, double p, double t) {
  const double gap = detail::supercritical_gap(prm, alpha);
  require(p > 1.0, ErrorKind::InvalidParams, "p must be > 1");
  const double beta = (gap + 1.0) / gap;
  return {beta, std::pow(p - 1.0, 1.0 - 1.0 / beta) * t};
}

// log of the coefficient; stays finite where the coefficient itself would overflow.
inline double log_limit_coefficient(const EquationParams& prm, double alpha, double m_const,
                                    AsymptoticMode mode, double p_or_t = 2.0) {
  const double gap = detail::supercritical_gap(prm, alpha);
  require(m_const > 0.0, ErrorKind::InvalidParams, "variational constant must be > 0");
  const double kappa = gap + 1.0;
  const double beta = kappa / gap;
  const double a = prm.a();
  const double log_rho = -(alpha / a) * std::log(prm.nu()) + ((2.0 * a - alpha) / a) * std::log(m_const);
  double out = -std::log(2.0) + beta * std::log(2.0 / kappa) + (std::log(prm.theta()) + log_rho) / gap +
               std::log(gap);
  switch (mode) {
    case AsymptoticMode::General:
      break;
    case AsymptoticMode::FixedP:
      require(p_or_t > 1.0, ErrorKind::InvalidParams, "p must be > 1");
      out += std::log(p_or_t) + std::log(p_or_t - 1.0) / gap;
      break;
    case AsymptoticMode::FixedT:
      require(p_or_t > 0.0, ErrorKind::InvalidParams, "t must be > 0");
      out += beta * std::log(p_or_t);
      break;
  }
  return out;
}

inline double limit_coefficient(const EquationParams& prm, double alpha, double m_const, AsymptoticMode mode,
                                double p_or_t = 2.0) {
  return std::exp(log_limit_coefficient(prm, alpha, m_const, mode, p_or_t));
}

// ------------------------------------------------------------ special cases

enum class AsymptoticOracle { SWE1d, SWE2d, SHE1d, Stable, FracCeil, FracR0 };

constexpr std::string_view to_string(AsymptoticOracle o) {
  switch (o) {
    case AsymptoticOracle::SWE1d: return "SWE1d";
    case AsymptoticOracle::SWE2d: return "SWE2d";
    case AsymptoticOracle::SHE1d: return "SHE1d";
    case AsymptoticOracle::Stable: return "Stable";
    case AsymptoticOracle::FracCeil: return "FracCeil";
    case AsymptoticOracle::FracR0: return "FracR0";
  }
  return "?";
}

inline constexpr AsymptoticOracle kAllOracles[] = {AsymptoticOracle::SWE1d,  AsymptoticOracle::SWE2d,
                                                   AsymptoticOracle::SHE1d,  AsymptoticOracle::Stable,
                                                   AsymptoticOracle::FracCeil, AsymptoticOracle::FracR0};

namespace detail {

inline bool same(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); }

inline bool oracle_applies(AsymptoticOracle which, const EquationParams& p, double alpha) {
  const double a = p.a(), b = p.b(), r = p.r();
  switch (which) {
    case AsymptoticOracle::SWE1d:
      return same(a, 2) && same(b, 2) && same(r, 0) && same(alpha, 1) && p.d() == 1;
    case AsymptoticOracle::SWE2d:
      return same(a, 2) && same(b, 2) && same(r, 0) && same(alpha, 2) && p.d() == 2;
    case AsymptoticOracle::SHE1d:
      return same(a, 2) && same(b, 1) && same(r, 0) && same(alpha, 1) && p.d() == 1;
    case AsymptoticOracle::Stable:
      return same(b, 1) && same(r, 0) && alpha > 0.0 && alpha < a;
    case AsymptoticOracle::FracCeil:
      return same(a, 2) && same(r, std::ceil(b) - b) && same(alpha, 1) && p.d() == 1 && b < 2.0;
    case AsymptoticOracle::FracR0:
      return same(a, 2) && same(r, 0) && same(alpha, 1) && p.d() == 1 && b > 2.0 / 3.0 && b < 2.0;
  }
  return false;
}

// Each case in its own published shape, as the limit for fixed t at t = 1
// (the general coefficient) scaled by mode.  Cases that fix the noise to
// white in d = 1 ignore m_const and use M_{2,1}(delta_0).
inline double oracle_general(AsymptoticOracle which, const EquationParams& p, double alpha, double m_const) {
  const double th = p.theta(), nu = p.nu(), a = p.a(), b = p.b();
  switch (which) {
    case AsymptoticOracle::SWE1d:
      return std::sqrt(th) / (3.0 * std::pow(2.0 * nu, 0.25));
    case AsymptoticOracle::SWE2d:
      return th * m_const / (2.0 * nu);
    case AsymptoticOracle::SHE1d:
      return th * th / (24.0 * nu);
    case AsymptoticOracle::Stable: {
      const double ex = (2.0 * a - alpha) / (a - alpha);
      return 0.5 * std::pow(2.0 * a / (2.0 * a - alpha), ex) *
             std::pow(th * std::pow(nu, -alpha / a) * std::pow(m_const, (2.0 * a - alpha) / a), a / (a - alpha)) *
             ((a - alpha) / a);
    }
    case AsymptoticOracle::FracCeil: {
      const double k = 4.0 * std::ceil(b) - b;
      return std::pow(9.0 * th * th / (8.0 * nu), 1.0 / (k - 2.0)) * (k - 2.0) * std::pow(k, -k / (k - 2.0));
    }
    case AsymptoticOracle::FracR0:
      return (b - 2.0 / 3.0) * std::pow(b, -3.0 * b / (3.0 * b - 2.0)) *
             std::pow(th * th / (8.0 * nu), 1.0 / (3.0 * b - 2.0));
  }
  return 0.0;
}

// Power of (p-1) in the fixed-p limit of each case.
inline double oracle_p_exponent(AsymptoticOracle which, const EquationParams& p, double alpha) {
  const double a = p.a(), b = p.b();
  switch (which) {
    case AsymptoticOracle::SWE1d: return 0.5;
    case AsymptoticOracle::SWE2d: return 1.0;
    case AsymptoticOracle::SHE1d: return 2.0;
    case AsymptoticOracle::Stable: return a / (a - alpha);
    case AsymptoticOracle::FracCeil: return 2.0 / (4.0 * std::ceil(b) - b - 2.0);
    case AsymptoticOracle::FracR0: return 2.0 / (3.0 * b - 2.0);
  }
  return 0.0;
}

inline double oracle_beta(AsymptoticOracle which, const EquationParams& p, double alpha) {
  const double a = p.a(), b = p.b();
  switch (which) {
    case AsymptoticOracle::SWE1d: return 1.5;
    case AsymptoticOracle::SWE2d: return 2.0;
    case AsymptoticOracle::SHE1d: return 3.0;
    case AsymptoticOracle::Stable: return (2.0 * a - alpha) / (a - alpha);
    case AsymptoticOracle::FracCeil: {
      const double k = 4.0 * std::ceil(b) - b;
      return k / (k - 2.0);
    }
    case AsymptoticOracle::FracR0: return 3.0 * b / (3.0 * b - 2.0);
  }
  return 0.0;
}

}  // namespace detail

inline bool oracle_applies(AsymptoticOracle which, const EquationParams& prm, double alpha) {
  return detail::oracle_applies(which, prm, alpha);
}

inline double oracle_limit(AsymptoticOracle which, const EquationParams& prm, double alpha, double m_const,
                           AsymptoticMode mode, double p_or_t = 2.0) {
  if (!detail::oracle_applies(which, prm, alpha)) {
    throw Error(ErrorKind::OracleDomain, std::string(to_string(which)) + " does not apply to these parameters");
  }
  const bool uses_m = which == AsymptoticOracle::SWE2d || which == AsymptoticOracle::Stable;
  require(!uses_m || m_const > 0.0, ErrorKind::InvalidParams, "variational constant must be > 0");
  const double g = detail::oracle_general(which, prm, alpha, m_const);
  switch (mode) {
    case AsymptoticMode::General:
      return g;
    case AsymptoticMode::FixedP:
      require(p_or_t > 1.0, ErrorKind::InvalidParams, "p must be > 1");
      return p_or_t * std::pow(p_or_t - 1.0, detail::oracle_p_exponent(which, prm, alpha)) * g;
    case AsymptoticMode::FixedT:
      require(p_or_t > 0.0, ErrorKind::InvalidParams, "t must be > 0");
      return std::pow(p_or_t, detail::oracle_beta(which, prm, alpha)) * g;
  }
  return g;
}

struct AsymptoticsReport {
  double beta;
  double t_p_factor;  // (p-1)^{1-1/beta}
  double coefficient;
  AsymptoticMode mode;
  std::map<std::string, double> oracle_residuals;  // relative differences
};

inline AsymptoticsReport asymptotics_report(const EquationParams& prm, double alpha, double m_const,
                                            AsymptoticMode mode, double p, double t) {
  const auto bt = beta_and_tp(prm, alpha, p, 1.0);
  const double arg = mode == AsymptoticMode::FixedT ? t : p;
  AsymptoticsReport rep{bt.beta, bt.t_p, limit_coefficient(prm, alpha, m_const, mode, arg), mode, {}};
  for (auto which : kAllOracles) {
    if (!oracle_applies(which, prm, alpha)) continue;
    const double o = oracle_limit(which, prm, alpha, m_const, mode, arg);
    rep.oracle_residuals[std::string(to_string(which))] = std::abs(o - rep.coefficient) / std::abs(o);
  }
  return rep;
}

// --------------------------------------------------------- growth limits

// t^{-1/g} log sum_n (n!)^{-g} t^n.  Direct summation in log space when the
// largest term sits below n = 2e6; otherwise the sum is replaced by the
// integral over n of the same log-concave summand, whose peak is then
// millions of terms wide.
//
// n log t and g log n! are both huge near the peak and cancel; the peak term
// is therefore taken from Stirling's series written relative to the peak,
// and the others from term ratios.  Accumulation is in long double so that
// the final rounding to double dominates the error.
inline double series_growth_limit(double g, double t) {
  require(g > 0.0, ErrorKind::InvalidParams, "exponent must be > 0");
  require(t > 0.0, ErrorKind::InvalidParams, "t must be > 0");
  using real = long double;
  const real gl = g;
  const real log_t = std::log(static_cast<real>(t));
  const real peak = std::pow(static_cast<real>(t), 1.0L / gl);  // where g psi(n+1) ~ log t
  const real shift = log_t / gl - std::log(peak);                // rounding only; 0 when g = 1
  auto log_term = [&](real n) {
    if (n < 20.0L) return n * log_t - gl * std::lgamma(n + 1.0L);
    const real inv = 1.0L / n;
    const real inv2 = inv * inv;
    const real corr = inv * (1.0L / 12 - inv2 * (1.0L / 360 - inv2 * (1.0L / 1260 - inv2 / 1680)));
    const real rel = -std::log1p((n - peak) / peak) + shift;  // log t / g - log n
    return gl * (n * rel + n - 0.5L * std::log(2.0L * std::numbers::pi_v<real> * n) - corr);
  };
  if (peak < 2e6L) {
    const real n_peak = std::floor(peak);
    const real top = log_term(n_peak);
    // log ratio of term n+1 to term n: log t - g log(n+1)
    auto step = [&](real n) { return -gl * std::log1p((n + 1.0L - peak) / peak) + gl * shift; };
    real s = 1.0L, r = 0.0L;
    for (real n = n_peak; n > 0.0L;) {
      r -= step(n - 1.0L);
      n -= 1.0L;
      const real e = std::exp(r);
      s += e;
      if (e < 1e-20L * s) break;
    }
    r = 0.0L;
    for (real n = n_peak;; n += 1.0L) {
      r += step(n);
      const real e = std::exp(r);
      s += e;
      if (e < 1e-20L * s) break;
    }
    return static_cast<double>((top + std::log(s)) / peak);
  }
  const double width = std::sqrt(static_cast<double>(peak) / g);
  const real top = log_term(peak);
  const double lo = std::max(0.0, static_cast<double>(peak) - 60.0 * width);
  const double hi = static_cast<double>(peak) + 60.0 * width;
  const double s = quad::smooth([&](double n) { return static_cast<double>(std::exp(log_term(n) - top)); }, lo,
                                hi, 1e-14)
                       .value;
  return static_cast<double>((top + std::log(static_cast<real>(s))) / peak);
}

// (1/n) log(Gamma(a n + 1) / (n!)^a); tends to a log a.
inline double stirling_companion(double a, int n) {
  require(a > 0.0 && n >= 1, ErrorKind::InvalidParams, "need a > 0 and n >= 1");
  return (lgamma(a * n + 1.0) - a * lgamma(n + 1.0)) / n;
}

// ------------------------------------------- chaos series against limits

struct GrowthRow {
  double t;
  double scaled_log_moment;  // t^{-beta} log E|u(t)|^2
  double target;             // fixed-p coefficient at p = 2
  double gap;
  double std_err;            // of scaled_log_moment
};

struct NormRow {
  int n;
  double scaled;  // (1/n) log((n!)^kappa ||f_n(1)||^2)
  double target;  // log((2/kappa)^kappa rho)
  double gap;
};

struct ChaosComparison {
  double beta;
  std::vector<GrowthRow> moments;
  std::vector<NormRow> norms;
};

inline ChaosComparison chaos_vs_closed_form(const ChaosSeries& series, const EquationParams& prm, double alpha,
                                            double m_const, std::span<const double> t_grid) {
  const double gap = detail::supercritical_gap(prm, alpha);
  const double kappa = gap + 1.0;
  const double beta = kappa / gap;
  const double target = limit_coefficient(prm, alpha, m_const, AsymptoticMode::FixedP, 2.0);
  ChaosComparison out{beta, {}, {}};
  for (double t : t_grid) {
    const auto sm = series.second_moment(t, prm.theta());
    const double total = sm.value + sm.tail_bound;
    const double scale = std::pow(t, -beta);
    const double v = scale * std::log(total);
    out.moments.push_back({t, v, target, v - target, scale * sm.std_err / total});
  }
  const double a = prm.a();
  const double log_rho = -(alpha / a) * std::log(prm.nu()) + ((2.0 * a - alpha) / a) * std::log(m_const);
  const double norm_target = kappa * std::log(2.0 / kappa) + log_rho;
  for (const auto& e : series.norms()) {
    if (e.n == 0 || !(e.norm_sq_at_1.value > 0.0)) continue;
    const double s = (kappa * lgamma(e.n + 1.0) + std::log(e.norm_sq_at_1.value)) / e.n;
    out.norms.push_back({e.n, s, norm_target, s - norm_target});
  }
  return out;
}

inline ChaosComparison chaos_vs_closed_form(const EquationParams& prm, const NoiseSpec& spec, double m_const,
                                            std::span<const double> t_grid, int n_terms, const McConfig& mc) {
  const auto series = ChaosSeries::compute(prm, spec, n_terms, mc);
  return chaos_vs_closed_form(series, prm, spec.alpha_total(), m_const, t_grid);
}

}  // namespace spde
