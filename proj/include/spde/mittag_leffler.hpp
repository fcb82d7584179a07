#pragma once

// Two-parameter Mittag-Leffler function E_{beta,gamma}(z) on the negative real
// axis, 0 < beta <= 2, gamma > 0.
//
// Strategy:
//   * power series when its terms do not cancel badly;
//   * closed forms for (1,1), (1,2), (2,1), (2,2);
//   * otherwise inversion of the Laplace transform s^{beta-gamma}/(s^beta - z)
//     on an optimally placed parabolic contour, adding residues of the poles
//     left outside (Garrappa, SIAM J. Numer. Anal. 53 (2015)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "spde/errors.hpp"
#include "spde/numerics.hpp"

namespace spde {
namespace detail {

// Accept the series only when sum|terms| <= kSeriesCancel * |sum|.
inline constexpr double kSeriesCancel = 50.0;

inline std::optional<double> ml_series(double beta, double gamma, double z) {
  const double log_x = std::log(-z);
  double sum = 0.0;
  double abs_sum = 0.0;
  double prev_log_term = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 600; ++k) {
    const double log_term = k * log_x - lgamma(beta * k + gamma);
    if (log_term > 30.0) return std::nullopt;  // cancellation hopeless
    const double term = std::exp(log_term);
    sum += (k % 2 == 0) ? term : -term;
    abs_sum += term;
    const bool decreasing = log_term < prev_log_term;
    prev_log_term = log_term;
    if (k > 2 && decreasing && term <= 1e-17 * std::abs(sum)) {
      if (abs_sum > kSeriesCancel * std::abs(sum)) return std::nullopt;
      return sum;
    }
  }
  return std::nullopt;
}

struct Contour {
  double mu = 0.0;
  double h = 0.0;
  double nodes = std::numeric_limits<double>::infinity();
};

inline constexpr double kLogMachEps = -36.043653389117154;  // log(2^-52)

// Parabola lying strictly between two singularity levels phi_lo < phi_hi.
inline Contour contour_bounded(double phi_lo, double phi_hi, double p, double q, double log_tol) {
  const double fac = 1.01;
  const double f_max = std::exp(log_tol - kLogMachEps);
  const double sq_lo = std::sqrt(phi_lo);
  const double limit = 2.0 * std::sqrt(log_tol - kLogMachEps);
  const double sq_hi = std::min(std::sqrt(phi_hi), limit - sq_lo);
  if (!(sq_hi > sq_lo)) return {};

  double bar_lo = sq_lo;
  double bar_hi = sq_hi;
  double f_bar = 1.0;
  const bool p_zero = p < 1e-14;
  const bool q_zero = q < 1e-14;
  if (p_zero && !q_zero) {
    const double f_min = sq_lo > 0.0 ? fac * std::pow(sq_lo / (sq_hi - sq_lo), q) : fac;
    if (!(f_min < f_max)) return {};
    f_bar = f_min + f_min / f_max * (f_max - f_min);
    const double fq = std::pow(f_bar, -1.0 / q);
    bar_hi = (2.0 * sq_hi - fq * sq_lo) / (2.0 + fq);
  } else if (!p_zero && q_zero) {
    const double f_min = fac * std::pow(sq_hi / (sq_hi - sq_lo), p);
    if (!(f_min < f_max)) return {};
    f_bar = f_min + f_min / f_max * (f_max - f_min);
    const double fp = std::pow(f_bar, -1.0 / p);
    bar_lo = (2.0 * sq_lo + fp * sq_hi) / (2.0 - fp);
  } else if (!p_zero && !q_zero) {
    double f_min = fac * (sq_lo + sq_hi) / std::pow(sq_hi - sq_lo, std::max(p, q));
    if (!(f_min < f_max)) return {};
    f_min = std::max(f_min, 1.5);
    f_bar = f_min + f_min / f_max * (f_max - f_min);
    const double fp = std::pow(f_bar, -1.0 / p);
    const double fq = std::pow(f_bar, -1.0 / q);
    const double w = -phi_hi / log_tol;
    const double den = 2.0 + w - (1.0 + w) * fp + fq;
    bar_lo = ((2.0 + w + fq) * sq_lo + fp * sq_hi) / den;
    bar_hi = (-(1.0 + w) * fq * sq_lo + (2.0 + w - (1.0 + w) * fp) * sq_hi) / den;
  }
  const double le = log_tol - std::log(f_bar);
  const double w = -bar_hi * bar_hi / le;
  Contour c;
  c.mu = std::pow(((1.0 + w) * bar_lo + bar_hi) / (2.0 + w), 2);
  c.h = -2.0 * kPi / le * (bar_hi - bar_lo) / ((1.0 + w) * bar_lo + bar_hi);
  c.nodes = std::ceil(std::sqrt(1.0 - le / c.mu) / c.h);
  if (!(c.mu > 0.0) || !(c.h > 0.0)) return {};
  return c;
}

// Parabola enclosing every singularity with level <= phi_lo.
inline Contour contour_unbounded(double phi_lo, double p, double log_tol) {
  const double sq_phi = std::sqrt(phi_lo);
  double phi_bar = phi_lo > 0.0 ? 1.01 * phi_lo : 0.01;
  double sq_bar = std::sqrt(phi_bar);
  const double f_min = 1.0, f_max = 10.0, f_tar = 5.0;
  double nodes = 0.0, big_a = 0.0, sq_mu = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double le_phi = log_tol / phi_bar;
    nodes = std::ceil(phi_bar / kPi * (1.0 - 1.5 * le_phi + std::sqrt(1.0 - 2.0 * le_phi)));
    big_a = kPi * nodes / phi_bar;
    sq_mu = sq_bar * std::abs(4.0 - big_a) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * big_a));
    const double f_bar = std::pow((sq_bar - sq_phi) / sq_mu, -p);
    if (p < 1e-14 || (f_min < f_bar && f_bar < f_max)) break;
    sq_bar = std::pow(f_tar, -1.0 / p) * sq_mu + sq_phi;
    phi_bar = sq_bar * sq_bar;
  }
  Contour c;
  c.mu = sq_mu * sq_mu;
  c.h = (-3.0 * big_a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * big_a)) / (4.0 - big_a) / nodes;
  c.nodes = nodes;
  const double limit = log_tol - kLogMachEps;
  if (c.mu > limit) {
    const double shift = std::abs(p) < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / p) * std::sqrt(c.mu);
    phi_bar = std::pow(shift + sq_phi, 2);
    if (!(phi_bar < limit)) return {};
    const double w = std::sqrt(kLogMachEps / (kLogMachEps - log_tol));
    const double u = std::sqrt(-phi_bar / kLogMachEps);
    c.mu = limit;
    c.nodes = std::ceil(w * log_tol / (2.0 * kPi * (u * w - 1.0)));
    c.h = w / c.nodes;
  }
  return c;
}

inline double ml_contour(double beta, double gamma, double z) {
  using cplx = std::complex<double>;
  const double x = -z;

  struct Singularity {
    cplx s;
    double level;
  };
  std::vector<Singularity> poles;
  const int kmin = static_cast<int>(std::ceil(-0.5 * beta - 0.5));
  const int kmax = static_cast<int>(std::floor(0.5 * beta - 0.5));
  for (int k = kmin; k <= kmax; ++k) {
    const cplx s = std::polar(std::pow(x, 1.0 / beta), (kPi + 2.0 * kPi * k) / beta);
    const double level = 0.5 * (s.real() + std::abs(s));
    if (level > 1e-15) poles.push_back({s, level});
  }
  std::sort(poles.begin(), poles.end(),
            [](const Singularity& l, const Singularity& r) { return l.level < r.level; });

  // levels[0] is the branch point at the origin.
  std::vector<double> levels{0.0};
  for (const auto& pl : poles) levels.push_back(pl.level);
  const std::size_t n_sing = levels.size();
  levels.push_back(std::numeric_limits<double>::infinity());
  std::vector<double> strength_lo(n_sing, 1.0);
  std::vector<double> strength_hi(n_sing, 1.0);
  strength_lo[0] = std::max(0.0, 2.0 * (gamma - beta - 1.0));
  strength_hi[n_sing - 1] = std::numeric_limits<double>::infinity();

  double log_tol = std::log(1e-15);
  Contour best;
  std::size_t best_region = 0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    best = Contour{};
    for (std::size_t j = 0; j < n_sing; ++j) {
      const bool admissible = levels[j] < log_tol - kLogMachEps && levels[j] < levels[j + 1];
      if (!admissible) continue;
      const Contour c = (j + 1 < n_sing)
                            ? contour_bounded(levels[j], levels[j + 1], strength_lo[j],
                                              strength_hi[j], log_tol)
                            : contour_unbounded(levels[j], strength_lo[j], log_tol);
      if (c.nodes < best.nodes) {
        best = c;
        best_region = j;
      }
    }
    if (best.nodes <= 200.0) break;
    log_tol += std::log(10.0);
  }
  if (!std::isfinite(best.nodes)) {
    std::ostringstream os;
    os << "E_{" << beta << "," << gamma << "}(" << z << "): no admissible contour";
    throw Error(ErrorKind::ConvergenceFailure, os.str());
  }

  // The integrand at -u is minus the conjugate of the one at u, so only the
  // imaginary parts of the u >= 0 half contribute.
  const int n = static_cast<int>(best.nodes);
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double u = best.h * k;
    const cplx s = best.mu * std::pow(cplx(1.0, u), 2);
    const cplx ds = 2.0 * best.mu * cplx(-u, 1.0);
    const cplx log_s = std::log(s);
    const cplx val = std::exp(s + (beta - gamma) * log_s) / (std::exp(beta * log_s) - z) * ds;
    acc += (k == 0 ? 1.0 : 2.0) * val.imag();
  }
  double result = best.h * acc / (2.0 * kPi);

  for (std::size_t j = best_region; j < poles.size(); ++j) {
    const cplx s = poles[j].s;
    result += (std::exp(s) * std::pow(s, 1.0 - gamma) / beta).real();
  }
  return result;
}

}  // namespace detail

// Series or contour only, skipping the elementary closed forms.
inline double mittag_leffler_general(double beta, double gamma, double z) {
  require(beta > 0.0 && beta <= 2.0, ErrorKind::InvalidParams, "Mittag-Leffler needs 0 < beta <= 2");
  require(gamma > 0.0, ErrorKind::InvalidParams, "Mittag-Leffler needs gamma > 0");
  require(z <= 0.0, ErrorKind::InvalidParams, "Mittag-Leffler is evaluated on the negative axis only");
  if (z == 0.0) return rgamma(gamma);
  if (auto s = detail::ml_series(beta, gamma, z)) return *s;
  return detail::ml_contour(beta, gamma, z);
}

inline double mittag_leffler(double beta, double gamma, double z) {
  require(beta > 0.0 && beta <= 2.0, ErrorKind::InvalidParams, "Mittag-Leffler beta must lie in (0,2]");
  require(gamma > 0.0, ErrorKind::InvalidParams, "Mittag-Leffler gamma must be > 0");
  require(z <= 0.0, ErrorKind::InvalidParams, "Mittag-Leffler argument must be <= 0");
  if (z == 0.0) return rgamma(gamma);
  if (beta == 1.0 && gamma == 1.0) return std::exp(z);
  if (beta == 1.0 && gamma == 2.0) return std::expm1(z) / z;
  if (beta == 2.0 && gamma == 1.0) return std::cos(std::sqrt(-z));
  if (beta == 2.0 && gamma == 2.0) return std::sin(std::sqrt(-z)) / std::sqrt(-z);
  if (auto s = detail::ml_series(beta, gamma, z)) return *s;
  return detail::ml_contour(beta, gamma, z);
}

}  // namespace spde
