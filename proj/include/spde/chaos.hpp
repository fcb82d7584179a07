#pragma once

// Wiener-chaos moment machinery in Fourier space.
//
//   C_mu          integral of (1 + c|xi|^a)^{-2} mu(d xi),  c = nu/2
//   T_n           integral of [sum over permutations of prod_k
//                 (1 + c|xi_{s(k)} + ... + xi_{s(n)}|^a)^{-1}]^2
//   ||f_n(1)||^2  squared H^{(x)n} norm of the symmetrized chaos kernel at
//                 t = 1; at time t it is t^{kappa n} times this value.
//
// Both permutation sums are evaluated by dynamic programming over subsets,
// O(n 2^n) instead of O(n n!).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "spde/classify.hpp"
#include "spde/errors.hpp"
#include "spde/kernel.hpp"
#include "spde/model.hpp"
#include "spde/numerics.hpp"
#include "spde/random.hpp"
#include "spde/sampler.hpp"

namespace spde {

inline constexpr int kMaxChaosOrder = 10;

inline double c_mu(const EquationParams& p, const NoiseSpec& spec) {
  require_compatible(p, spec);
  const double alpha = spec.alpha_total();
  require_integrable(p, alpha);
  const double a = p.a();
  const double s = alpha / a;
  return spectral_angular_factor(spec) / a * std::pow(p.resolvent_coeff(), -s) * beta_fn(s, 2.0 - s);
}

// Radial integral of phi against a function of |xi|.
template <class F>
double radial_spectral_integral(const NoiseSpec& spec, F&& f, double tol = 1e-12) {
  return spectral_angular_factor(spec) * quad::radial(f, spec.alpha_total(), tol).value;
}

namespace detail {

inline void check_order(int n, const McConfig& mc) {
  require(n >= 0, ErrorKind::InvalidParams, "chaos order must be >= 0");
  if (n > mc.n_max || n > kMaxChaosOrder) {
    throw Error(ErrorKind::BudgetExceeded,
                "chaos order " + std::to_string(n) + " exceeds n_max=" +
                    std::to_string(std::min(mc.n_max, kMaxChaosOrder)));
  }
}

// Lexicographic order of the n points so that the integrands do not depend
// on how the points are labelled, bit for bit.
inline void canonicalize(std::span<double> xi, int n, int dim) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int l, int r) {
    return std::lexicographical_compare(xi.begin() + l * dim, xi.begin() + (l + 1) * dim,
                                        xi.begin() + r * dim, xi.begin() + (r + 1) * dim);
  });
  std::vector<double> sorted(xi.begin(), xi.end());
  for (int k = 0; k < n; ++k) {
    std::copy(sorted.begin() + idx[k] * dim, sorted.begin() + (idx[k] + 1) * dim,
              xi.begin() + k * dim);
  }
}

// |sum_{j in S} xi_j|^a for every subset S of the n points.
inline std::vector<double> subset_powers(std::span<const double> xi, int n, int dim, double a) {
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> sums(count * dim, 0.0);
  std::vector<double> out(count, 0.0);
  for (std::size_t s = 1; s < count; ++s) {
    const int j = std::countr_zero(s);
    const std::size_t prev = s & (s - 1);
    double sq = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double v = sums[prev * dim + k] + xi[j * dim + k];
      sums[s * dim + k] = v;
      sq += v * v;
    }
    out[s] = std::pow(std::sqrt(sq), a);
  }
  return out;
}

// D(S) = f(S) * sum_{j in S} D(S \ j), D(empty) = 1.
template <class F>
double subset_chain(int n, F&& factor) {
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> d(count, 0.0);
  d[0] = 1.0;
  for (std::size_t s = 1; s < count; ++s) {
    double acc = 0.0;
    for (std::size_t rest = s; rest != 0; rest &= rest - 1) {
      acc += d[s & ~(rest & (~rest + 1))];
    }
    d[s] = factor(s) * acc;
  }
  return d[count - 1];
}

}  // namespace detail

// Sum over permutations s of prod_k (1 + c|xi_{s(k)} + ... + xi_{s(n)}|^a)^{-1}.
// xi holds n points of dimension dim, row after row.
inline double t_n_integrand(const EquationParams& p, int n, int dim, std::span<const double> xi) {
  require(static_cast<int>(xi.size()) == n * dim, ErrorKind::InvalidParams, "xi has wrong length");
  std::vector<double> pts(xi.begin(), xi.end());
  detail::canonicalize(pts, n, dim);
  const auto pw = detail::subset_powers(pts, n, dim, p.a());
  const double c = p.resolvent_coeff();
  return detail::subset_chain(n, [&](std::size_t s) { return 1.0 / (1.0 + c * pw[s]); });
}

// Sum over permutations s of prod_k FG(times_{k+1} - times_k,
// |xi_{s(1)} + ... + xi_{s(k)}|) with times_{n+1} = horizon.
inline double fn_time_integrand(const EquationParams& p, int n, int dim, std::span<const double> xi,
                                std::span<const double> times, double horizon = 1.0) {
  require(static_cast<int>(xi.size()) == n * dim, ErrorKind::InvalidParams, "xi has wrong length");
  require(static_cast<int>(times.size()) == n, ErrorKind::InvalidParams, "need n time points");
  std::vector<double> pts(xi.begin(), xi.end());
  detail::canonicalize(pts, n, dim);
  const auto pw = detail::subset_powers(pts, n, dim, p.a());
  std::vector<double> gaps(n);
  for (int k = 0; k < n; ++k) gaps[k] = (k + 1 < n ? times[k + 1] : horizon) - times[k];
  const double order = p.b() + p.r();
  const double c = p.resolvent_coeff();
  return detail::subset_chain(n, [&](std::size_t s) {
    const double dt = gaps[std::popcount(s) - 1];
    if (dt <= 0.0) return 0.0;
    return std::pow(dt, order - 1.0) * mittag_leffler(p.b(), order, -c * pw[s] * std::pow(dt, p.b()));
  });
}

inline McEstimate t_n(const EquationParams& p, const NoiseSpec& spec, int n, const McConfig& mc) {
  detail::check_order(n, mc);
  require(n >= 1, ErrorKind::InvalidParams, "T_n needs n >= 1");
  const SpectralSampler sampler(p, spec);
  const int dim = sampler.dim();
  return run_batches(mc, 1000 + n, [&](Rng& rng) {
    std::vector<double> xi(n * dim);
    double w = 1.0;
    for (int k = 0; k < n; ++k) w *= sampler.draw(rng, std::span<double>(xi).subspan(k * dim, dim));
    const double v = t_n_integrand(p, n, dim, xi);
    return w * v * v;
  });
}

namespace detail {
inline void require_chaos_regime(const EquationParams& p, const NoiseSpec& spec) {
  const auto v = classify_solvability(p, spec);
  if (v.regime == Regime::NoL2PerFigures || v.regime == Regime::NotCovered) {
    throw Error(ErrorKind::Divergent, "chaos norms need a global or local regime, got " +
                                          std::string(to_string(v.regime)));
  }
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }
}  // namespace detail

// ||f_1(., 0, t)||^2 by radial quadrature: integral of (int_0^t FG)^2 mu.
inline double fn_norm_sq_one(const EquationParams& p, const NoiseSpec& spec, double t = 1.0) {
  require_compatible(p, spec);
  require_integrable(p, spec.alpha_total());
  return radial_spectral_integral(spec, [&](double s) {
    const double g = integrated_fourier_green(p, t, s);
    return g * g;
  }, 1e-11);
}

// Estimate of ||f_n(., 0, 1)||^2.  For each spectral sample the inner time
// integral is estimated from mc.time_draws uniform points of the ordered
// simplex, and its square by the unbiased pairwise-product statistic.  For
// n = 1 the time integral is exact.
inline McEstimate fn_norm_sq(const EquationParams& p, const NoiseSpec& spec, int n, const McConfig& mc) {
  detail::check_order(n, mc);
  if (n == 0) return exact_estimate(1.0, mc.seed);
  detail::require_chaos_regime(p, spec);
  require(mc.time_draws >= 2, ErrorKind::InvalidParams, "need at least 2 time draws");
  const SpectralSampler sampler(p, spec);
  const int dim = sampler.dim();
  const double nf = detail::factorial(n);
  const int m = mc.time_draws;
  return run_batches(mc, 2000 + n, [&](Rng& rng) {
    std::vector<double> xi(n * dim);
    double w = 1.0;
    for (int k = 0; k < n; ++k) w *= sampler.draw(rng, std::span<double>(xi).subspan(k * dim, dim));
    if (n == 1) {
      double s = 0.0;
      for (double x : xi) s += x * x;
      const double g = integrated_fourier_green(p, 1.0, std::sqrt(s));
      return w * g * g;
    }
    std::vector<double> times(n);
    double sum = 0.0, sum_sq = 0.0;
    for (int j = 0; j < m; ++j) {
      for (auto& s : times) s = uniform01(rng);
      std::sort(times.begin(), times.end());
      const double v = fn_time_integrand(p, n, dim, xi, times);
      sum += v;
      sum_sq += v * v;
    }
    const double pair_mean = (sum * sum - sum_sq) / (static_cast<double>(m) * (m - 1));
    return w * pair_mean / (nf * nf * nf * nf);
  });
}

struct ChaosNormSeq {
  int n;
  McEstimate norm_sq_at_1;
};

inline std::vector<ChaosNormSeq> chaos_norms(const EquationParams& p, const NoiseSpec& spec, int n_terms,
                                             const McConfig& mc) {
  require(n_terms >= 0, ErrorKind::InvalidParams, "number of terms must be >= 0");
  std::vector<ChaosNormSeq> out;
  for (int n = 0; n <= n_terms; ++n) out.push_back({n, fn_norm_sq(p, spec, n, mc)});
  return out;
}

// log of sum_{n > n_last} x^n n! / Gamma(kappa n + 1); +inf when divergent.
inline double log_factorial_ratio_tail(double log_x, double kappa, int n_last) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (kappa < 1.0) return inf;
  if (kappa == 1.0 && log_x >= 0.0) return inf;
  double acc = -inf;
  double prev = inf;
  for (int n = n_last + 1; n < n_last + 100000; ++n) {
    const double lt = n * log_x + lgamma(n + 1.0) - lgamma(kappa * n + 1.0);
    acc = log_add(acc, lt);
    if (lt < prev && lt < acc - 40.0) return acc;
    prev = lt;
  }
  return inf;
}

struct SeriesValue {
  double value;
  double std_err;
  double tail_bound;
};

struct PMomentBound {
  double value;     // min of the two routes
  double direct;    // Minkowski plus hypercontractivity, term by term
  double rescaled;  // second moment at the stretched time, square root
};

struct T2Estimate {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double point = std::numeric_limits<double>::quiet_NaN();
  bool low_confidence = true;
  std::optional<double> closed_form;
};

// Root-test estimate of the radius in t of sum theta^n R_n t^{kappa n},
// R_n = n! ||f_n(1)||^2: per term T(n) = (theta R_n^{1/n})^{-1/kappa}.
inline T2Estimate estimate_t2_from_norms(double kappa, double theta, std::span<const ChaosNormSeq> norms) {
  T2Estimate out;
  std::vector<const ChaosNormSeq*> usable;
  for (const auto& e : norms) {
    if (e.n >= 1 && e.norm_sq_at_1.value > 0.0) usable.push_back(&e);
  }
  if (usable.empty()) return out;
  const std::size_t first = usable.size() > 3 ? usable.size() - 3 : 0;
  auto radius = [&](int n, double log_r) { return std::exp(-(log_r / n + std::log(theta)) / kappa); };
  out.lower = std::numeric_limits<double>::infinity();
  out.upper = 0.0;
  for (std::size_t i = first; i < usable.size(); ++i) {
    const auto& e = *usable[i];
    const double v = e.norm_sq_at_1.value;
    const double rel = std::min(3.0 * e.norm_sq_at_1.std_err / v, 0.999);
    const double log_r = lgamma(e.n + 1.0) + std::log(v);
    const double hi = radius(e.n, log_r + std::log1p(-rel));
    const double lo = radius(e.n, log_r + std::log1p(rel));
    out.lower = std::min(out.lower, lo);
    out.upper = std::max(out.upper, hi);
    out.point = radius(e.n, log_r);
  }
  out.low_confidence = usable.size() < 3;
  return out;
}

inline T2Estimate estimate_T2(const EquationParams& p, const NoiseSummary& noise,
                              std::span<const ChaosNormSeq> norms, std::optional<double> m_const = {}) {
  const auto v = classify_solvability(p, noise);
  require(v.regime == Regime::LocalLp, ErrorKind::NotLocalRegime,
          "T2 is defined only in the local regime");
  T2Estimate out = estimate_t2_from_norms(p.time_exponent(noise.alpha), p.theta(), norms);
  if (m_const) out.closed_form = critical_time(p, noise, 2.0, *m_const);
  return out;
}

inline T2Estimate estimate_T2(const EquationParams& p, const NoiseSpec& spec,
                              std::span<const ChaosNormSeq> norms, std::optional<double> m_const = {}) {
  require_compatible(p, spec);
  return estimate_T2(p, NoiseSummary::of(spec), norms, m_const);
}

// Second-moment series E[u(t,0)^2] = sum theta^n n! t^{kappa n} ||f_n(1)||^2.
// Only the exponent kappa and the t = 1 norms are stored.
class ChaosSeries {
 public:
  ChaosSeries(double kappa, double c_mu_value, Regime regime, std::vector<ChaosNormSeq> norms)
      : kappa_(kappa), c_mu_(c_mu_value), regime_(regime), norms_(std::move(norms)) {
    require(!norms_.empty() && norms_.front().n == 0, ErrorKind::InvalidParams,
            "norm sequence must start at n = 0");
    for (std::size_t i = 0; i < norms_.size(); ++i) {
      require(norms_[i].n == static_cast<int>(i), ErrorKind::InvalidParams, "norm sequence has gaps");
    }
  }

  static ChaosSeries compute(const EquationParams& p, const NoiseSpec& spec, int n_terms, const McConfig& mc) {
    const auto v = classify_solvability(p, spec);
    return ChaosSeries(p.time_exponent(spec.alpha_total()), c_mu(p, spec), v.regime,
                       chaos_norms(p, spec, n_terms, mc));
  }

  double kappa() const { return kappa_; }
  double c_mu_value() const { return c_mu_; }
  Regime regime() const { return regime_; }
  int terms() const { return static_cast<int>(norms_.size()) - 1; }
  std::span<const ChaosNormSeq> norms() const { return norms_; }

  double norm_sq(int n, double t) const {
    require(n >= 0 && n <= terms(), ErrorKind::InvalidParams, "chaos order out of range");
    return std::pow(t, kappa_ * n) * norms_[n].norm_sq_at_1.value;
  }

  // Bound on the terms beyond the stored ones, from
  // ||f_n(1)||^2 <= (2^kappa C_mu)^n / Gamma(kappa n + 1).
  double tail_bound(double t, double theta) const {
    if (theta == 0.0) return 0.0;
    const double log_x = std::log(theta) + kappa_ * std::log(t) + kappa_ * std::log(2.0) + std::log(c_mu_);
    return std::exp(log_factorial_ratio_tail(log_x, kappa_, terms()));
  }

  SeriesValue second_moment(double t, double theta) const {
    require(t > 0.0, ErrorKind::InvalidParams, "t must be > 0");
    require(theta >= 0.0, ErrorKind::InvalidParams, "theta must be >= 0");
    if (theta == 0.0) return {1.0, 0.0, 0.0};
    check_convergence(t, theta);
    double value = 0.0, var = 0.0;
    for (const auto& e : norms_) {
      const double coef = std::pow(theta, e.n) * detail::factorial(e.n) * std::pow(t, kappa_ * e.n);
      value += coef * e.norm_sq_at_1.value;
      var += std::pow(coef * e.norm_sq_at_1.std_err, 2);
    }
    const double tail = tail_bound(t, theta);
    if (!std::isfinite(tail)) {
      throw Error(ErrorKind::OutsideConvergence, "tail bound of the second-moment series is infinite");
    }
    return {value, std::sqrt(var), tail};
  }

  PMomentBound p_moment_upper(double p, double t, double theta) const {
    require(p >= 2.0, ErrorKind::InvalidParams, "p must be >= 2");
    require(regime_ == Regime::GlobalLp || regime_ == Regime::GlobalBoundaryWhite1D,
            ErrorKind::OutsideConvergence, "p-moment bound needs a global regime");
    // Route 1: ||u||_p <= sum_n (p-1)^{n/2} (theta^n n! ||f_n(t)||^2)^{1/2}.
    double direct = 0.0;
    for (const auto& e : norms_) {
      const double second = std::pow(theta, e.n) * detail::factorial(e.n) * norm_sq(e.n, t);
      direct += std::pow(p - 1.0, 0.5 * e.n) * std::sqrt(std::max(second, 0.0));
    }
    // Each tail term of route 1 is bounded by the square root of the
    // matching bound with theta replaced by theta (p-1).
    direct += sqrt_tail_bound(t, theta * (p - 1.0));
    // Route 2: ||u(t)||_p <= ||u(t (p-1)^{1/kappa})||_2.
    const double stretched = t * std::pow(p - 1.0, 1.0 / kappa_);
    const auto sm = second_moment(stretched, theta);
    const double rescaled = std::sqrt(sm.value + sm.tail_bound);
    return {std::min(direct, rescaled), direct, rescaled};
  }

 private:
  void check_convergence(double t, double theta) const {
    if (regime_ == Regime::LocalLp) {
      const auto est = estimate_t2_from_norms(kappa_, theta, norms_);
      if (std::isfinite(est.point) && t >= est.point) {
        throw Error(ErrorKind::OutsideConvergence,
                    "t=" + std::to_string(t) + " is beyond the estimated T2=" + std::to_string(est.point));
      }
    } else if (regime_ != Regime::GlobalLp && regime_ != Regime::GlobalBoundaryWhite1D) {
      throw Error(ErrorKind::OutsideConvergence, "second moment needs a global or local regime");
    }
  }

  // sum_{n > N} sqrt(x^n n! / Gamma(kappa n + 1)) with the same x as tail_bound.
  double sqrt_tail_bound(double t, double theta) const {
    const double log_x = std::log(theta) + kappa_ * std::log(t) + kappa_ * std::log(2.0) + std::log(c_mu_);
    constexpr double inf = std::numeric_limits<double>::infinity();
    double acc = -inf, prev = inf;
    for (int n = terms() + 1; n < terms() + 100000; ++n) {
      const double lt = 0.5 * (n * log_x + lgamma(n + 1.0) - lgamma(kappa_ * n + 1.0));
      acc = log_add(acc, lt);
      if (lt < prev && lt < acc - 40.0) return std::exp(acc);
      prev = lt;
    }
    return inf;
  }

  double kappa_;
  double c_mu_;
  Regime regime_;
  std::vector<ChaosNormSeq> norms_;
};

inline SeriesValue second_moment(const EquationParams& p, const NoiseSpec& spec, double t, int n_terms,
                                 const McConfig& mc) {
  return ChaosSeries::compute(p, spec, n_terms, mc).second_moment(t, p.theta());
}

inline PMomentBound p_moment_upper(const EquationParams& prm, const NoiseSpec& spec, double p, double t,
                                   int n_terms, const McConfig& mc) {
  return ChaosSeries::compute(prm, spec, n_terms, mc).p_moment_upper(p, t, prm.theta());
}

// Nondecreasing step function: value[j] on [knot[j], knot[j+1]), the last
// value continuing to infinity.  knot[0] = 0.
struct StepFunction {
  std::vector<double> knots;
  std::vector<double> values;
};

struct DoubleExpCheck {
  double lhs;  // 2 integral e^{-2t} H^2
  double rhs;  // (integral e^{-t} H)^2
};

inline DoubleExpCheck doubleexp_check(const StepFunction& h) {
  require(!h.knots.empty() && h.knots.size() == h.values.size(), ErrorKind::InvalidParams,
          "step function needs one value per knot");
  require(h.knots.front() == 0.0, ErrorKind::InvalidParams, "first knot must be 0");
  for (std::size_t j = 0; j < h.values.size(); ++j) {
    require(h.values[j] >= 0.0, ErrorKind::NotMonotone, "step function must be nonnegative");
    if (j > 0) {
      require(h.knots[j] > h.knots[j - 1], ErrorKind::InvalidParams, "knots must increase");
      require(h.values[j] >= h.values[j - 1], ErrorKind::NotMonotone, "step function must be nondecreasing");
    }
  }
  double lhs = 0.0, first = 0.0;
  for (std::size_t j = 0; j < h.values.size(); ++j) {
    const double lo = h.knots[j];
    const bool last = j + 1 == h.values.size();
    const double e1 = std::exp(-lo) - (last ? 0.0 : std::exp(-h.knots[j + 1]));
    const double e2 = std::exp(-2.0 * lo) - (last ? 0.0 : std::exp(-2.0 * h.knots[j + 1]));
    lhs += h.values[j] * h.values[j] * e2;
    first += h.values[j] * e1;
  }
  return {lhs, first * first};
}

}  // namespace spde
