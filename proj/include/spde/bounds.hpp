#pragma once

// Lower bounds on moments through the functionals
//   W_n(t, phi) = int_{0<s_1<...<s_n<t} int prod_k phi(xi_k)
//                 prod_k FG(s_k - s_{k-1}, |xi_k + ... + xi_n|) mu(dxi_1)...mu(dxi_n) ds,
// with s_0 = 0, and
//   ||u(t)||_p >= exp(-||f||_H^2 / (2(p-1))) |sum_n theta^{n/2} W_n(t, Ff)|.
// Trials are Gaussians f(x) = c exp(-|x|^2 / (2 s^2)), so
//   Ff(xi) = c (2 pi s^2)^{d/2} exp(-s^2 |xi|^2 / 2).

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "spde/asymptotics.hpp"
#include "spde/chaos.hpp"
#include "spde/classify.hpp"
#include "spde/errors.hpp"
#include "spde/kernel.hpp"
#include "spde/model.hpp"
#include "spde/numerics.hpp"
#include "spde/random.hpp"
#include "spde/sampler.hpp"

namespace spde {

namespace detail {

// prod_k FG(s_k - s_{k-1}, |xi_k + ... + xi_n|) for sorted times.
inline double green_chain(const EquationParams& p, int n, int dim, std::span<const double> xi,
                          std::span<const double> times) {
  std::vector<double> suffix(dim, 0.0);
  double prod = 1.0;
  for (int k = n - 1; k >= 0; --k) {
    double sq = 0.0;
    for (int j = 0; j < dim; ++j) {
      suffix[j] += xi[k * dim + j];
      sq += suffix[j] * suffix[j];
    }
    const double gap = times[k] - (k > 0 ? times[k - 1] : 0.0);
    if (gap <= 0.0) return 0.0;
    prod *= fourier_green(p, gap, std::sqrt(sq));
  }
  return prod;
}

inline void sorted_uniform_times(Rng& rng, std::span<double> times, double t) {
  for (auto& s : times) s = t * uniform01(rng);
  std::sort(times.begin(), times.end());
}

}  // namespace detail

// W_n(t, phi) for a real phi, sampling mu through the spectral sampler.
inline McEstimate w_n(const EquationParams& p, const NoiseSpec& spec, int n, double t,
                      const std::function<double(std::span<const double>)>& phi, const McConfig& mc) {
  detail::check_order(n, mc);
  require(t > 0.0, ErrorKind::InvalidParams, "t must be > 0");
  if (n == 0) return exact_estimate(1.0, mc.seed);
  const SpectralSampler sampler(p, spec);
  const int dim = sampler.dim();
  const double volume = std::pow(t, n) / detail::factorial(n);
  return run_batches(mc, 3000 + n, [&](Rng& rng) {
    std::vector<double> xi(n * dim), times(n);
    double w = volume;
    for (int k = 0; k < n; ++k) {
      auto pt = std::span<double>(xi).subspan(k * dim, dim);
      w *= sampler.draw(rng, pt);
      w *= phi(pt);
    }
    detail::sorted_uniform_times(rng, times, t);
    return w * detail::green_chain(p, n, dim, xi, times);
  });
}

// ------------------------------------------------------- Gaussian trials

struct GaussianTrial {
  double amplitude;  // c
  double width;      // s
};

namespace detail {

struct SpectralBlock {
  int dim;
  double alpha;
  double angular;  // int h(|xi|) phi_i = angular * int h(u) u^{alpha-1} du
};

inline std::vector<SpectralBlock> spectral_blocks(const NoiseSpec& spec) {
  if (spec.is_white()) return {{1, 1.0, 1.0 / kPi}};
  std::vector<SpectralBlock> out;
  for (const auto& b : spec.blocks()) {
    out.push_back({b.dim, b.alpha, riesz_spectral_constant(b.alpha, b.dim) * sphere_area(b.dim)});
  }
  return out;
}

// Mass of exp(-s^2|xi|^2/2) mu(dxi) divided by s^{-alpha}.
inline double gaussian_mass_unit(std::span<const SpectralBlock> blocks) {
  double m = 1.0;
  for (const auto& b : blocks) m *= b.angular * tgamma(0.5 * b.alpha) * std::pow(2.0, 0.5 * b.alpha - 1.0);
  return m;
}

}  // namespace detail

// ||f||_H^2 = int |Ff|^2 phi = c^2 (2 pi s^2)^d A Gamma(alpha/2) / (2 s^alpha) per block.
inline double gaussian_h_norm_sq(const NoiseSpec& spec, const GaussianTrial& f) {
  require(f.width > 0.0, ErrorKind::InvalidParams, "trial width must be > 0");
  const double s = f.width;
  double m = 1.0;
  for (const auto& b : detail::spectral_blocks(spec)) {
    m *= b.angular * tgamma(0.5 * b.alpha) / (2.0 * std::pow(s, b.alpha));
  }
  return f.amplitude * f.amplitude * std::pow(2.0 * kPi * s * s, spec.dim()) * m;
}

// Ff at unit amplitude.
inline double gaussian_spectrum(int d, double s, std::span<const double> xi) {
  double sq = 0.0;
  for (double x : xi) sq += x * x;
  return std::pow(2.0 * kPi * s * s, 0.5 * d) * std::exp(-0.5 * s * s * sq);
}

// W_1(t, Ff) for a unit-amplitude Gaussian by radial quadrature; product noise
// is handled only with a single block.
inline double w1_gaussian_quadrature(const EquationParams& p, const NoiseSpec& spec, double t, double s) {
  require_compatible(p, spec);
  require_integrable(p, spec.alpha_total());
  const auto blocks = detail::spectral_blocks(spec);
  require(blocks.size() == 1, ErrorKind::InvalidNoise, "quadrature route needs a single noise block");
  const double pref = std::pow(2.0 * kPi * s * s, 0.5 * spec.dim()) * blocks[0].angular;
  return pref * quad::radial([&](double u) {
           return std::exp(-0.5 * s * s * u * u) * integrated_fourier_green(p, t, u);
         }, blocks[0].alpha, 1e-11).value;
}

struct W1LaplaceCheck {
  double transform;  // int_0^inf e^{-t} W_1(t, Ff) dt
  double resolvent;  // int Ff(xi) / (1 + (nu/2)|xi|^a) mu(dxi)
};

inline W1LaplaceCheck w1_laplace_check(const EquationParams& p, const NoiseSpec& spec, double s) {
  const auto blocks = detail::spectral_blocks(spec);
  require(blocks.size() == 1, ErrorKind::InvalidNoise, "quadrature route needs a single noise block");
  const double pref = std::pow(2.0 * kPi * s * s, 0.5 * spec.dim()) * blocks[0].angular;
  auto w1 = [&](double t) { return t <= 0.0 ? 0.0 : std::exp(-t) * w1_gaussian_quadrature(p, spec, t, s); };
  const double lhs = quad::finite(w1, 0.0, 40.0, 1e-10).value + quad::half_line(w1, 40.0, 1e-10).value;
  const double rhs = pref * quad::radial([&](double u) {
                       return std::exp(-0.5 * s * s * u * u) * resolvent(p, u);
                     }, blocks[0].alpha, 1e-12).value;
  return {lhs, rhs};
}

// W_n(ct, g_s) = c^{n(b + r - b alpha / a)} W_n(t, g_{s'}),  s' = s c^{-b/a},
// for g_s = exp(-s^2|xi|^2/2); returns the relative residual at n = 1.
inline double w1_time_scaling_residual(const EquationParams& p, const NoiseSpec& spec, double t, double s,
                                       double c) {
  const double alpha = spec.alpha_total();
  const double d = spec.dim();
  const double s2 = s * std::pow(c, -p.b() / p.a());
  // w1_gaussian_quadrature carries the (2 pi s^2)^{d/2} prefactor; strip it.
  const double lhs = w1_gaussian_quadrature(p, spec, c * t, s) / std::pow(2.0 * kPi * s * s, 0.5 * d);
  const double rhs = std::pow(c, p.b() + p.r() - p.b() * alpha / p.a()) * w1_gaussian_quadrature(p, spec, t, s2) /
                     std::pow(2.0 * kPi * s2 * s2, 0.5 * d);
  return std::abs(lhs - rhs) / std::abs(rhs);
}

// W_n(t, Ff) at unit amplitude for several widths from one set of draws.
// Each block of xi is drawn from exp(-s^2|xi|^2/2) phi_i: s^2|xi|^2/2 is
// Gamma(alpha_i/2), so base draws scale as 1/s.
class GaussianWEstimator {
 public:
  GaussianWEstimator(const EquationParams& p, const NoiseSpec& spec, const McConfig& mc)
      : prm_(p), blocks_(detail::spectral_blocks(spec)), dim_(spec.dim()), mc_(mc) {
    require_compatible(p, spec);
    require_integrable(p, spec.alpha_total());
    alpha_ = spec.alpha_total();
    mass_unit_ = detail::gaussian_mass_unit(blocks_);
  }

  // Estimates for n = 0..n_max at each width.
  std::vector<std::vector<McEstimate>> estimate(double t, std::span<const double> widths, int n_max) const {
    detail::check_order(n_max, mc_);
    std::vector<std::vector<McEstimate>> out(widths.size(), std::vector<McEstimate>(n_max + 1));
    for (std::size_t i = 0; i < widths.size(); ++i) out[i][0] = exact_estimate(1.0, mc_.seed);
    for (int n = 1; n <= n_max; ++n) {
      const auto per_width = estimate_order(t, widths, n);
      for (std::size_t i = 0; i < widths.size(); ++i) out[i][n] = per_width[i];
    }
    return out;
  }

 private:
  std::vector<McEstimate> estimate_order(double t, std::span<const double> widths, int n) const {
    const std::size_t nw = widths.size();
    const std::uint64_t nb = mc_.batches;
    const std::uint64_t per = mc_.samples / nb;
    std::vector<std::vector<double>> batch_means(nw, std::vector<double>(nb, 0.0));
    std::vector<double> base(n * dim_), xi(n * dim_), unit_times(n), times(n);
    for (std::uint64_t b = 0; b < nb; ++b) {
      Rng rng = substream(mc_.seed, 3100 + n, b);
      for (std::uint64_t i = 0; i < per; ++i) {
        draw_base(rng, n, base);
        detail::sorted_uniform_times(rng, unit_times, 1.0);
        for (int k = 0; k < n; ++k) times[k] = t * unit_times[k];
        for (std::size_t w = 0; w < nw; ++w) {
          const double inv = 1.0 / widths[w];
          for (std::size_t j = 0; j < base.size(); ++j) xi[j] = base[j] * inv;
          batch_means[w][b] += detail::green_chain(prm_, n, dim_, xi, times);
        }
      }
    }
    std::vector<McEstimate> out(nw);
    const double volume = std::pow(t, n) / detail::factorial(n);
    for (std::size_t w = 0; w < nw; ++w) {
      const double s = widths[w];
      const double mass = std::pow(2.0 * kPi * s * s, 0.5 * dim_) * mass_unit_ * std::pow(s, -alpha_);
      const double scale = std::pow(mass, n) * volume;
      double mean = 0.0, sq = 0.0;
      for (auto& m : batch_means[w]) {
        m = scale * m / static_cast<double>(per);
        mean += m;
      }
      mean /= static_cast<double>(nb);
      for (double m : batch_means[w]) sq += (m - mean) * (m - mean);
      const double sd = std::sqrt(sq / static_cast<double>(nb - 1));
      out[w] = {mean, sd / std::sqrt(static_cast<double>(nb)), per * nb, mc_.seed};
    }
    return out;
  }

  void draw_base(Rng& rng, int n, std::span<double> base) const {
    std::size_t off = 0;
    for (int k = 0; k < n; ++k) {
      for (const auto& b : blocks_) {
        const double g = boost::math::gamma_p_inv(0.5 * b.alpha, uniform01(rng));
        const double radius = std::sqrt(2.0 * g);
        if (b.dim == 1) {
          base[off] = uniform01(rng) < 0.5 ? -radius : radius;
        } else {
          double s = 0.0;
          for (int j = 0; j < b.dim; ++j) {
            base[off + j] = standard_normal(rng);
            s += base[off + j] * base[off + j];
          }
          const double scale = radius / std::sqrt(s);
          for (int j = 0; j < b.dim; ++j) base[off + j] *= scale;
        }
        off += b.dim;
      }
    }
  }

  EquationParams prm_;
  std::vector<detail::SpectralBlock> blocks_;
  int dim_;
  double alpha_;
  double mass_unit_;
  McConfig mc_;
};

struct LowerBound {
  double value;
  double std_err;
  double last_term;  // |theta^{N/2} c^N W_N|, truncation indicator (not certified)
  GaussianTrial trial;
  double h_norm_sq;
  std::vector<McEstimate> w_terms;  // unit amplitude, n = 0..N
};

namespace detail {

inline void require_global(const EquationParams& p, const NoiseSpec& spec) {
  const auto v = classify_solvability(p, spec);
  require(v.regime == Regime::GlobalLp || v.regime == Regime::GlobalBoundaryWhite1D,
          ErrorKind::OutsideConvergence, "moment lower bound needs a global regime");
}

inline LowerBound assemble_lower_bound(double theta, double p, const GaussianTrial& f, double norm_unit,
                                       std::vector<McEstimate> w) {
  const double c = f.amplitude;
  double sum = 0.0, var = 0.0, last = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    const double coef = std::pow(std::sqrt(theta) * c, static_cast<double>(n));
    sum += coef * w[n].value;
    var += std::pow(coef * w[n].std_err, 2);
    last = std::abs(coef * w[n].value);
  }
  const double h_norm = c * c * norm_unit;
  const double damp = std::exp(-0.5 * h_norm / (p - 1.0));
  return {damp * std::abs(sum), damp * std::sqrt(var), damp * last, f, h_norm, std::move(w)};
}

// Best amplitude for fixed W_n: grid on log c, then golden section.
inline double best_amplitude(double theta, double p, double norm_unit, std::span<const McEstimate> w) {
  auto objective = [&](double log_c) {
    const double c = std::exp(log_c);
    double sum = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) sum += std::pow(std::sqrt(theta) * c, static_cast<double>(n)) * w[n].value;
    return -0.5 * c * c * norm_unit / (p - 1.0) + std::log(std::abs(sum));
  };
  double best_x = -20.0, best_v = objective(best_x);
  const int grid = 121;
  for (int i = 0; i < grid; ++i) {
    const double x = -8.0 + 16.0 * i / (grid - 1);
    const double v = objective(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double lo = best_x - 16.0 / (grid - 1), hi = best_x + 16.0 / (grid - 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (objective(x1) < objective(x2)) {
      lo = x1;
    } else {
      hi = x2;
    }
  }
  const double x = 0.5 * (lo + hi);
  const double c = objective(x) > best_v ? std::exp(x) : std::exp(best_x);
  // Amplitude zero gives exactly 1; keep it when nothing beats it.
  return objective(std::log(c)) > 0.0 ? c : 0.0;
}

}  // namespace detail

// Lower bound for one Gaussian trial.
inline LowerBound lower_bound_pth_moment(const EquationParams& prm, const NoiseSpec& spec, double p, double t,
                                         const GaussianTrial& trial, int n_terms, const McConfig& mc) {
  require(p > 1.0, ErrorKind::InvalidParams, "p must be > 1");
  require(trial.amplitude >= 0.0, ErrorKind::InvalidParams, "trial amplitude must be >= 0");
  detail::require_global(prm, spec);
  const double norm_unit = gaussian_h_norm_sq(spec, {1.0, trial.width});
  if (trial.amplitude == 0.0) {
    std::vector<McEstimate> w{exact_estimate(1.0, mc.seed)};
    return detail::assemble_lower_bound(prm.theta(), p, trial, norm_unit, std::move(w));
  }
  const GaussianWEstimator est(prm, spec, mc);
  const double widths[] = {trial.width};
  auto w = est.estimate(t, widths, n_terms)[0];
  return detail::assemble_lower_bound(prm.theta(), p, trial, norm_unit, std::move(w));
}

// Best bound over widths (common random numbers) and amplitudes.
inline LowerBound optimize_lower_bound(const EquationParams& prm, const NoiseSpec& spec, double p, double t,
                                       int n_terms, const McConfig& mc, std::span<const double> widths = {}) {
  require(p > 1.0, ErrorKind::InvalidParams, "p must be > 1");
  detail::require_global(prm, spec);
  std::vector<double> grid(widths.begin(), widths.end());
  if (grid.empty()) {
    for (int i = 0; i < 9; ++i) grid.push_back(0.1 * std::pow(100.0, i / 8.0));
  }
  const GaussianWEstimator est(prm, spec, mc);
  const auto all = est.estimate(t, grid, n_terms);
  LowerBound best = lower_bound_pth_moment(prm, spec, p, t, {0.0, grid.front()}, n_terms, mc);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double norm_unit = gaussian_h_norm_sq(spec, {1.0, grid[i]});
    const double c = detail::best_amplitude(prm.theta(), p, norm_unit, all[i]);
    auto cand = detail::assemble_lower_bound(prm.theta(), p, {c, grid[i]}, norm_unit, all[i]);
    if (cand.value > best.value) best = std::move(cand);
  }
  return best;
}

// ------------------------------------------------ exponents and constants

struct ScalingExponents {
  double v;  // amplitude exponent of f_tau(x) = tau^V f(tau^W x)
  double w;  // dilation exponent
  double beta;
  double amplitude_relation;  // V - W((d - alpha) + (a/b)(b + r))
  double time_relation;       // 2(V - dW) + W alpha - 1 - (a/b) W
};

inline ScalingExponents scaling_exponents(const EquationParams& prm, double alpha) {
  const double gap = detail::supercritical_gap(prm, alpha);
  const double beta = (gap + 1.0) / gap;
  const double a = prm.a(), b = prm.b(), r = prm.r(), d = prm.d();
  const double w = (b / a) * (beta - 1.0);
  const double v = ((a / b) * (b + r) - alpha + d) * w;
  return {v, w, beta, v - w * ((d - alpha) + (a / b) * (b + r)), 2.0 * (v - d * w) + w * alpha - 1.0 - (a / b) * w};
}

struct OptimalRate {
  double c_star;          // best ratio n / t at k = k_star
  double k_star;          // best H-norm of the trial
  double h_value;         // growth_in_k(k_star)
  double growth_in_c;     // growth_in_c(c_star) at k_star
};

// growth_in_c(c) = c [log(k sqrt(theta) R) - (kappa/2) log c + kappa/2],
//   R = rho^{1/2} (kappa/2)^{-kappa/2};
// growth_in_k(k) = -k^2/2 + B k^{2/kappa},  B = (theta rho)^{1/kappa}.
inline double growth_in_k(double kappa, double theta_rho, double k) {
  return -0.5 * k * k + std::pow(theta_rho, 1.0 / kappa) * std::pow(k, 2.0 / kappa);
}

inline double growth_in_c(double kappa, double theta, double rho, double k, double c) {
  const double log_r = 0.5 * std::log(rho) - 0.5 * kappa * std::log(0.5 * kappa);
  return c * (std::log(k * std::sqrt(theta)) + log_r - 0.5 * kappa * std::log(c) + 0.5 * kappa);
}

inline OptimalRate optimal_rate_constants(const EquationParams& prm, double alpha, double m_const) {
  const double gap = detail::supercritical_gap(prm, alpha);
  require(m_const > 0.0, ErrorKind::InvalidParams, "variational constant must be > 0");
  const double kappa = gap + 1.0;
  const double beta = kappa / gap;
  const double a = prm.a();
  const double rho = std::pow(prm.nu(), -alpha / a) * std::pow(m_const, (2.0 * a - alpha) / a);
  const double theta = prm.theta();
  const double big_b = std::pow(theta * rho, 1.0 / kappa);
  const double k_star = std::pow(2.0 / kappa * big_b, 0.5 * beta);
  const double big_r = std::sqrt(rho) * std::pow(0.5 * kappa, -0.5 * kappa);
  const double c_star = std::pow(k_star * std::sqrt(theta) * big_r, 2.0 / kappa);
  return {c_star, k_star, growth_in_k(kappa, theta * rho, k_star), growth_in_c(kappa, theta, rho, k_star, c_star)};
}

}  // namespace spde
