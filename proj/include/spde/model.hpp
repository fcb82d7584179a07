#pragma once

// Equation parameters and the Gaussian noise model: correlation function,
// spectral density, square-root kernel and their normalization constants.
//
// Fourier convention: (F f)(xi) = integral of exp(-i x.xi) f(x) dx.  With it
// the spectral density of |x|^{-alpha} in R^d is C_{alpha,d} |xi|^{-(d-alpha)}
// and white noise has the constant density (2 pi)^{-d}.

#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spde/errors.hpp"
#include "spde/numerics.hpp"

namespace spde {

enum class WaveLimit { Off, Formal };

class EquationParams {
 public:
  EquationParams(double a, double b, double r, double nu, double theta, int d,
                 WaveLimit wave = WaveLimit::Off)
      : a_(a), b_(b), r_(r), nu_(nu), theta_(theta), d_(d), wave_(wave) {
    require(a > 0.0 && a <= 2.0, ErrorKind::InvalidParams, "a must lie in (0,2]");
    const bool b_ok = (b > 0.0 && b < 2.0) || (b == 2.0 && wave == WaveLimit::Formal);
    require(b_ok, ErrorKind::InvalidParams,
            "b must lie in (0,2); b=2 needs the formal wave-limit flag");
    require(r >= 0.0, ErrorKind::InvalidParams, "r must be >= 0");
    require(nu > 0.0, ErrorKind::InvalidParams, "nu must be > 0");
    require(theta > 0.0, ErrorKind::InvalidParams, "theta must be > 0");
    require(d >= 1, ErrorKind::InvalidParams, "d must be >= 1");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double r() const { return r_; }
  double nu() const { return nu_; }
  double theta() const { return theta_; }
  int d() const { return d_; }
  WaveLimit wave() const { return wave_; }
  bool formal_wave() const { return wave_ == WaveLimit::Formal; }

  // Coefficient of |xi|^a in the resolvent 1 + (nu/2)|xi|^a.
  double resolvent_coeff() const { return 0.5 * nu_; }

  // Exponent of t in ||f_n(.,0,t)||^2 = t^{n*kappa} ||f_n(.,0,1)||^2.
  double time_exponent(double alpha) const { return 2.0 * (b_ + r_) - b_ * alpha / a_; }

  // (a/b)[2(b+r)-1]: noise roughness at which solutions become local.
  double critical_alpha() const { return (a_ / b_) * (2.0 * (b_ + r_) - 1.0); }

  EquationParams with_theta(double theta) const {
    return EquationParams(a_, b_, r_, nu_, theta, d_, wave_);
  }
  EquationParams with_nu(double nu) const {
    return EquationParams(a_, b_, r_, nu, theta_, d_, wave_);
  }

 private:
  double a_, b_, r_, nu_, theta_;
  int d_;
  WaveLimit wave_;
};

struct RieszBlock {
  int dim;
  double alpha;
};

enum class NoiseKind { RieszProduct, White1D };

class NoiseSpec {
 public:
  static NoiseSpec riesz(std::vector<RieszBlock> blocks) {
    require(!blocks.empty(), ErrorKind::InvalidNoise, "Riesz product needs at least one block");
    for (const auto& blk : blocks) {
      require(blk.dim >= 1, ErrorKind::InvalidNoise, "block dimension must be >= 1");
      if (!(blk.alpha > 0.0 && blk.alpha < blk.dim)) {
        std::ostringstream os;
        os << "block alpha must lie in (0, d_i): got alpha=" << blk.alpha << ", d_i=" << blk.dim;
        throw Error(ErrorKind::InvalidNoise, os.str());
      }
    }
    return NoiseSpec(NoiseKind::RieszProduct, std::move(blocks));
  }
  static NoiseSpec riesz(int dim, double alpha) { return riesz({RieszBlock{dim, alpha}}); }
  static NoiseSpec white_1d() { return NoiseSpec(NoiseKind::White1D, {}); }

  NoiseKind kind() const { return kind_; }
  bool is_white() const { return kind_ == NoiseKind::White1D; }
  std::span<const RieszBlock> blocks() const { return blocks_; }

  int dim() const {
    if (is_white()) return 1;
    return std::accumulate(blocks_.begin(), blocks_.end(), 0,
                           [](int s, const RieszBlock& b) { return s + b.dim; });
  }
  double alpha_total() const {
    if (is_white()) return 1.0;
    double s = 0.0;
    for (const auto& b : blocks_) s += b.alpha;
    return s;
  }

 private:
  NoiseSpec(NoiseKind k, std::vector<RieszBlock> b) : kind_(k), blocks_(std::move(b)) {}
  NoiseKind kind_;
  std::vector<RieszBlock> blocks_;
};

inline void require_compatible(const EquationParams& p, const NoiseSpec& s) {
  if (s.dim() != p.d()) {
    std::ostringstream os;
    os << "noise dimension " << s.dim() << " differs from equation dimension d=" << p.d();
    throw Error(ErrorKind::InvalidNoise, os.str());
  }
}

// C_{alpha,d}: spectral constant of |x|^{-alpha} on R^d.
inline double riesz_spectral_constant(double alpha, int d) {
  return std::pow(kPi, -0.5 * d) * std::pow(2.0, -alpha) * tgamma(0.5 * (d - alpha)) /
         tgamma(0.5 * alpha);
}

// beta_{alpha,d}: constant of the kernel K with K*K = |x|^{-alpha}.
inline double riesz_sqrt_kernel_constant(double alpha, int d) {
  return std::pow(kPi, -0.25 * d) * tgamma(0.25 * (d + alpha)) / tgamma(0.25 * (d - alpha)) *
         std::sqrt(tgamma(0.5 * (d - alpha)) / tgamma(0.5 * alpha));
}

namespace detail {

// Euclidean norms of consecutive coordinate blocks of v.
template <class Fn>
void for_each_block(const NoiseSpec& spec, std::span<const double> v, Fn&& fn) {
  require(static_cast<int>(v.size()) == spec.dim(), ErrorKind::InvalidParams,
          "vector length does not match noise dimension");
  std::size_t off = 0;
  for (const auto& blk : spec.blocks()) {
    double s = 0.0;
    for (int j = 0; j < blk.dim; ++j) s += v[off + j] * v[off + j];
    off += blk.dim;
    const double norm = std::sqrt(s);
    require(norm > 0.0, ErrorKind::BlockAtOrigin, "argument vanishes on a partition block");
    fn(blk, norm);
  }
}

}  // namespace detail

inline double gamma_eval(const NoiseSpec& spec, std::span<const double> x) {
  require(!spec.is_white(), ErrorKind::WhiteNoisePointwise,
          "white noise correlation is a delta and has no pointwise value");
  double v = 1.0;
  detail::for_each_block(spec, x, [&](const RieszBlock& b, double n) { v *= std::pow(n, -b.alpha); });
  return v;
}

inline double phi_eval(const NoiseSpec& spec, std::span<const double> xi) {
  if (spec.is_white()) {
    require(xi.size() == 1, ErrorKind::InvalidParams, "white noise lives on R^1");
    return 1.0 / (2.0 * kPi);
  }
  double v = 1.0;
  detail::for_each_block(spec, xi, [&](const RieszBlock& b, double n) {
    v *= riesz_spectral_constant(b.alpha, b.dim) * std::pow(n, -(b.dim - b.alpha));
  });
  return v;
}

inline double k_kernel_eval(const NoiseSpec& spec, std::span<const double> x) {
  require(!spec.is_white(), ErrorKind::WhiteNoisePointwise,
          "white noise has no pointwise square-root kernel");
  double v = 1.0;
  detail::for_each_block(spec, x, [&](const RieszBlock& b, double n) {
    v *= riesz_sqrt_kernel_constant(b.alpha, b.dim) * std::pow(n, -0.5 * (b.dim + b.alpha));
  });
  return v;
}

// Integral of phi over the unit sphere S^{d-1}.  phi is homogeneous of degree
// -(d-alpha), so for any radial h:
//   integral h(|xi|) phi(xi) dxi = angular * integral_0^inf h(s) s^{alpha-1} ds.
// The block product is handled with the Gaussian moment trick.
inline double spectral_angular_factor(const NoiseSpec& spec) {
  if (spec.is_white()) return sphere_area(1) / (2.0 * kPi);
  double num = 1.0;
  for (const auto& b : spec.blocks()) {
    num *= riesz_spectral_constant(b.alpha, b.dim) * 0.5 * sphere_area(b.dim) *
           tgamma(0.5 * b.alpha);
  }
  return 2.0 * num / tgamma(0.5 * spec.alpha_total());
}

// |A_R|^{-alpha/d} * integral over A_R of phi, with A_R the product of the
// radius-R balls of the blocks.  Independent of R.
inline double weak_norm_at_radius(const NoiseSpec& spec, double radius) {
  require(!spec.is_white(), ErrorKind::WhiteNoisePointwise, "weak norm needs a Riesz density");
  require(radius > 0.0, ErrorKind::InvalidParams, "radius must be > 0");
  const double q_inv = spec.alpha_total() / spec.dim();
  double mass = 1.0;
  double volume = 1.0;
  for (const auto& b : spec.blocks()) {
    const double area = sphere_area(b.dim);
    mass *= riesz_spectral_constant(b.alpha, b.dim) * area * std::pow(radius, b.alpha) / b.alpha;
    volume *= area * std::pow(radius, b.dim) / b.dim;
  }
  return std::pow(volume, -q_inv) * mass;
}

inline double weak_norm_phi(const NoiseSpec& spec) {
  require(!spec.is_white(), ErrorKind::WhiteNoisePointwise, "weak norm needs a Riesz density");
  const double q_inv = spec.alpha_total() / spec.dim();
  double v = 1.0;
  for (const auto& b : spec.blocks()) {
    v *= riesz_spectral_constant(b.alpha, b.dim) / b.alpha *
         std::pow(sphere_area(b.dim), 1.0 - q_inv) * std::pow(static_cast<double>(b.dim), q_inv);
  }
  return v;
}

}  // namespace spde
