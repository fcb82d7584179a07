#pragma once

// Importance sampler for spectral integrals against mu(d xi) = phi(xi) d xi.
//
// Block i of xi is drawn from the density proportional to
//   phi_i(xi_i) (1 + c |xi_i|^a)^{-e_i},   c = nu/2,  e_i = 2 alpha_i / alpha,
// so the exponents add up to 2 and the weight phi/q grows like
// (1 + c|xi|^a)^2 at most.  With one block and n = 1 the weighted integrand of
// C_mu is constant.  The radial coordinate v = c |xi_i|^a is beta-prime
// distributed and is drawn by inverting the regularized incomplete beta.

#include <cmath>
#include <span>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "spde/errors.hpp"
#include "spde/model.hpp"
#include "spde/numerics.hpp"
#include "spde/random.hpp"

namespace spde {

inline void require_integrable(const EquationParams& p, double alpha) {
  if (!(2.0 * p.a() > alpha)) {
    throw Error(ErrorKind::Divergent,
                "spectral integrals diverge unless 2a > alpha (got a=" + std::to_string(p.a()) +
                    ", alpha=" + std::to_string(alpha) + ")");
  }
}

class SpectralSampler {
 public:
  SpectralSampler(const EquationParams& p, const NoiseSpec& spec) : a_(p.a()), c_(p.resolvent_coeff()) {
    require_compatible(p, spec);
    require_integrable(p, spec.alpha_total());
    const double alpha = spec.alpha_total();
    auto add = [&](int dim, double alpha_i, double spectral_const) {
      Block b;
      b.dim = dim;
      b.exponent = 2.0 * alpha_i / alpha;
      b.shape_p = alpha_i / a_;
      b.shape_q = b.exponent - b.shape_p;
      b.norm = spectral_const * sphere_area(dim) / a_ * std::pow(c_, -b.shape_p) *
               beta_fn(b.shape_p, b.shape_q);
      blocks_.push_back(b);
      dim_ += dim;
    };
    if (spec.is_white()) {
      add(1, 1.0, 1.0 / (2.0 * kPi));
    } else {
      for (const auto& blk : spec.blocks()) {
        add(blk.dim, blk.alpha, riesz_spectral_constant(blk.alpha, blk.dim));
      }
    }
  }

  int dim() const { return dim_; }

  // Fills xi (length dim()) and returns the weight phi(xi) / q(xi).
  double draw(Rng& rng, std::span<double> xi) const {
    double weight = 1.0;
    std::size_t off = 0;
    for (const auto& b : blocks_) {
      const double u = uniform01(rng);
      double v;
      if (u < 0.5) {
        const double x = boost::math::ibeta_inv(b.shape_p, b.shape_q, u);
        v = x / (1.0 - x);
      } else {
        const double y = boost::math::ibeta_inv(b.shape_q, b.shape_p, 1.0 - u);
        v = (1.0 - y) / y;
      }
      const double radius = std::pow(v / c_, 1.0 / a_);
      if (b.dim == 1) {
        xi[off] = uniform01(rng) < 0.5 ? -radius : radius;
      } else {
        double s = 0.0;
        for (int j = 0; j < b.dim; ++j) {
          xi[off + j] = standard_normal(rng);
          s += xi[off + j] * xi[off + j];
        }
        const double scale = radius / std::sqrt(s);
        for (int j = 0; j < b.dim; ++j) xi[off + j] *= scale;
      }
      weight *= b.norm * std::pow(1.0 + v, b.exponent);
      off += b.dim;
    }
    return weight;
  }

  // phi(xi)/q(xi) at a given point.
  double weight(std::span<const double> xi) const {
    double w = 1.0;
    std::size_t off = 0;
    for (const auto& b : blocks_) {
      double s = 0.0;
      for (int j = 0; j < b.dim; ++j) s += xi[off + j] * xi[off + j];
      w *= b.norm * std::pow(1.0 + c_ * std::pow(std::sqrt(s), a_), b.exponent);
      off += b.dim;
    }
    return w;
  }

 private:
  struct Block {
    int dim = 1;
    double exponent = 0.0;
    double shape_p = 0.0;
    double shape_q = 0.0;
    double norm = 0.0;  // integral of phi_i (1 + c|xi_i|^a)^{-e_i}
  };
  double a_;
  double c_;
  int dim_ = 0;
  std::vector<Block> blocks_;
};

}  // namespace spde
