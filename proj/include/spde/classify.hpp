#pragma once

// Nonnegativity of the fundamental solution and the solvability regime.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "spde/errors.hpp"
#include "spde/model.hpp"

namespace spde {

struct NonnegativityStatus {
  int group = 0;  // 1..3 when a sufficient condition holds, 0 = Unknown
  std::string note;

  bool known() const { return group != 0; }
};

inline NonnegativityStatus check_nonnegativity(const EquationParams& p) {
  const double a = p.a(), b = p.b(), r = p.r();
  const int d = p.d();
  if (p.formal_wave()) {
    return {0, "formal wave limit b=2: no group applies (classical SWE kernel is nonnegative for d<=3)"};
  }
  if (b > 0.0 && b <= 1.0) return {1, ""};
  if (d >= 1 && d <= 3 && 1.0 < b && b < a && r > 0.0) return {2, ""};
  if (d >= 1 && d <= 3 && 1.0 < b && b == a && a < 2.0 && r > 0.5 * (d + 3) - b) return {3, ""};
  return {0, ""};
}

enum class Regime { GlobalLp, GlobalBoundaryWhite1D, LocalLp, NoL2PerFigures, NotCovered };

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::GlobalLp: return "GlobalLp";
    case Regime::GlobalBoundaryWhite1D: return "GlobalBoundaryWhite1D";
    case Regime::LocalLp: return "LocalLp";
    case Regime::NoL2PerFigures: return "NoL2PerFigures";
    case Regime::NotCovered: return "NotCovered";
  }
  return "?";
}

// How the noise enters the classification.  WhiteLimit is the alpha = d
// white-noise point for d >= 2, which has no NoiseSpec; only sweeps use it.
enum class NoiseClass { Riesz, White1D, WhiteLimit };

constexpr std::string_view to_string(NoiseClass c) {
  switch (c) {
    case NoiseClass::Riesz: return "riesz";
    case NoiseClass::White1D: return "white1d";
    case NoiseClass::WhiteLimit: return "white_limit";
  }
  return "?";
}

struct NoiseSummary {
  NoiseClass cls;
  double alpha;
  int d;

  static NoiseSummary of(const NoiseSpec& s) {
    return {s.is_white() ? NoiseClass::White1D : NoiseClass::Riesz, s.alpha_total(), s.dim()};
  }
  static NoiseSummary white_limit(int d) {
    require(d >= 1, ErrorKind::InvalidParams, "d must be >= 1");
    return {d == 1 ? NoiseClass::White1D : NoiseClass::WhiteLimit, static_cast<double>(d), d};
  }
};

struct ConditionCheck {
  std::string name;
  bool satisfied;
};

struct SolvabilityVerdict {
  Regime regime = Regime::NotCovered;
  double alpha = 0.0;
  double critical_alpha = 0.0;
  NonnegativityStatus nonnegativity;
  bool nonnegativity_warning = false;
  bool figure_level = false;  // phase-diagram reading only, no solvability guarantee behind it
  std::vector<ConditionCheck> trace;
};

namespace detail {
inline bool nearly_equal(double x, double y) {
  return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
}
}  // namespace detail

inline SolvabilityVerdict classify_solvability(const EquationParams& p, const NoiseSummary& noise) {
  require(noise.d == p.d(), ErrorKind::InvalidNoise, "noise dimension differs from d");
  SolvabilityVerdict v;
  v.alpha = noise.alpha;
  v.critical_alpha = p.critical_alpha();
  v.nonnegativity = check_nonnegativity(p);
  v.nonnegativity_warning = !v.nonnegativity.known();

  const double alpha = noise.alpha;
  const double crit = v.critical_alpha;
  const double d = p.d();
  const bool white_1d = noise.cls == NoiseClass::White1D && p.d() == 1;
  const bool r_small = p.r() >= 0.0 && p.r() <= 0.5;

  const bool below_crit = alpha < crit;
  const bool below_2a = alpha < 2.0 * p.a();
  const bool below_d = alpha < d;
  v.trace.push_back({"alpha > 0", alpha > 0.0});
  v.trace.push_back({"alpha < critical_alpha", below_crit});
  v.trace.push_back({"alpha < 2a", below_2a});
  v.trace.push_back({"alpha < d", below_d});

  if (alpha > 0.0 && below_crit && below_2a && below_d) {
    v.regime = Regime::GlobalLp;
    return v;
  }
  if (white_1d) {
    const bool ok = crit > 1.0 && 2.0 * p.a() > 1.0;
    v.trace.push_back({"white 1-d: critical_alpha > 1 and 2a > 1", ok});
    if (ok) {
      v.regime = Regime::GlobalBoundaryWhite1D;
      return v;
    }
  }
  const bool on_crit = detail::nearly_equal(alpha, crit);
  v.trace.push_back({"r in [0,1/2]", r_small});
  v.trace.push_back({"alpha == critical_alpha", on_crit});
  v.trace.push_back({"alpha <= d", alpha <= d || detail::nearly_equal(alpha, d)});
  if (r_small && on_crit && (alpha <= d || detail::nearly_equal(alpha, d))) {
    v.regime = Regime::LocalLp;
    return v;
  }
  v.figure_level = true;
  v.regime = (alpha > crit && r_small) ? Regime::NoL2PerFigures : Regime::NotCovered;
  return v;
}

inline SolvabilityVerdict classify_solvability(const EquationParams& p, const NoiseSpec& spec) {
  require_compatible(p, spec);
  return classify_solvability(p, NoiseSummary::of(spec));
}

// T_p = nu^{alpha/a} / (2 theta (p-1) M^{(2a-alpha)/a}).
inline double critical_time(const EquationParams& prm, const NoiseSummary& noise, double p,
                            double m_const) {
  require(p >= 2.0, ErrorKind::InvalidParams, "p must be >= 2");
  require(m_const > 0.0, ErrorKind::InvalidParams, "variational constant must be > 0");
  const auto v = classify_solvability(prm, noise);
  require(v.regime == Regime::LocalLp, ErrorKind::NotLocalRegime,
          "critical time is defined only in the local regime");
  const double a = prm.a(), alpha = noise.alpha;
  return std::pow(prm.nu(), alpha / a) /
         (2.0 * prm.theta() * (p - 1.0) * std::pow(m_const, (2.0 * a - alpha) / a));
}

inline double critical_time(const EquationParams& prm, const NoiseSpec& spec, double p,
                            double m_const) {
  require_compatible(prm, spec);
  return critical_time(prm, NoiseSummary::of(spec), p, m_const);
}

struct SweepPoint {
  EquationParams params;
  NoiseSummary noise;
};

struct SweepRow {
  EquationParams params;
  NoiseSummary noise;
  SolvabilityVerdict verdict;
};

inline std::vector<SweepRow> sweep_phase_diagram(const std::vector<SweepPoint>& grid) {
  require(!grid.empty(), ErrorKind::InvalidParams, "sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const auto& pt : grid) {
    rows.push_back({pt.params, pt.noise, classify_solvability(pt.params, pt.noise)});
  }
  return rows;
}

}  // namespace spde
