#ifndef NLEACH_TRANSFER_HPP
#define NLEACH_TRANSFER_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace nleach {

/// Gompertz yield response to nitrogen application,
///   f(n) = a * exp(-b * c^n)   [kg/ha as a function of kg N/ha],
/// saturating at the ceiling `a`. Strictly increasing for b > 0, 0 < c < 1.
struct TransferFunction {
  double a = 0.0;  ///< yield asymptote, kg/ha
  double b = 0.0;  ///< shape, > 0
  double c = 0.0;  ///< decay base, in (0, 1); c == 1 degenerates to a flat curve

  /// Returns an empty string when the invariants hold, else a description.
  std::string invariant_error() const {
    if (!(a > 0.0)) return "transfer asymptote a must be > 0";
    if (!(b > 0.0)) return "transfer shape b must be > 0";
    if (!(c > 0.0 && c < 1.0)) return "transfer base c must be in (0,1)";
    return {};
  }
};

struct YieldDerivatives {
  double f;    ///< yield, kg/ha
  double fp;   ///< d(yield)/dn
  double fpp;  ///< d2(yield)/dn2
};

inline double yield_at(const TransferFunction& tf, double n) {
  if (n < 0.0) throw std::domain_error("yield_at: negative N rate");
  return tf.a * std::exp(-tf.b * std::pow(tf.c, n));
}

/// Closed-form first and second derivatives of the Gompertz curve. The
/// curvature changes sign where b*c^n = 1: below the baseline-calibrated
/// range the curve is convex, beyond it concave (diminishing returns).
inline YieldDerivatives yield_derivatives(const TransferFunction& tf, double n) {
  if (n < 0.0) throw std::domain_error("yield_derivatives: negative N rate");
  const double lc = std::log(tf.c);
  const double k = tf.b * std::pow(tf.c, n);
  const double f = tf.a * std::exp(-k);
  const double fp = f * (-k) * lc;
  const double fpp = f * (-k) * lc * lc * (1.0 - k);
  return {f, fp, fpp};
}

/// Extra crop output per extra unit of N, tons output per ton N applied.
/// Both yield and rate are per-hectare, so the kg/kg slope is already the
/// tons-per-ton figure.
inline double marginal_product(const TransferFunction& tf, double n) {
  return yield_derivatives(tf, n).fp;
}

inline constexpr double kCurvatureFloor = 1e-12;

/// Elasticity of substitution between land and N fertilizer implied by the
/// yield curve at rate n, treating output as F(L,N) = L * f(N/L):
///   sigma = f'(n) * [f(n) - n f'(n)] / (-n f''(n) f(n)).
/// Positive wherever returns diminish and the marginal product of land is
/// still positive. Near the curve's inflection the curvature vanishes and
/// the expression blows up; callers should treat that as degenerate.
inline double sigma_land_n(const TransferFunction& tf, double n,
                           double curvature_floor = kCurvatureFloor) {
  if (!(n > 0.0)) throw std::domain_error("sigma_land_n: N rate must be > 0");
  const auto d = yield_derivatives(tf, n);
  if (std::abs(d.fpp) < curvature_floor) {
    throw std::domain_error("sigma_land_n: degenerate curvature");
  }
  return d.fp * (d.f - n * d.fp) / (-n * d.fpp * d.f);
}

}  // namespace nleach

#endif
