#ifndef NLEACH_LEACHING_HPP
#define NLEACH_LEACHING_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nleach {

/// Quadratic leaching response L(n) = alpha*n + beta*n^2 (kg N leached per ha
/// as a function of kg N applied per ha), valid over [0, n_max].
struct LeachingResponse {
  double alpha = 0.0;   ///< linear coefficient, dimensionless
  double beta = 0.0;    ///< quadratic coefficient, per (kg/ha)
  double n_max = 0.0;   ///< declared operating range upper bound, kg/ha

  std::string invariant_error() const {
    if (!(n_max > 0.0)) return "leaching operating range n_max must be > 0";
    if (alpha < 0.0) return "leaching alpha must be >= 0";
    // L(n)/n = alpha + beta*n must stay within [0,1] across the range.
    const double lo = std::min(alpha, alpha + beta * n_max);
    const double hi = std::max(alpha, alpha + beta * n_max);
    if (lo < 0.0 || hi > 1.0) {
      return "leaching intensity leaves [0,1] on [0, n_max]";
    }
    return {};
  }
};

/// Nationwide uniform tax per ton of N leached. Cells pay it scaled by their
/// own leaching intensity, so leaky soils face the higher fertilizer cost.
struct LeachingTax {
  double rate = 0.0;  ///< currency per ton N leached

  std::string invariant_error() const {
    return rate >= 0.0 ? std::string{} : "tax rate must be >= 0";
  }
};

struct ClampCounter {
  std::uint64_t low = 0;
  std::uint64_t high = 0;
  std::uint64_t total() const { return low + high; }
};

/// Internal evaluation without the range precondition; clamps the quadratic
/// to the physical band [0, n] and counts when the clamp fires.
inline double leaching_rate_raw(const LeachingResponse& lr, double n,
                                ClampCounter* clamps = nullptr) {
  const double raw = lr.alpha * n + lr.beta * n * n;
  if (raw < 0.0) {
    if (clamps) ++clamps->low;
    return 0.0;
  }
  if (raw > n) {
    if (clamps) ++clamps->high;
    return n;
  }
  return raw;
}

/// Leached mass per hectare at application rate n, kg/ha.
inline double leaching_rate(const LeachingResponse& lr, double n,
                            ClampCounter* clamps = nullptr) {
  if (n < 0.0 || n > lr.n_max) {
    throw std::domain_error("leaching_rate: N rate outside operating range [0, " +
                            std::to_string(lr.n_max) + "]");
  }
  return leaching_rate_raw(lr, n, clamps);
}

/// Ratio of N leached to N applied, in [0,1].
inline double leaching_intensity(const LeachingResponse& lr, double n,
                                 ClampCounter* clamps = nullptr) {
  if (!(n > 0.0)) {
    throw std::domain_error("leaching_intensity: undefined at n = 0");
  }
  return leaching_rate(lr, n, clamps) / n;
}

/// Grid-effective fertilizer price: the national price plus the tax wedge
/// theta * rate, where theta is the cell's leaching intensity.
inline double effective_n_price(double national_price, double theta,
                                const LeachingTax& tax) {
  if (theta < 0.0 || theta > 1.0) {
    throw std::domain_error("effective_n_price: theta must be in [0,1]");
  }
  return national_price + theta * tax.rate;
}

}  // namespace nleach

#endif
