#ifndef NLEACH_BMP_HPP
#define NLEACH_BMP_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nleach {

/// Monthly hydrologic forcing for one grid cell: average subsurface drainage
/// rate (m/day) and air temperature (degrees C), January through December.
struct MonthlyClimate {
  std::array<double, 12> drainflow{};
  std::array<double, 12> air_temp{};

  std::string invariant_error() const {
    for (double q : drainflow) {
      if (q < 0.0 || !std::isfinite(q)) return "drainflow must be finite and >= 0";
    }
    for (double t : air_temp) {
      if (!std::isfinite(t)) return "air temperature must be finite";
    }
    return {};
  }

  double total_drainflow() const {
    double s = 0.0;
    for (double q : drainflow) s += q;
    return s;
  }
};

/// Seasonal controlled-drainage ratios (CD flow as percent of free-drained
/// flow). Field syntheses report one ratio per quarter; the defaults are the
/// seasonal means, and the table is configurable so medians can be swapped in.
struct CdrTable {
  double jan_mar = 36.4;
  double apr_jun = 57.2;
  double jul_sep = 54.8;
  double oct_dec = 81.7;

  double for_month(int month) const {  // month in [0, 12)
    if (month < 3) return jan_mar;
    if (month < 6) return apr_jun;
    if (month < 9) return jul_sep;
    return oct_dec;
  }

  std::string invariant_error() const {
    for (double v : {jan_mar, apr_jun, jul_sep, oct_dec}) {
      if (!(v > 0.0 && v <= 100.0)) return "CDR entries must be in (0,100]";
    }
    return {};
  }
};

/// Tanks-in-series wetland retention parameters.
struct WetlandParams {
  int n_tanks = 1;       ///< tanks in series; 1 reproduces the calibrated model
  double theta = 1.09;   ///< temperature rate coefficient, [1.0, 1.09]
  double k_den = 0.15;   ///< denitrification rate constant, m/day, [0.09, 0.15]
  double f_w = 0.005;    ///< wetland-to-cropland area ratio, (0,1)

  std::string invariant_error() const {
    if (n_tanks < 1) return "n_tanks must be >= 1";
    if (!(theta >= 1.0 && theta <= 1.09)) return "theta must be in [1.0, 1.09]";
    if (!(k_den >= 0.09 && k_den <= 0.15)) return "k_den must be in [0.09, 0.15]";
    if (!(f_w > 0.0 && f_w < 1.0)) return "f_w must be in (0,1)";
    return {};
  }
};

/// Annual controlled-drainage nitrate load as a percent of the free-drained
/// load: the drainflow-weighted average of the seasonal CD/FD ratios. Months
/// without drainflow carry no weight.
inline double cd_load_adjustment(const MonthlyClimate& climate,
                                 const CdrTable& cdr = {}) {
  double num = 0.0, den = 0.0;
  for (int m = 0; m < 12; ++m) {
    const double q = climate.drainflow[static_cast<std::size_t>(m)];
    if (q <= 0.0) continue;
    num += q * cdr.for_month(m);
    den += q;
  }
  if (den <= 0.0) {
    throw std::domain_error("cd_load_adjustment: no drainage in any month");
  }
  return num / den;
}

/// Monthly areal removal-rate constant, m/day. Water temperature is taken as
/// the air temperature clamped at 0 C for shallow wetlands.
inline double wetland_rate_constant(double t_air, const WetlandParams& p = {}) {
  const double t_water = t_air > 0.0 ? t_air : 0.0;
  return p.k_den * std::pow(p.theta, t_water - 20.0);
}

/// Per-month fraction of influent nitrate load that passes a treatment
/// wetland under the tanks-in-series model, given the cropland drainage rate
/// q (m/day). The hydraulic loading rate is (1-f_w)/f_w * q, so the factor is
///   (1 + K*f_w / (N*(1-f_w)*q))^(-N).
inline double wetland_monthly_retention(double q, double rate_constant,
                                        const WetlandParams& p = {}) {
  if (!(q > 0.0)) {
    throw std::domain_error("wetland_monthly_retention: drainage must be > 0");
  }
  const double x =
      rate_constant * p.f_w / (static_cast<double>(p.n_tanks) * (1.0 - p.f_w) * q);
  return std::pow(1.0 + x, -static_cast<double>(p.n_tanks));
}

/// Annual wetland-treated nitrate load as a percent of the influent load.
/// Inflow concentration is assumed constant across months, so monthly loads
/// weight by drainflow; zero-drainflow months drop from both sums.
inline double wetland_load_adjustment(const MonthlyClimate& climate,
                                      const WetlandParams& p = {}) {
  double num = 0.0, den = 0.0;
  for (int m = 0; m < 12; ++m) {
    const double q = climate.drainflow[static_cast<std::size_t>(m)];
    if (q <= 0.0) continue;
    const double k = wetland_rate_constant(climate.air_temp[static_cast<std::size_t>(m)], p);
    num += q * wetland_monthly_retention(q, k, p);
    den += q;
  }
  if (den <= 0.0) {
    throw std::domain_error("wetland_load_adjustment: no drainage in any month");
  }
  return 100.0 * num / den;
}

/// Multiplier on a cell's leached mass when a share of its area is treated:
/// the treated share keeps adjustment/100 of its load, the rest keeps all of
/// it. Which suitability fraction applies is the caller's policy decision.
inline double load_multiplier(double suitable_fraction, double adoption,
                              double adjustment_percent) {
  if (adoption < 0.0 || adoption > 1.0) {
    throw std::domain_error("load_multiplier: adoption must be in [0,1]");
  }
  const double treated = suitable_fraction * adoption;
  return treated * (adjustment_percent / 100.0) + (1.0 - treated);
}

}  // namespace nleach

#endif
