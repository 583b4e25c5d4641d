#ifndef NLEACH_CALIBRATION_HPP
#define NLEACH_CALIBRATION_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nleach/grid.hpp"
#include "nleach/leaching.hpp"
#include "nleach/transfer.hpp"

namespace nleach {

/// Two-input CES nest in calibrated share form. Prices and quantities are
/// indices relative to the calibration point, so the baseline is (1,1) -> 1
/// by construction. share2 = 1 - share1 exactly.
struct CesNest {
  double share1 = 0.5;
  double sigma = 0.5;

  double share2() const { return 1.0 - share1; }

  /// Unit cost index given child price indices. Switches to the
  /// Cobb-Douglas limit at sigma = 1.
  double unit_cost(double p1, double p2) const {
    if (std::abs(sigma - 1.0) < 1e-12) {
      return std::pow(p1, share1) * std::pow(p2, share2());
    }
    const double e = 1.0 - sigma;
    const double t = share1 * std::pow(p1, e) + share2() * std::pow(p2, e);
    return std::pow(t, 1.0 / e);
  }

  /// Demand index for a child per unit of nest output: (c / p_i)^sigma.
  double demand1(double p1, double p2) const {
    return std::pow(unit_cost(p1, p2) / p1, sigma);
  }
  double demand2(double p1, double p2) const {
    return std::pow(unit_cost(p1, p2) / p2, sigma);
  }

  /// Value share of child 1 at the given price indices; this is also
  /// d ln(cost) / d ln(p1).
  double value_share1(double p1, double p2) const {
    if (std::abs(sigma - 1.0) < 1e-12) return share1;
    const double e = 1.0 - sigma;
    const double t1 = share1 * std::pow(p1, e);
    const double t2 = share2() * std::pow(p2, e);
    return t1 / (t1 + t2);
  }
};

/// Calibrated per-practice production structure for one cell. Nesting:
/// irrigated output = CES(CES(CES(land, water), nonland), fertilizer),
/// rainfed skips the land-water layer. All quantities are baseline levels;
/// the nests carry baseline value shares so demands at baseline prices
/// reproduce these levels exactly.
struct FarmTechnology {
  std::size_t cell_index = 0;
  Practice practice = Practice::rainfed;
  long cell_id = 0;

  double output0 = 0.0;   ///< tons
  double land0 = 0.0;     ///< ha
  double rent0 = 0.0;     ///< currency per ha
  double water0 = 0.0;    ///< index units; 0 for rainfed
  double wrent0 = 0.0;
  double nonland0 = 0.0;  ///< index units
  double mprice0 = 0.0;
  double n0 = 0.0;        ///< tons N
  double nprice0 = 0.0;   ///< currency per ton
  double crop_price0 = 0.0;

  double n_rate0 = 0.0;   ///< kg/ha
  double theta0 = 0.0;    ///< baseline leaching intensity, tax wedge basis
  LeachingResponse leach{};

  CesNest top;  ///< (augmented land, fertilizer); share1 = augmented land
  CesNest mid;  ///< (land-water composite | land, nonland); share1 = composite
  CesNest bot;  ///< (land, water); irrigated only; share1 = land

  bool sigma_fell_back = false;

  bool has_water() const { return water0 > 0.0; }
};

struct CellTechnology {
  std::optional<FarmTechnology> irrigated;
  std::optional<FarmTechnology> rainfed;
};

struct CalibrationStats {
  int farms = 0;
  int sigma_fallbacks = 0;
};

/// Immutable calibrated economy: the baseline plus one technology per active
/// (cell, practice) pair and fixed-order baseline aggregates.
struct CalibratedEconomy {
  BaselineEconomy base;
  std::vector<FarmTechnology> farms;
  CalibrationStats stats;

  double total_output0 = 0.0;
  double total_n0 = 0.0;
  double total_nonland0 = 0.0;
  double total_leach0 = 0.0;  ///< tons at baseline rates (clamped responses)
};

/// Top-nest substitution elasticity from the yield curve at the baseline
/// rate, with the documented fallback when the curvature degenerates or the
/// implied value leaves a usable range.
inline double top_sigma(const PracticeBaseline& pb, const EconomyParams& params,
                        bool* fell_back) {
  *fell_back = false;
  double sigma;
  try {
    sigma = sigma_land_n(pb.tf, pb.n_rate);
  } catch (const std::domain_error&) {
    *fell_back = true;
    return params.sigma_fallback;
  }
  if (!std::isfinite(sigma) || sigma <= 0.0 || sigma > 10.0) {
    *fell_back = true;
    return params.sigma_fallback;
  }
  return sigma;
}

inline FarmTechnology calibrate_farm(const GridCell& cell, Practice practice,
                                     const EconomyParams& params,
                                     std::size_t cell_index) {
  const PracticeBaseline& pb = cell.practice(practice);
  const std::string tag =
      "cell " + std::to_string(cell.cell_id) + " [" + practice_name(practice) + "]";
  if (!pb.active() || !(pb.n_rate > 0.0) || !(pb.yield_kg_ha > 0.0)) {
    throw std::runtime_error(tag + ": zero baseline quantity for a required input");
  }

  FarmTechnology f;
  f.cell_index = cell_index;
  f.practice = practice;
  f.cell_id = cell.cell_id;

  const double ms = params.money_scale;
  f.crop_price0 = params.crop_price * ms;
  f.nprice0 = params.n_price * ms;
  f.output0 = pb.yield_kg_ha * pb.area_ha / 1000.0;
  f.n0 = pb.n_rate * pb.area_ha / 1000.0;
  f.n_rate0 = pb.n_rate;
  f.leach = pb.leach;
  f.theta0 = leaching_intensity(pb.leach, pb.n_rate);

  const double revenue = f.crop_price0 * f.output0;
  const double n_cost = f.nprice0 * f.n0;
  if (!(n_cost < revenue)) {
    throw std::runtime_error(tag + ": baseline N cost exhausts revenue; cannot "
                             "calibrate a positive land share");
  }
  const double rest = revenue - n_cost;
  const bool irrigated = practice == Practice::irrigated;
  const double water_cost = irrigated ? params.water_revenue_share * rest : 0.0;
  const double nonland_cost = params.nonland_revenue_share * rest;
  const double land_cost = rest - water_cost - nonland_cost;

  f.land0 = pb.area_ha;
  f.rent0 = land_cost / f.land0;
  f.wrent0 = ms;
  f.water0 = water_cost / ms;
  f.mprice0 = ms;
  f.nonland0 = nonland_cost / ms;

  f.top.sigma = top_sigma(pb, params, &f.sigma_fell_back);
  f.top.share1 = rest / revenue;  // augmented land composite
  f.mid.sigma = params.sigma_composite_nonland;
  f.mid.share1 = (land_cost + water_cost) / rest;
  f.bot.sigma = params.sigma_land_water;
  f.bot.share1 = irrigated ? land_cost / (land_cost + water_cost) : 1.0;
  return f;
}

inline CellTechnology calibrate_cell(const GridCell& cell,
                                     const EconomyParams& params,
                                     std::size_t cell_index = 0) {
  CellTechnology tech;
  if (cell.irrigated.active()) {
    tech.irrigated = calibrate_farm(cell, Practice::irrigated, params, cell_index);
  }
  if (cell.rainfed.active()) {
    tech.rainfed = calibrate_farm(cell, Practice::rainfed, params, cell_index);
  }
  return tech;
}

inline CalibratedEconomy calibrate(const BaselineEconomy& econ) {
  const std::string perr = econ.params.invariant_error();
  if (!perr.empty()) throw std::runtime_error("economy params: " + perr);
  CalibratedEconomy cal;
  cal.base = econ;
  for (std::size_t i = 0; i < cal.base.cells.size(); ++i) {
    const GridCell& cell = cal.base.cells[i];
    for (Practice p : {Practice::irrigated, Practice::rainfed}) {
      if (!cell.practice(p).active()) continue;
      cal.farms.push_back(calibrate_farm(cell, p, econ.params, i));
      ++cal.stats.farms;
      if (cal.farms.back().sigma_fell_back) ++cal.stats.sigma_fallbacks;
    }
  }
  if (cal.farms.empty()) {
    throw std::runtime_error("calibrate: economy has no active farms");
  }
  // Fixed-order aggregates; these anchor the market supply/demand curves.
  for (const auto& f : cal.farms) {
    cal.total_output0 += f.output0;
    cal.total_n0 += f.n0;
    cal.total_nonland0 += f.nonland0;
    cal.total_leach0 +=
        leaching_rate_raw(f.leach, f.n_rate0) * f.land0 / 1000.0;
  }
  return cal;
}

/// Baseline cost shares per nest, for reporting.
struct NestShareReport {
  std::string nest;
  std::string child1, child2;
  double share1 = 0.0, share2 = 0.0;
  double sigma = 0.0;
};

inline std::vector<NestShareReport> cost_shares(const FarmTechnology& f) {
  std::vector<NestShareReport> out;
  out.push_back({"output", "augmented_land", "fertilizer", f.top.share1,
                 f.top.share2(), f.top.sigma});
  if (f.has_water()) {
    out.push_back({"augmented_land", "land_water", "nonland", f.mid.share1,
                   f.mid.share2(), f.mid.sigma});
    out.push_back({"land_water", "land", "water", f.bot.share1, f.bot.share2(),
                   f.bot.sigma});
  } else {
    out.push_back({"augmented_land", "land", "nonland", f.mid.share1,
                   f.mid.share2(), f.mid.sigma});
  }
  return out;
}

}  // namespace nleach

#endif
