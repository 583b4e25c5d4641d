#ifndef NLEACH_SCENARIO_HPP
#define NLEACH_SCENARIO_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nleach/bmp.hpp"
#include "nleach/calibration.hpp"
#include "nleach/grid.hpp"
#include "nleach/leaching.hpp"

namespace nleach {

/// Leaching tax, either as an explicit rate (currency per ton leached) or as
/// a target percent rise in the baseline-leaching-weighted average effective
/// fertilizer price, resolved by root finding against a calibrated economy.
struct TaxPolicy {
  std::optional<double> rate;
  std::optional<double> target_cost_increase_percent;
};

/// Fertilizer-augmenting technical change: effective N input is
/// (1 + gain) times physical N in every cell's top nest.
struct EfficiencyPolicy {
  double gain = 0.10;
};

struct CdPolicy {
  double adoption = 1.0;
  double farmer_cost_share = 0.5;
  double cost_per_ha = 30.0;  ///< annualized, currency per treated ha
};

enum class WetlandVariant {
  tile_drained_only,  ///< wetlands only where tile drainage already exists
  anywhere            ///< hydric-soil suitability alone decides
};

struct WetlandPolicy {
  WetlandVariant variant = WetlandVariant::tile_drained_only;
  double adoption = 1.0;
  double farmer_cost_share = 0.5;
  double cost_per_ha = 55.0;       ///< annualized, currency per treated ha
  double land_take_ratio = 0.0225;  ///< restored wetland + buffer per treated ha
};

/// Declarative policy bundle; components are independent shocks that the
/// solver applies together.
struct PolicyScenario {
  std::string label = "null";
  std::optional<TaxPolicy> tax;
  std::optional<EfficiencyPolicy> efficiency;
  std::optional<CdPolicy> cd;
  std::optional<WetlandPolicy> wetland;

  bool is_null() const {
    return !tax && !efficiency && !cd && !wetland;
  }
};

inline PolicyScenario scenario_A(double target_cost_increase_percent) {
  if (target_cost_increase_percent < 0.0) {
    throw std::invalid_argument("scenario_A: target cost increase must be >= 0");
  }
  PolicyScenario s;
  s.label = "A";
  if (target_cost_increase_percent > 0.0) {
    s.tax = TaxPolicy{std::nullopt, target_cost_increase_percent};
  }
  return s;
}

inline PolicyScenario scenario_A_rate(double rate) {
  PolicyScenario s;
  s.label = "A";
  s.tax = TaxPolicy{rate, std::nullopt};
  return s;
}

inline PolicyScenario scenario_B(double gain) {
  if (gain < 0.0) throw std::invalid_argument("scenario_B: gain must be >= 0");
  PolicyScenario s;
  s.label = "B";
  if (gain > 0.0) s.efficiency = EfficiencyPolicy{gain};
  return s;
}

inline PolicyScenario scenario_C(double adoption, double farmer_share,
                                 double cost_per_ha) {
  if (adoption < 0.0 || adoption > 1.0 || farmer_share < 0.0 || farmer_share > 1.0) {
    throw std::invalid_argument("scenario_C: fractions must be in [0,1]");
  }
  PolicyScenario s;
  s.label = "C";
  if (adoption > 0.0) s.cd = CdPolicy{adoption, farmer_share, cost_per_ha};
  return s;
}

inline PolicyScenario scenario_D(WetlandVariant variant, double adoption,
                                 double farmer_share, double cost_per_ha,
                                 double land_take_ratio = 0.0225) {
  if (adoption < 0.0 || adoption > 1.0 || farmer_share < 0.0 || farmer_share > 1.0) {
    throw std::invalid_argument("scenario_D: fractions must be in [0,1]");
  }
  PolicyScenario s;
  s.label = variant == WetlandVariant::tile_drained_only ? "D" : "D*";
  if (adoption > 0.0) {
    s.wetland = WetlandPolicy{variant, adoption, farmer_share, cost_per_ha,
                              land_take_ratio};
  }
  return s;
}

/// Merges compatible bundles. Each component may appear at most once across
/// the inputs; in particular the two wetland variants cannot be combined.
inline PolicyScenario combine(const std::vector<PolicyScenario>& parts) {
  if (parts.empty()) throw std::invalid_argument("combine: empty scenario list");
  PolicyScenario out;
  out.label.clear();
  for (const auto& s : parts) {
    if (!out.label.empty()) out.label += "+";
    out.label += s.label;
    auto merge = [&](auto& dst, const auto& src, const char* what) {
      if (!src) return;
      if (dst) {
        throw std::invalid_argument(std::string("combine: incompatible bundle, "
                                                "duplicate ") + what);
      }
      dst = src;
    };
    merge(out.tax, s.tax, "tax component");
    merge(out.efficiency, s.efficiency, "efficiency component");
    merge(out.cd, s.cd, "controlled drainage component");
    merge(out.wetland, s.wetland, "wetland component");
  }
  if (out.is_null()) out.label = "null";
  return out;
}

/// Baseline-leaching-weighted average effective N price rise, in percent,
/// at a given tax rate.
inline double average_cost_wedge_percent(const CalibratedEconomy& econ,
                                         double tax_rate) {
  double wsum = 0.0, twsum = 0.0;
  for (const auto& f : econ.farms) {
    const double w = leaching_rate_raw(f.leach, f.n_rate0) * f.land0 / 1000.0;
    wsum += w;
    twsum += w * f.theta0 / f.nprice0;
  }
  if (!(wsum > 0.0)) {
    throw std::runtime_error("average_cost_wedge_percent: no baseline leaching");
  }
  return 100.0 * tax_rate * twsum / wsum;
}

/// Tax rate whose baseline-average cost wedge equals the target percent.
/// The wedge is monotone in the rate, so bisection on an expanding bracket.
inline double resolve_tax_rate(const CalibratedEconomy& econ,
                               double target_percent) {
  if (!(target_percent > 0.0)) return 0.0;
  double hi = econ.farms.front().nprice0;  // order of the N price itself
  int expand = 0;
  while (average_cost_wedge_percent(econ, hi) < target_percent) {
    hi *= 2.0;
    if (++expand > 60) {
      throw std::runtime_error("resolve_tax_rate: bracket failure, wedge never "
                               "reaches target");
    }
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (average_cost_wedge_percent(econ, mid) < target_percent ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Scenario resolved against a calibrated economy: economy-wide shifters
/// plus one leaching multiplier, land-cost wedge and land take per farm.
struct ScenarioShocks {
  std::string label = "null";
  double tax_rate = 0.0;
  double n_augmentation = 1.0;   ///< effective N per physical N
  double tfp = 1.0;              ///< Hicks-neutral shifter (validation closure)
  std::vector<double> leach_multiplier;  ///< per farm, on leached mass
  std::vector<double> land_wedge;        ///< per farm, currency per ha
  std::vector<double> land_take;         ///< per farm, fraction of endowment

  bool uniform_null() const {
    return tax_rate == 0.0 && n_augmentation == 1.0 && tfp == 1.0;
  }
};

inline ScenarioShocks null_shocks(const CalibratedEconomy& econ) {
  ScenarioShocks s;
  s.leach_multiplier.assign(econ.farms.size(), 1.0);
  s.land_wedge.assign(econ.farms.size(), 0.0);
  s.land_take.assign(econ.farms.size(), 0.0);
  return s;
}

/// Applies suitability, adoption and the hydrologic load adjustments to each
/// farm. Treated fractions partition the farm's area; when controlled
/// drainage and wetlands are combined, wetlands claim their share first and
/// drainage treats only the remainder, so no hectare is double-treated.
inline ScenarioShocks resolve_scenario(const PolicyScenario& scenario,
                                       const CalibratedEconomy& econ,
                                       const WetlandParams& wp = {},
                                       const CdrTable& cdr = {}) {
  ScenarioShocks shocks = null_shocks(econ);
  shocks.label = scenario.label;
  // Config money inputs are in baseline currency; re-denominate along with
  // the calibrated prices so money_scale stays a pure unit change.
  const double ms = econ.base.params.money_scale;

  if (scenario.tax) {
    if (scenario.tax->rate) {
      shocks.tax_rate = *scenario.tax->rate * ms;
    } else if (scenario.tax->target_cost_increase_percent) {
      shocks.tax_rate =
          resolve_tax_rate(econ, *scenario.tax->target_cost_increase_percent);
    }
    if (shocks.tax_rate < 0.0) {
      throw std::invalid_argument("scenario: tax rate must be >= 0");
    }
  }
  if (scenario.efficiency) {
    shocks.n_augmentation = 1.0 + scenario.efficiency->gain;
  }

  const bool wants_bmp = scenario.cd.has_value() || scenario.wetland.has_value();
  if (!wants_bmp) return shocks;

  for (std::size_t i = 0; i < econ.farms.size(); ++i) {
    const FarmTechnology& f = econ.farms[i];
    const GridCell& cell = econ.base.cells[f.cell_index];
    const bool has_flow =
        cell.climate && cell.climate->total_drainflow() > 0.0;

    double treated_wet = 0.0;
    if (scenario.wetland) {
      const double suitable =
          scenario.wetland->variant == WetlandVariant::tile_drained_only
              ? std::min(cell.wetland_suitable_fraction, cell.tile_drained_fraction)
              : cell.wetland_suitable_fraction;
      treated_wet = suitable * scenario.wetland->adoption;
      if (treated_wet > 0.0 && !cell.climate) {
        throw std::runtime_error("scenario '" + scenario.label +
                                 "': wetland policy needs climate data for cell " +
                                 std::to_string(cell.cell_id));
      }
      if (treated_wet > 0.0 && !has_flow) treated_wet = 0.0;  // nothing to treat
    }
    double treated_cd = 0.0;
    if (scenario.cd) {
      treated_cd = cell.cd_suitable_fraction * scenario.cd->adoption;
      treated_cd = std::min(treated_cd, 1.0 - treated_wet);  // wetland-first
      if (treated_cd > 0.0 && !cell.climate) {
        throw std::runtime_error("scenario '" + scenario.label +
                                 "': drainage policy needs climate data for cell " +
                                 std::to_string(cell.cell_id));
      }
      if (treated_cd > 0.0 && !has_flow) treated_cd = 0.0;
    }

    double mult = 1.0;
    double wedge = 0.0;
    double take = 0.0;
    if (treated_wet > 0.0) {
      const double adj = wetland_load_adjustment(*cell.climate, wp);
      mult -= treated_wet * (1.0 - adj / 100.0);
      wedge += treated_wet * scenario.wetland->farmer_cost_share *
               scenario.wetland->cost_per_ha * ms;
      take += scenario.wetland->land_take_ratio * treated_wet;
    }
    if (treated_cd > 0.0) {
      const double adj = cd_load_adjustment(*cell.climate, cdr);
      mult -= treated_cd * (1.0 - adj / 100.0);
      wedge += treated_cd * scenario.cd->farmer_cost_share *
               scenario.cd->cost_per_ha * ms;
    }
    shocks.leach_multiplier[i] = mult;
    shocks.land_wedge[i] = wedge;
    shocks.land_take[i] = take;
  }
  return shocks;
}

}  // namespace nleach

#endif
