#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nleach/equilibrium.hpp"
#include "nleach/grid.hpp"
#include "nleach/scenario.hpp"

using nleach::PolicyScenario;
using nleach::Practice;
using nleach::WetlandVariant;

namespace {

/// Two-cell economy with hand-picked constant leaching intensities and equal
/// baseline leached masses, so the wedge arithmetic can be checked by hand.
nleach::BaselineEconomy two_theta_economy(double theta1, double theta2) {
  nleach::BaselineEconomy econ;
  for (int i = 0; i < 2; ++i) {
    nleach::GridCell cell;
    cell.cell_id = i + 1;
    cell.lon = -94.0 + i * (1.0 / 12.0);
    cell.lat = 41.0;
    cell.state_code = "S01";
    cell.region_code = "US";
    cell.tile_drained_fraction = 0.5;
    cell.cd_suitable_fraction = 0.3;
    cell.wetland_suitable_fraction = 0.3;
    cell.in_mississippi_basin = true;
    auto& pb = cell.rainfed;
    const double theta = i == 0 ? theta1 : theta2;
    // Equal leached mass: area inversely proportional to intensity.
    pb.area_ha = 1000.0 * (i == 0 ? 1.0 : theta1 / theta2);
    pb.n_rate = 150.0;
    pb.yield_kg_ha = 9000.0;
    pb.tf.c = 0.975;
    pb.tf.a = 9000.0 * std::exp(0.12);
    pb.tf.b = 0.12 / std::pow(pb.tf.c, pb.n_rate);
    pb.leach.alpha = theta;
    pb.leach.beta = 0.0;
    pb.leach.n_max = 1.8 * pb.n_rate;
    nleach::MonthlyClimate mc;
    mc.drainflow.fill(0.001);
    mc.air_temp.fill(12.0);
    cell.climate = mc;
    econ.cells.push_back(cell);
  }
  return econ;
}

}  // namespace

TEST_CASE("tax target resolves to the hand-solved rate") {
  const auto econ = nleach::calibrate(two_theta_economy(0.2, 0.4));
  // Equal leach weights, mean intensity 0.3, baseline N price 210:
  // a 30% average wedge needs t = 0.30*210/0.3 = 210.
  const double rate = nleach::resolve_tax_rate(econ, 30.0);
  CHECK(rate == Catch::Approx(210.0).epsilon(1e-9));
  CHECK(nleach::average_cost_wedge_percent(econ, rate) ==
        Catch::Approx(30.0).epsilon(1e-12));
  // Per-cell wedges scale with the cell intensities: 20% and 40%.
  for (const auto& f : econ.farms) {
    const double wedge = 100.0 * f.theta0 * rate / f.nprice0;
    CHECK(wedge == Catch::Approx(100.0 * f.theta0).epsilon(1e-9));
  }
}

TEST_CASE("tax calibration hits the headline target on a synthetic grid") {
  const auto econ = nleach::calibrate(nleach::generate_synthetic(400, 19));
  const double rate = nleach::resolve_tax_rate(econ, 28.9);
  CHECK(nleach::average_cost_wedge_percent(econ, rate) ==
        Catch::Approx(28.9).margin(1e-6));
}

TEST_CASE("scenario_A with zero target is the null scenario") {
  CHECK(nleach::scenario_A(0.0).is_null());
  const auto econ = nleach::calibrate(two_theta_economy(0.2, 0.4));
  const auto shocks = nleach::resolve_scenario(nleach::scenario_A(0.0), econ);
  CHECK(shocks.tax_rate == 0.0);
}

TEST_CASE("efficiency shifter: dearer land, cheaper N services") {
  const auto econ = nleach::calibrate(two_theta_economy(0.3, 0.3));
  const auto& f = econ.farms[0];
  nleach::FarmPrices fp;
  fp.crop_price = f.crop_price0;
  fp.eff_n_price = f.nprice0;
  fp.nonland_price = f.mprice0;
  fp.land_supply_elasticity = econ.base.params.land_supply_elasticity;
  fp.water_supply_elasticity = econ.base.params.water_supply_elasticity;
  fp.n_augmentation = 1.10;
  const auto sol = nleach::solve_farm(f, fp);

  // Physical N falls, effective N services and output weakly rise.
  CHECK(sol.n_tons < f.n0);
  CHECK(fp.n_augmentation * sol.n_tons > f.n0);
  CHECK(sol.output >= f.output0);

  // Independent route: with the crop price fixed, zero profit pins the
  // composite price, and every index follows in closed form.
  const double sg_top = f.top.sigma, sg_mid = f.mid.sigma;
  const double th_al = f.top.share1, th_n = f.top.share2();
  const double pi_n = 1.0 / fp.n_augmentation;
  const double c_mid = std::pow(
      (1.0 - th_n * std::pow(pi_n, 1.0 - sg_top)) / th_al, 1.0 / (1.0 - sg_top));
  const double th_l = f.mid.share1, th_m = f.mid.share2();
  const double pi_l = std::pow(
      (std::pow(c_mid, 1.0 - sg_mid) - th_m) / th_l, 1.0 / (1.0 - sg_mid));
  const double d_land = std::pow(1.0 / c_mid, sg_top) *
                        std::pow(c_mid / pi_l, sg_mid);
  const double eps_l = fp.land_supply_elasticity;
  const double scale = std::pow(pi_l, eps_l) / d_land;
  const double n_service = scale * std::pow(1.0 / pi_n, sg_top);
  CHECK(sol.n_tons ==
        Catch::Approx(f.n0 * n_service / fp.n_augmentation).epsilon(1e-10));
  CHECK(sol.output == Catch::Approx(f.output0 * scale).epsilon(1e-10));
  CHECK(sol.rent == Catch::Approx(f.rent0 * pi_l).epsilon(1e-10));
}

TEST_CASE("controlled drainage scenario wiring") {
  auto base = two_theta_economy(0.3, 0.3);
  base.cells[1].cd_suitable_fraction = 0.0;  // no suitability, no bite
  const auto econ = nleach::calibrate(base);
  const auto scenario = nleach::scenario_C(1.0, 0.5, 40.0);
  const auto shocks = nleach::resolve_scenario(scenario, econ);

  const double adj = nleach::cd_load_adjustment(*base.cells[0].climate);
  CHECK(shocks.leach_multiplier[0] ==
        Catch::Approx(1.0 - 0.3 * (1.0 - adj / 100.0)).epsilon(1e-12));
  CHECK(shocks.land_wedge[0] == Catch::Approx(0.3 * 0.5 * 40.0).epsilon(1e-12));
  CHECK(shocks.leach_multiplier[1] == 1.0);
  CHECK(shocks.land_wedge[1] == 0.0);
  CHECK(shocks.land_take[0] == 0.0);

  SECTION("zero adoption is the null scenario") {
    CHECK(nleach::scenario_C(0.0, 0.5, 40.0).is_null());
  }
}

TEST_CASE("wetland scenario wiring") {
  auto base = two_theta_economy(0.3, 0.3);
  base.cells[0].wetland_suitable_fraction = 0.4;
  base.cells[0].tile_drained_fraction = 0.1;
  base.cells[1].wetland_suitable_fraction = 0.4;
  base.cells[1].tile_drained_fraction = 0.0;
  const auto econ = nleach::calibrate(base);

  SECTION("variant D is capped by tile drainage") {
    const auto shocks = nleach::resolve_scenario(
        nleach::scenario_D(WetlandVariant::tile_drained_only, 1.0, 0.5, 60.0),
        econ);
    const double adj = nleach::wetland_load_adjustment(*base.cells[0].climate);
    CHECK(shocks.leach_multiplier[0] ==
          Catch::Approx(1.0 - 0.1 * (1.0 - adj / 100.0)).epsilon(1e-12));
    // No tile drainage in cell 2: variant D has no effect there.
    CHECK(shocks.leach_multiplier[1] == 1.0);
    CHECK(shocks.land_take[1] == 0.0);
  }
  SECTION("variant D* uses the full hydric suitability") {
    const auto shocks = nleach::resolve_scenario(
        nleach::scenario_D(WetlandVariant::anywhere, 1.0, 0.5, 60.0), econ);
    CHECK(shocks.leach_multiplier[1] < 1.0);
  }
  SECTION("land take: treating 100 ha retires 2.25 ha") {
    const auto shocks = nleach::resolve_scenario(
        nleach::scenario_D(WetlandVariant::anywhere, 0.25, 0.5, 60.0), econ);
    // treated fraction 0.4*0.25 = 0.1 of 1000 ha = 100 ha treated
    const double retired_ha = shocks.land_take[0] * econ.farms[0].land0;
    CHECK(retired_ha == Catch::Approx(2.25).epsilon(1e-12));
  }
}

TEST_CASE("combined drainage and wetland never double-treat") {
  auto base = two_theta_economy(0.3, 0.3);
  base.cells[0].wetland_suitable_fraction = 0.6;
  base.cells[0].tile_drained_fraction = 0.9;
  base.cells[0].cd_suitable_fraction = 0.7;
  const auto econ = nleach::calibrate(base);
  const auto combined = nleach::combine(
      {nleach::scenario_C(1.0, 0.5, 40.0),
       nleach::scenario_D(WetlandVariant::tile_drained_only, 1.0, 0.5, 60.0)});
  const auto shocks = nleach::resolve_scenario(combined, econ);
  const double adj_w = nleach::wetland_load_adjustment(*base.cells[0].climate);
  const double adj_c = nleach::cd_load_adjustment(*base.cells[0].climate);
  // Wetland claims 0.6, drainage only the remaining 0.4 of its 0.7.
  CHECK(shocks.leach_multiplier[0] ==
        Catch::Approx(1.0 - 0.6 * (1.0 - adj_w / 100.0) -
                      0.4 * (1.0 - adj_c / 100.0))
            .epsilon(1e-12));
}

TEST_CASE("combine merges and rejects incompatible bundles") {
  const auto a = nleach::scenario_A(28.9);
  const auto b = nleach::scenario_B(0.10);
  const auto d = nleach::scenario_D(WetlandVariant::tile_drained_only, 1.0, 0.5, 60.0);

  SECTION("single-scenario combine is the scenario itself") {
    const auto only = nleach::combine({a});
    CHECK(only.label == "A");
    REQUIRE(only.tax.has_value());
    CHECK(only.tax->target_cost_increase_percent ==
          a.tax->target_cost_increase_percent);
    CHECK_FALSE(only.efficiency);
  }
  SECTION("A+B+D carries all three components") {
    const auto abd = nleach::combine({a, b, d});
    CHECK(abd.label == "A+B+D");
    CHECK(abd.tax.has_value());
    CHECK(abd.efficiency.has_value());
    CHECK(abd.wetland.has_value());
    CHECK_FALSE(abd.cd.has_value());
  }
  SECTION("two wetland variants cannot combine") {
    const auto dstar = nleach::scenario_D(WetlandVariant::anywhere, 1.0, 0.5, 60.0);
    CHECK_THROWS_WITH(nleach::combine({d, dstar}),
                      Catch::Matchers::ContainsSubstring("incompatible"));
  }
  SECTION("combining with null changes nothing") {
    const auto econ = nleach::calibrate(two_theta_economy(0.25, 0.35));
    const auto alone = nleach::resolve_scenario(a, econ);
    const auto with_null = nleach::resolve_scenario(
        nleach::combine({a, PolicyScenario{}}), econ);
    CHECK(alone.tax_rate == with_null.tax_rate);
    CHECK(alone.leach_multiplier == with_null.leach_multiplier);
    CHECK(alone.land_wedge == with_null.land_wedge);
  }
}

TEST_CASE("grid-level sign patterns for efficiency and BMP scenarios") {
  const auto econ = nleach::calibrate(nleach::generate_synthetic(900, 77));
  const auto baseline = nleach::solve(econ, PolicyScenario{});
  REQUIRE(baseline.diag.converged);

  auto total_leach = [&](const nleach::EquilibriumSolution& s) {
    double t = 0.0;
    for (const auto& fs : s.farms) t += fs.leach_tons;
    return t;
  };
  const double leach0 = total_leach(baseline);

  SECTION("B: less N, no less output") {
    const auto sol = nleach::solve(econ, nleach::scenario_B(0.10));
    REQUIRE(sol.diag.converged);
    CHECK(sol.markets.n_quantity < baseline.markets.n_quantity);
    CHECK(sol.markets.crop_quantity >= baseline.markets.crop_quantity);
    CHECK(total_leach(sol) < leach0);
  }
  SECTION("C: leaching falls overall, rises somewhere untreated") {
    const auto sol = nleach::solve(econ, nleach::scenario_C(1.0, 0.5, 30.0));
    REQUIRE(sol.diag.converged);
    CHECK(total_leach(sol) < leach0);
    CHECK(sol.markets.crop_price > baseline.markets.crop_price);
    bool leakage = false;
    for (std::size_t i = 0; i < sol.farms.size(); ++i) {
      const auto& cell = econ.base.cells[econ.farms[i].cell_index];
      if (cell.cd_suitable_fraction == 0.0 &&
          sol.farms[i].leach_tons > baseline.farms[i].leach_tons) {
        leakage = true;
        break;
      }
    }
    CHECK(leakage);
  }
  SECTION("D* removes at least as much as D") {
    const auto d = nleach::solve(
        econ, nleach::scenario_D(WetlandVariant::tile_drained_only, 1.0, 0.5, 55.0));
    const auto dstar = nleach::solve(
        econ, nleach::scenario_D(WetlandVariant::anywhere, 1.0, 0.5, 55.0));
    REQUIRE(d.diag.converged);
    REQUIRE(dstar.diag.converged);
    CHECK(total_leach(dstar) <= total_leach(d));
    CHECK(total_leach(d) < leach0);
  }
}
