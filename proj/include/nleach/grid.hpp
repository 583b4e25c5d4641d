#ifndef NLEACH_GRID_HPP
#define NLEACH_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "nleach/bmp.hpp"
#include "nleach/leaching.hpp"
#include "nleach/rng.hpp"
#include "nleach/table.hpp"
#include "nleach/transfer.hpp"

namespace nleach {

enum class Practice { irrigated, rainfed };

inline const char* practice_name(Practice p) {
  return p == Practice::irrigated ? "irrigated" : "rainfed";
}

inline Practice practice_from_name(const std::string& s) {
  if (s == "irrigated") return Practice::irrigated;
  if (s == "rainfed") return Practice::rainfed;
  throw std::runtime_error("unknown practice '" + s + "'");
}

/// Baseline state of one production practice within a cell. A practice is
/// active when it farms positive area; inactive practices carry zeros.
struct PracticeBaseline {
  double area_ha = 0.0;
  double n_rate = 0.0;        ///< kg N per ha
  double yield_kg_ha = 0.0;   ///< corn-equivalent
  TransferFunction tf{};
  LeachingResponse leach{};

  bool active() const { return area_ha > 0.0; }
};

/// One 5-arc-minute cell's baseline economy and BMP feasibility.
struct GridCell {
  long cell_id = 0;
  double lon = 0.0;
  double lat = 0.0;
  std::string state_code;
  std::string region_code;
  double tile_drained_fraction = 0.0;
  double cd_suitable_fraction = 0.0;
  double wetland_suitable_fraction = 0.0;
  bool in_mississippi_basin = false;
  PracticeBaseline irrigated;
  PracticeBaseline rainfed;
  std::optional<MonthlyClimate> climate;

  const PracticeBaseline& practice(Practice p) const {
    return p == Practice::irrigated ? irrigated : rainfed;
  }
  PracticeBaseline& practice(Practice p) {
    return p == Practice::irrigated ? irrigated : rainfed;
  }
};

/// Economy-wide baseline prices and behavioral elasticities. The two prices
/// the calibration is anchored to are the national N price and crop price;
/// other input prices are normalized to one. Elasticities default to
/// documented values and are configurable; an infinite supply elasticity
/// fixes that factor's price.
struct EconomyParams {
  double n_price = 210.0;     ///< currency per ton N
  double crop_price = 26.78;  ///< currency per ton output
  double demand_elasticity = -0.5;
  double land_supply_elasticity = 0.25;
  double water_supply_elasticity = 0.5;
  double nonland_supply_elasticity = 1.0;
  double n_supply_elasticity = 0.5;
  double sigma_land_water = 0.1;
  double sigma_composite_nonland = 0.5;
  double sigma_fallback = 0.5;        ///< top-nest sigma when curvature degenerates
  double nonland_revenue_share = 0.55;  ///< share of non-N value paid to nonland inputs
  double water_revenue_share = 0.10;    ///< share of non-N value paid to water (irrigated)
  double money_scale = 1.0;  ///< rescales the money unit; real results invariant

  std::string invariant_error() const {
    if (!(n_price > 0.0) || !(crop_price > 0.0)) return "baseline prices must be > 0";
    if (!(demand_elasticity < 0.0)) return "demand elasticity must be < 0";
    for (double e : {land_supply_elasticity, water_supply_elasticity,
                     n_supply_elasticity}) {
      if (!(e >= 0.0)) return "supply elasticities must be >= 0";
    }
    if (!(nonland_supply_elasticity >= 0.0)) return "supply elasticities must be >= 0";
    for (double s : {sigma_land_water, sigma_composite_nonland, sigma_fallback}) {
      if (!(s > 0.0)) return "nest sigmas must be > 0";
    }
    if (!(nonland_revenue_share > 0.0 && water_revenue_share >= 0.0 &&
          nonland_revenue_share + water_revenue_share < 1.0)) {
      return "revenue shares must leave a positive land share";
    }
    if (!(money_scale > 0.0)) return "money_scale must be > 0";
    return {};
  }
};

inline nlohmann::json economy_params_to_json(const EconomyParams& p) {
  nlohmann::json j;
  j["n_price"] = p.n_price;
  j["crop_price"] = p.crop_price;
  j["demand_elasticity"] = p.demand_elasticity;
  j["land_supply_elasticity"] = p.land_supply_elasticity;
  j["water_supply_elasticity"] = p.water_supply_elasticity;
  if (std::isinf(p.nonland_supply_elasticity)) {
    j["nonland_supply_elasticity"] = "inf";
  } else {
    j["nonland_supply_elasticity"] = p.nonland_supply_elasticity;
  }
  j["n_supply_elasticity"] = p.n_supply_elasticity;
  j["sigma_land_water"] = p.sigma_land_water;
  j["sigma_composite_nonland"] = p.sigma_composite_nonland;
  j["sigma_fallback"] = p.sigma_fallback;
  j["nonland_revenue_share"] = p.nonland_revenue_share;
  j["water_revenue_share"] = p.water_revenue_share;
  j["money_scale"] = p.money_scale;
  return j;
}

inline double json_elasticity(const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  return v.get<double>();
}

inline EconomyParams economy_params_from_json(const nlohmann::json& j) {
  EconomyParams p;
  auto get = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j.at(key).get<double>();
  };
  get("n_price", p.n_price);
  get("crop_price", p.crop_price);
  get("demand_elasticity", p.demand_elasticity);
  get("land_supply_elasticity", p.land_supply_elasticity);
  get("water_supply_elasticity", p.water_supply_elasticity);
  if (j.contains("nonland_supply_elasticity")) {
    p.nonland_supply_elasticity = json_elasticity(j.at("nonland_supply_elasticity"));
  }
  get("n_supply_elasticity", p.n_supply_elasticity);
  get("sigma_land_water", p.sigma_land_water);
  get("sigma_composite_nonland", p.sigma_composite_nonland);
  get("sigma_fallback", p.sigma_fallback);
  get("nonland_revenue_share", p.nonland_revenue_share);
  get("water_revenue_share", p.water_revenue_share);
  get("money_scale", p.money_scale);
  const std::string err = p.invariant_error();
  if (!err.empty()) throw std::runtime_error("economy params: " + err);
  return p;
}

struct BaselineEconomy {
  std::vector<GridCell> cells;
  EconomyParams params;

  bool has_climate() const {
    for (const auto& c : cells) {
      if (!c.climate) return false;
    }
    return !cells.empty();
  }
};

// ---------------------------------------------------------------------------
// Validation

inline void validate_practice(const GridCell& cell, Practice p,
                              std::vector<std::string>& out) {
  const auto& pb = cell.practice(p);
  const std::string tag = "cell " + std::to_string(cell.cell_id) + " [" +
                          practice_name(p) + "]: ";
  if (pb.area_ha < 0.0) out.push_back(tag + "negative crop area");
  if (pb.n_rate < 0.0) out.push_back(tag + "negative N rate");
  if (pb.yield_kg_ha < 0.0) out.push_back(tag + "negative baseline yield");
  if (!pb.active()) return;
  if (!(pb.n_rate > 0.0)) out.push_back(tag + "active practice needs n_rate > 0");
  if (!(pb.yield_kg_ha > 0.0)) out.push_back(tag + "active practice needs yield > 0");
  std::string err = pb.tf.invariant_error();
  if (!err.empty()) out.push_back(tag + err);
  err = pb.leach.invariant_error();
  if (!err.empty()) out.push_back(tag + err);
}

inline std::vector<std::string> validate_economy(const BaselineEconomy& econ) {
  std::vector<std::string> out;
  const std::string perr = econ.params.invariant_error();
  if (!perr.empty()) out.push_back("economy params: " + perr);
  std::unordered_set<long> ids;
  for (const auto& cell : econ.cells) {
    const std::string tag = "cell " + std::to_string(cell.cell_id) + ": ";
    if (!ids.insert(cell.cell_id).second) out.push_back(tag + "duplicate cell_id");
    if (!std::isfinite(cell.lon) || !std::isfinite(cell.lat)) {
      out.push_back(tag + "non-finite coordinates");
    }
    auto frac = [&](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) {
        out.push_back(tag + std::string(name) + " (" + format_double(v) +
                      ") must be in [0,1]");
      }
    };
    frac(cell.tile_drained_fraction, "tile_drained_fraction");
    frac(cell.cd_suitable_fraction, "cd_suitable_fraction");
    frac(cell.wetland_suitable_fraction, "wetland_suitable_fraction");
    if (cell.cd_suitable_fraction > cell.tile_drained_fraction) {
      out.push_back(tag + "cd_suitable_fraction (" +
                    format_double(cell.cd_suitable_fraction) +
                    ") exceeds tile_drained_fraction (" +
                    format_double(cell.tile_drained_fraction) +
                    "); controlled drainage requires existing tile drainage");
    }
    validate_practice(cell, Practice::irrigated, out);
    validate_practice(cell, Practice::rainfed, out);
    if (cell.climate) {
      const std::string cerr = cell.climate->invariant_error();
      if (!cerr.empty()) out.push_back(tag + cerr);
    }
  }
  return out;
}

inline void throw_if_invalid(const BaselineEconomy& econ) {
  const auto violations = validate_economy(econ);
  if (violations.empty()) return;
  std::string msg = "baseline invariant violations (" +
                    std::to_string(violations.size()) + " total, first " +
                    std::to_string(std::min<std::size_t>(10, violations.size())) +
                    " shown):";
  for (std::size_t i = 0; i < violations.size() && i < 10; ++i) {
    msg += "\n  " + violations[i];
  }
  throw std::runtime_error(msg);
}

// ---------------------------------------------------------------------------
// File schema (documented in docs/schema.md). One row per (cell, practice);
// cell-level columns repeat on both of a cell's rows and must agree.

inline const std::vector<std::string>& baseline_columns() {
  static const std::vector<std::string> cols = {
      "cell_id", "practice", "lon", "lat", "state_code", "region_code",
      "crop_area_irrigated", "crop_area_rainfed", "n_rate_irrigated",
      "n_rate_rainfed", "baseline_yield", "tile_drained_fraction",
      "cd_suitable_fraction", "wetland_suitable_fraction",
      "in_mississippi_basin", "a", "b", "c", "alpha", "beta"};
  return cols;
}

/// Operating range attached to leaching responses read from files; the
/// simulated yield/leaching samples behind the coefficients span up to 180%
/// of the baseline rate.
inline constexpr double kLeachingRangeFactor = 1.8;

inline void write_baseline_table(const BaselineEconomy& econ,
                                 const std::string& path) {
  Table t;
  t.columns = baseline_columns();
  for (const auto& cell : econ.cells) {
    for (Practice p : {Practice::irrigated, Practice::rainfed}) {
      const auto& pb = cell.practice(p);
      if (!pb.active()) continue;
      std::vector<std::string> row;
      row.push_back(std::to_string(cell.cell_id));
      row.push_back(practice_name(p));
      row.push_back(format_double(cell.lon));
      row.push_back(format_double(cell.lat));
      row.push_back(cell.state_code);
      row.push_back(cell.region_code);
      row.push_back(format_double(cell.irrigated.area_ha));
      row.push_back(format_double(cell.rainfed.area_ha));
      row.push_back(format_double(cell.irrigated.n_rate));
      row.push_back(format_double(cell.rainfed.n_rate));
      row.push_back(format_double(pb.yield_kg_ha));
      row.push_back(format_double(cell.tile_drained_fraction));
      row.push_back(format_double(cell.cd_suitable_fraction));
      row.push_back(format_double(cell.wetland_suitable_fraction));
      row.push_back(cell.in_mississippi_basin ? "1" : "0");
      row.push_back(format_double(pb.tf.a));
      row.push_back(format_double(pb.tf.b));
      row.push_back(format_double(pb.tf.c));
      row.push_back(format_double(pb.leach.alpha));
      row.push_back(format_double(pb.leach.beta));
      t.rows.push_back(std::move(row));
    }
  }
  write_table(path, t);
}

inline void write_climate_table(const BaselineEconomy& econ,
                                const std::string& path) {
  Table t;
  t.columns.push_back("cell_id");
  char buf[32];
  for (int m = 1; m <= 12; ++m) {
    std::snprintf(buf, sizeof(buf), "drainflow_m%02d", m);
    t.columns.push_back(buf);
  }
  for (int m = 1; m <= 12; ++m) {
    std::snprintf(buf, sizeof(buf), "air_temp_m%02d", m);
    t.columns.push_back(buf);
  }
  for (const auto& cell : econ.cells) {
    if (!cell.climate) continue;
    std::vector<std::string> row;
    row.push_back(std::to_string(cell.cell_id));
    for (double q : cell.climate->drainflow) row.push_back(format_double(q));
    for (double v : cell.climate->air_temp) row.push_back(format_double(v));
    t.rows.push_back(std::move(row));
  }
  write_table(path, t);
}

inline void write_baseline(const BaselineEconomy& econ,
                           const std::string& baseline_path,
                           const std::string& climate_path = "",
                           const std::string& economy_path = "") {
  write_baseline_table(econ, baseline_path);
  if (!climate_path.empty()) write_climate_table(econ, climate_path);
  if (!economy_path.empty()) {
    std::ofstream out(economy_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + economy_path + "'");
    out << economy_params_to_json(econ.params).dump(2) << '\n';
  }
}

inline void attach_climate(BaselineEconomy& econ, const std::string& path) {
  const Table t = read_table(path);
  const int id_col = t.require_column("cell_id");
  std::vector<int> qcols, tcols;
  char buf[32];
  for (int m = 1; m <= 12; ++m) {
    std::snprintf(buf, sizeof(buf), "drainflow_m%02d", m);
    qcols.push_back(t.require_column(buf));
  }
  for (int m = 1; m <= 12; ++m) {
    std::snprintf(buf, sizeof(buf), "air_temp_m%02d", m);
    tcols.push_back(t.require_column(buf));
  }
  std::unordered_map<long, MonthlyClimate> by_id;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string ctx = path + " row " + std::to_string(r + 2);
    const long id = parse_long(t.rows[r][static_cast<std::size_t>(id_col)], ctx);
    MonthlyClimate mc;
    for (int m = 0; m < 12; ++m) {
      mc.drainflow[static_cast<std::size_t>(m)] =
          parse_double(t.rows[r][static_cast<std::size_t>(qcols[static_cast<std::size_t>(m)])], ctx);
      mc.air_temp[static_cast<std::size_t>(m)] =
          parse_double(t.rows[r][static_cast<std::size_t>(tcols[static_cast<std::size_t>(m)])], ctx);
    }
    by_id[id] = mc;
  }
  for (auto& cell : econ.cells) {
    auto it = by_id.find(cell.cell_id);
    if (it != by_id.end()) cell.climate = it->second;
  }
}

inline BaselineEconomy load_baseline(const std::string& baseline_path,
                                     const std::string& climate_path = "",
                                     const std::string& economy_path = "") {
  const Table t = read_table(baseline_path);
  for (const auto& col : baseline_columns()) t.require_column(col);
  if (t.rows.empty()) throw std::runtime_error(baseline_path + ": no cells");

  const int c_id = t.column_index("cell_id");
  const int c_practice = t.column_index("practice");
  auto col = [&](const char* name) { return t.column_index(name); };
  const int c_lon = col("lon"), c_lat = col("lat");
  const int c_state = col("state_code"), c_region = col("region_code");
  const int c_ai = col("crop_area_irrigated"), c_ar = col("crop_area_rainfed");
  const int c_ni = col("n_rate_irrigated"), c_nr = col("n_rate_rainfed");
  const int c_yield = col("baseline_yield");
  const int c_tile = col("tile_drained_fraction");
  const int c_cd = col("cd_suitable_fraction");
  const int c_wet = col("wetland_suitable_fraction");
  const int c_basin = col("in_mississippi_basin");
  const int c_a = col("a"), c_b = col("b"), c_c = col("c");
  const int c_alpha = col("alpha"), c_beta = col("beta");

  BaselineEconomy econ;
  std::unordered_map<long, std::size_t> index_of;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto f = [&](int c) {
      return parse_double(row[static_cast<std::size_t>(c)],
                          baseline_path + " row " + std::to_string(r + 2));
    };
    const std::string ctx = baseline_path + " row " + std::to_string(r + 2);
    const long id = parse_long(row[static_cast<std::size_t>(c_id)], ctx);
    const Practice practice = practice_from_name(row[static_cast<std::size_t>(c_practice)]);

    auto it = index_of.find(id);
    if (it == index_of.end()) {
      GridCell cell;
      cell.cell_id = id;
      cell.lon = f(c_lon);
      cell.lat = f(c_lat);
      cell.state_code = row[static_cast<std::size_t>(c_state)];
      cell.region_code = row[static_cast<std::size_t>(c_region)];
      cell.irrigated.area_ha = f(c_ai);
      cell.rainfed.area_ha = f(c_ar);
      cell.irrigated.n_rate = f(c_ni);
      cell.rainfed.n_rate = f(c_nr);
      cell.tile_drained_fraction = f(c_tile);
      cell.cd_suitable_fraction = f(c_cd);
      cell.wetland_suitable_fraction = f(c_wet);
      cell.in_mississippi_basin = f(c_basin) != 0.0;
      index_of.emplace(id, econ.cells.size());
      econ.cells.push_back(std::move(cell));
      it = index_of.find(id);
    } else {
      const GridCell& seen = econ.cells[it->second];
      if (seen.irrigated.area_ha != f(c_ai) || seen.rainfed.area_ha != f(c_ar) ||
          seen.irrigated.n_rate != f(c_ni) || seen.rainfed.n_rate != f(c_nr)) {
        throw std::runtime_error(ctx + ": cell-level columns disagree with the "
                                 "cell's earlier row");
      }
    }
    GridCell& cell = econ.cells[it->second];
    PracticeBaseline& pb = cell.practice(practice);
    if (pb.yield_kg_ha > 0.0) {
      throw std::runtime_error(ctx + ": duplicate (cell_id, practice) row");
    }
    pb.yield_kg_ha = f(c_yield);
    pb.tf = TransferFunction{f(c_a), f(c_b), f(c_c)};
    const double n_rate = practice == Practice::irrigated
                              ? cell.irrigated.n_rate
                              : cell.rainfed.n_rate;
    pb.leach = LeachingResponse{f(c_alpha), f(c_beta),
                                kLeachingRangeFactor * n_rate};
  }
  if (!climate_path.empty()) attach_climate(econ, climate_path);
  if (!economy_path.empty()) {
    std::ifstream in(economy_path);
    if (!in) throw std::runtime_error("cannot open '" + economy_path + "'");
    nlohmann::json j;
    in >> j;
    econ.params = economy_params_from_json(j);
  }
  throw_if_invalid(econ);
  return econ;
}

// ---------------------------------------------------------------------------
// Synthetic baseline generator.
//
// Cells sit on a regular 5-arc-minute lattice. A central "core" block plays
// the role of an intensive, heavily tile-drained production heartland with
// high BMP suitability; the surrounding fringe has thin cropland and little
// suitability, which is what lets market-mediated leakage show up there.
// Distributional targets: leaching intensities concentrated in [0.2, 0.5]
// with rainfed above irrigated, and yield curves whose implied land-N
// substitution elasticity is higher for irrigated practice.

inline BaselineEconomy generate_synthetic(int n_cells, std::uint64_t seed,
                                          EconomyParams params = {}) {
  if (n_cells < 2) {
    throw std::invalid_argument("generate_synthetic: need at least 2 cells");
  }
  Rng rng(seed);
  BaselineEconomy econ;
  econ.params = params;
  econ.cells.reserve(static_cast<std::size_t>(n_cells));

  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_cells))));
  const int rows = (n_cells + cols - 1) / cols;
  const double cx = (cols - 1) / 2.0;
  const double cy = (rows - 1) / 2.0;
  const double rx = std::max(cx, 0.5);
  const double ry = std::max(cy, 0.5);
  const double kCellDeg = 1.0 / 12.0;  // 5 arc-minutes
  const double lon0 = -96.0, lat0 = 38.0;
  const double cell_area_ha = 6400.0;

  // Fixed seasonal drainflow shape, spring-peaked, mean one.
  const double shape[12] = {0.60, 0.82, 1.47, 2.13, 2.02, 1.36,
                            0.71, 0.38, 0.33, 0.49, 0.82, 0.87};
  double shape_mean = 0.0;
  for (double s : shape) shape_mean += s;
  shape_mean /= 12.0;

  for (int i = 0; i < n_cells; ++i) {
    const int col = i % cols;
    const int row = i / cols;
    GridCell cell;
    cell.cell_id = i + 1;
    cell.lon = lon0 + col * kCellDeg;
    cell.lat = lat0 + row * kCellDeg;
    const double dx = (col - cx) / rx;
    const double dy = (row - cy) / ry;
    const double rho = std::sqrt(dx * dx + dy * dy);
    // Smooth core weight: ~1 in the heartland, ~0 on the fringe.
    const double intensity = 1.0 / (1.0 + std::exp((rho - 0.55) / 0.12));

    const int state_col = std::min(3, col * 4 / std::max(1, cols));
    const int state_row = std::min(1, row * 2 / std::max(1, rows));
    char state[16];
    std::snprintf(state, sizeof(state), "S%02d", state_row * 4 + state_col + 1);
    cell.state_code = state;
    cell.region_code = "US";
    cell.in_mississippi_basin = rho <= 0.9;

    cell.tile_drained_fraction = std::min(
        0.95, intensity * rng.uniform(0.55, 0.95) + (1.0 - intensity) * rng.uniform(0.0, 0.10));
    cell.cd_suitable_fraction = cell.tile_drained_fraction * rng.uniform(0.45, 0.90);
    const double wet_core = intensity * rng.uniform(0.25, 0.60) +
                            (1.0 - intensity) * rng.uniform(0.0, 0.04);
    cell.wetland_suitable_fraction = cell.in_mississippi_basin ? wet_core : 0.0;
    // Feasibility screens (contiguous-area and hydric-soil thresholds) zero
    // out marginal fractions, which gives the fringe truly untreated cells.
    if (cell.cd_suitable_fraction < 0.02) cell.cd_suitable_fraction = 0.0;
    if (cell.wetland_suitable_fraction < 0.01) cell.wetland_suitable_fraction = 0.0;

    const double crop_fraction =
        std::clamp(0.06 + 0.60 * intensity * rng.uniform(0.7, 1.0) +
                       0.02 * rng.normal(),
                   0.01, 0.85);
    const double total_area = cell_area_ha * crop_fraction;
    const double westness = cols > 1 ? 1.0 - static_cast<double>(col) / (cols - 1) : 0.5;
    const bool has_irrigation = rng.bernoulli(0.10 + 0.22 * westness);
    const double irr_share = has_irrigation ? rng.uniform(0.15, 0.55) : 0.0;

    auto make_practice = [&](Practice p, double area, double n_rate,
                             double yield) {
      PracticeBaseline pb;
      pb.area_ha = area;
      if (!(area > 0.0)) return pb;
      pb.n_rate = n_rate;
      pb.yield_kg_ha = yield;
      // Yield curve: draw the decay base and the log headroom to the
      // asymptote, then pin b so the curve passes through the baseline
      // (rate, yield) point. The headroom cap keeps the land marginal
      // product positive and the curvature negative at baseline.
      const double c = p == Practice::irrigated ? rng.uniform(0.982, 0.992)
                                                : rng.uniform(0.965, 0.985);
      const double m = -n_rate * std::log(c);
      const double k_hi = std::min(0.25, 0.85 / m);
      const double k_frac = p == Practice::irrigated ? rng.uniform(0.40, 0.80)
                                                     : rng.uniform(0.55, 0.95);
      const double k = k_frac * k_hi;
      pb.tf.c = c;
      pb.tf.a = yield * std::exp(k);
      pb.tf.b = k / std::pow(c, n_rate);
      // Leaching: intensity at the baseline rate drawn per practice, split
      // between the linear and quadratic terms.
      const double theta_mean = p == Practice::irrigated ? 0.30 : 0.37;
      const double theta0 = std::clamp(rng.normal(theta_mean, 0.07), 0.06, 0.62);
      const double phi = rng.uniform(0.3, 0.7);
      pb.leach.alpha = phi * theta0;
      pb.leach.beta = (1.0 - phi) * theta0 / n_rate;
      pb.leach.n_max = kLeachingRangeFactor * n_rate;
      return pb;
    };

    const double n_rf = std::clamp(120.0 + 60.0 * intensity + rng.normal(0.0, 10.0),
                                   60.0, 240.0);
    const double y_rf = std::clamp(6000.0 + 4500.0 * intensity + rng.normal(0.0, 400.0),
                                   3500.0, 11500.0);
    const double n_irr = std::min(260.0, n_rf * rng.uniform(1.10, 1.30));
    const double y_irr = std::min(12500.0, y_rf * rng.uniform(1.15, 1.35));

    cell.rainfed = make_practice(Practice::rainfed, total_area * (1.0 - irr_share),
                                 n_rf, y_rf);
    cell.irrigated = make_practice(Practice::irrigated, total_area * irr_share,
                                   n_irr, y_irr);

    MonthlyClimate mc;
    const double t_mean = 26.0 - 1.1 * (cell.lat - lat0);
    const double amp = 11.0 + rng.uniform(0.0, 2.0);
    const double annual_mm = rng.uniform(180.0, 340.0) * (0.55 + 0.45 * intensity);
    const double q_avg = annual_mm / 1000.0 / 365.0;
    for (int mth = 0; mth < 12; ++mth) {
      mc.air_temp[static_cast<std::size_t>(mth)] =
          t_mean - amp * std::cos(2.0 * 3.14159265358979323846 * (mth - 0.5) / 12.0);
      mc.drainflow[static_cast<std::size_t>(mth)] =
          q_avg * shape[mth] / shape_mean;
    }
    cell.climate = mc;

    econ.cells.push_back(std::move(cell));
  }
  throw_if_invalid(econ);
  return econ;
}

}  // namespace nleach

#endif
