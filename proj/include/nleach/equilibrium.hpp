#ifndef NLEACH_EQUILIBRIUM_HPP
#define NLEACH_EQUILIBRIUM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nleach/calibration.hpp"
#include "nleach/parallel.hpp"
#include "nleach/scenario.hpp"

namespace nleach {

struct SolverOptions {
  double tolerance = 1e-8;        ///< relative excess-demand convergence
  int max_iterations = 200;
  double fd_step = 1e-6;          ///< forward-difference step on log prices
  double max_log_step = 0.5;      ///< per-iteration cap on log-price moves
  int max_halvings = 30;          ///< damping: step halvings per iteration
  unsigned threads = 1;           ///< 0 = hardware concurrency
  double inner_tolerance = 1e-13; ///< farm-level first-order-condition tol
  int inner_max_iterations = 100;
};

/// Macro prices and their quantity mirrors. Local land and water rents live
/// with each farm's solution; money is anchored to the baseline price level,
/// which acts as the numeraire (rescaling it moves all nominal values
/// together and no real quantity).
struct MarketSystem {
  double crop_price = 0.0, n_price = 0.0, nonland_price = 0.0;
  double crop_quantity = 0.0, n_quantity = 0.0, nonland_quantity = 0.0;
  double crop_price0 = 0.0, n_price0 = 0.0, nonland_price0 = 0.0;
};

/// Relative excess demand per cleared market (demand minus supply over the
/// baseline quantity).
struct Residuals {
  double crop = 0.0, n = 0.0, nonland = 0.0;
  double max_abs() const {
    return std::max({std::abs(crop), std::abs(n), std::abs(nonland)});
  }
};

struct FarmSolution {
  double rent = 0.0, water_rent = 0.0;
  double scale = 0.0;  ///< inner production index relative to baseline
  double land = 0.0, water = 0.0, nonland = 0.0, n_tons = 0.0;
  double n_rate = 0.0;     ///< kg/ha
  double output = 0.0;     ///< tons
  double leach_tons = 0.0; ///< after the scenario's load multiplier
  double eff_n_price = 0.0;
  double leach_multiplier = 1.0;
  bool leach_clamped = false;
  bool leach_out_of_range = false;
  bool used_fallback = false;
};

struct Diagnostics {
  bool converged = false;
  int iterations = 0;
  double max_residual = 0.0;
  int farm_fallbacks = 0;
  std::int64_t leach_clamps = 0;
  std::int64_t leach_range_violations = 0;
  double value_identity_residual = 0.0;  ///< |revenue - payments| / revenue
};

struct EquilibriumSolution {
  MarketSystem markets;
  Residuals residuals;
  std::vector<FarmSolution> farms;
  Diagnostics diag;
};

// ---------------------------------------------------------------------------
// Farm-level response: given output and input prices plus the scenario's
// shifters, clear the farm's local land (and water) market against the
// zero-profit condition of the calibrated nest stack.

struct FarmPrices {
  double crop_price = 0.0;
  double eff_n_price = 0.0;
  double nonland_price = 0.0;
  double n_augmentation = 1.0;
  double tfp = 1.0;
  double land_wedge = 0.0;  ///< additive per-ha cost in the treated area
  double land_take = 0.0;   ///< fraction of the land endowment retired
  double leach_multiplier = 1.0;
  double land_supply_elasticity = 0.25;
  double water_supply_elasticity = 0.5;
};

namespace detail {

/// Cost stack at rent index x = ln(r/rent0), water index y = ln(w/wrent0).
struct CostStack {
  double c_bot = 1.0, c_mid = 1.0, c_top = 1.0;
  double dx_bot = 0.0, dx_mid = 0.0, dx_top = 0.0;
  double dy_bot = 0.0, dy_mid = 0.0, dy_top = 0.0;
  double pi_l = 1.0, pi_w = 1.0;
  double rr = 1.0;  ///< d ln(pi_l)/dx = r/(r + wedge)
};

inline CostStack cost_stack(const FarmTechnology& f, const FarmPrices& fp,
                            double x, double y) {
  CostStack s;
  const double r = f.rent0 * std::exp(x);
  s.pi_l = (r + fp.land_wedge) / f.rent0;
  s.rr = r / (r + fp.land_wedge);
  const double pi_m = fp.nonland_price / f.mprice0;
  const double pi_n = fp.eff_n_price / (f.nprice0 * fp.n_augmentation);
  if (f.has_water()) {
    s.pi_w = std::exp(y);
    s.c_bot = f.bot.unit_cost(s.pi_l, s.pi_w);
    const double wl = f.bot.value_share1(s.pi_l, s.pi_w);
    s.dx_bot = wl * s.rr;
    s.dy_bot = 1.0 - wl;
    s.c_mid = f.mid.unit_cost(s.c_bot, pi_m);
    const double wc = f.mid.value_share1(s.c_bot, pi_m);
    s.dx_mid = wc * s.dx_bot;
    s.dy_mid = wc * s.dy_bot;
  } else {
    s.c_bot = s.pi_l;
    s.dx_bot = s.rr;
    s.dy_bot = 0.0;
    s.c_mid = f.mid.unit_cost(s.pi_l, pi_m);
    const double wc = f.mid.value_share1(s.pi_l, pi_m);
    s.dx_mid = wc * s.rr;
    s.dy_mid = 0.0;
  }
  s.c_top = f.top.unit_cost(s.c_mid, pi_n);
  const double wt = f.top.value_share1(s.c_mid, pi_n);
  s.dx_top = wt * s.dx_mid;
  s.dy_top = wt * s.dy_mid;
  return s;
}

/// ln of the land demand index per unit of farm production.
inline double log_land_demand(const FarmTechnology& f, const CostStack& s) {
  double v = f.top.sigma * (std::log(s.c_top) - std::log(s.c_mid));
  if (f.has_water()) {
    v += f.mid.sigma * (std::log(s.c_mid) - std::log(s.c_bot));
    v += f.bot.sigma * (std::log(s.c_bot) - std::log(s.pi_l));
  } else {
    v += f.mid.sigma * (std::log(s.c_mid) - std::log(s.pi_l));
  }
  return v;
}

inline double log_water_demand(const FarmTechnology& f, const CostStack& s) {
  double v = f.top.sigma * (std::log(s.c_top) - std::log(s.c_mid));
  v += f.mid.sigma * (std::log(s.c_mid) - std::log(s.c_bot));
  v += f.bot.sigma * (std::log(s.c_bot) - std::log(s.pi_w));
  return v;
}

inline double d_log_land_demand_dx(const FarmTechnology& f, const CostStack& s) {
  double v = f.top.sigma * (s.dx_top - s.dx_mid);
  if (f.has_water()) {
    v += f.mid.sigma * (s.dx_mid - s.dx_bot);
    v += f.bot.sigma * (s.dx_bot - s.rr);
  } else {
    v += f.mid.sigma * (s.dx_mid - s.rr);
  }
  return v;
}

}  // namespace detail

/// Finds the farm's local equilibrium at the given prices: land rent (and
/// water rent) such that the zero-profit condition holds and factor demands
/// meet the cell-local constant-elasticity supplies. Damped Newton in log
/// rents with a bisection fallback.
inline FarmSolution solve_farm(const FarmTechnology& f, const FarmPrices& fp,
                               const SolverOptions& opts = {}) {
  if (!(fp.land_take < 1.0)) {
    throw std::runtime_error("solve_farm: land take must be < 1");
  }
  const double target =
      std::log(fp.crop_price / f.crop_price0) + std::log(fp.tfp);
  const double eps_l = fp.land_supply_elasticity;
  const double eps_w = fp.water_supply_elasticity;
  const double log_keep = std::log(1.0 - fp.land_take);

  double x = 0.0, y = 0.0;
  bool converged = false;
  bool fallback = false;

  auto g2_of = [&](const detail::CostStack& s, double xx, double yy) {
    return eps_l * xx + log_keep - detail::log_land_demand(f, s) -
           eps_w * yy + detail::log_water_demand(f, s);
  };

  if (!f.has_water()) {
    // One equation in the land rent; c_top is strictly increasing in it.
    for (int it = 0; it < opts.inner_max_iterations; ++it) {
      const auto s = detail::cost_stack(f, fp, x, 0.0);
      const double g = std::log(s.c_top) - target;
      if (std::abs(g) < opts.inner_tolerance) {
        converged = true;
        break;
      }
      double step = -g / std::max(s.dx_top, 1e-14);
      step = std::clamp(step, -2.0, 2.0);
      x += step;
    }
    if (!converged) {
      fallback = true;
      double lo = -40.0, hi = 40.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto s = detail::cost_stack(f, fp, mid, 0.0);
        (std::log(s.c_top) < target ? lo : hi) = mid;
      }
      x = 0.5 * (lo + hi);
    }
  } else {
    // Two equations: zero profit and equal implied production scales from
    // the land and water market clearings.
    double gn = 0.0;
    for (int it = 0; it < opts.inner_max_iterations; ++it) {
      const auto s = detail::cost_stack(f, fp, x, y);
      const double g1 = std::log(s.c_top) - target;
      const double g2 = g2_of(s, x, y);
      gn = std::max(std::abs(g1), std::abs(g2));
      if (gn < opts.inner_tolerance) {
        converged = true;
        break;
      }
      // Jacobian: d g2/dx = eps_l + sigma_bot * rr, d g2/dy = -eps_w - sigma_bot.
      const double j11 = s.dx_top, j12 = s.dy_top;
      const double j21 = eps_l + f.bot.sigma * s.rr;
      const double j22 = -eps_w - f.bot.sigma;
      const double det = j11 * j22 - j12 * j21;
      if (std::abs(det) < 1e-16) break;
      double dx = (-g1 * j22 + g2 * j12) / det;
      double dy = (-j11 * g2 + j21 * g1) / det;
      const double mx = std::max(std::abs(dx), std::abs(dy));
      if (mx > 2.0) {
        dx *= 2.0 / mx;
        dy *= 2.0 / mx;
      }
      // Damp until the step improves the system.
      double lambda = 1.0;
      for (int h = 0; h < opts.max_halvings; ++h) {
        const auto sn = detail::cost_stack(f, fp, x + lambda * dx, y + lambda * dy);
        const double n1 = std::abs(std::log(sn.c_top) - target);
        const double n2 = std::abs(g2_of(sn, x + lambda * dx, y + lambda * dy));
        if (std::max(n1, n2) <= gn * (1.0 - 1e-4) || std::max(n1, n2) < opts.inner_tolerance) break;
        lambda *= 0.5;
      }
      x += lambda * dx;
      y += lambda * dy;
    }
    if (!converged) {
      // Nested bisection: for fixed x, g2 is strictly decreasing in y;
      // along y(x), the zero-profit gap is strictly increasing in x.
      fallback = true;
      auto solve_y = [&](double xx) {
        double lo = -40.0, hi = 40.0;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const auto s = detail::cost_stack(f, fp, xx, mid);
          (g2_of(s, xx, mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
      };
      double lo = -40.0, hi = 40.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto s = detail::cost_stack(f, fp, mid, solve_y(mid));
        (std::log(s.c_top) < target ? lo : hi) = mid;
      }
      x = 0.5 * (lo + hi);
      y = solve_y(x);
    }
  }

  const auto s = detail::cost_stack(f, fp, x, y);
  FarmSolution sol;
  sol.used_fallback = fallback;
  sol.rent = f.rent0 * std::exp(x);
  sol.water_rent = f.has_water() ? f.wrent0 * std::exp(y) : 0.0;
  const double d_land = std::exp(detail::log_land_demand(f, s));
  const double scale = (1.0 - fp.land_take) * std::exp(eps_l * x) / d_land;
  sol.scale = scale;
  sol.land = f.land0 * (1.0 - fp.land_take) * std::exp(eps_l * x);
  if (f.has_water()) {
    sol.water = f.water0 * scale * std::exp(detail::log_water_demand(f, s));
  }
  const double pi_m = fp.nonland_price / f.mprice0;
  const double pi_n = fp.eff_n_price / (f.nprice0 * fp.n_augmentation);
  const double d_m = std::pow(s.c_top / s.c_mid, f.top.sigma) *
                     std::pow(s.c_mid / pi_m, f.mid.sigma);
  sol.nonland = f.nonland0 * scale * d_m;
  const double n_service = f.n0 * scale * std::pow(s.c_top / pi_n, f.top.sigma);
  sol.n_tons = n_service / fp.n_augmentation;
  sol.output = f.output0 * fp.tfp * scale;
  sol.eff_n_price = fp.eff_n_price;
  sol.leach_multiplier = fp.leach_multiplier;
  sol.n_rate = sol.land > 0.0 ? 1000.0 * sol.n_tons / sol.land : 0.0;
  if (sol.n_rate < 0.0 || sol.n_rate > f.leach.n_max) {
    sol.leach_out_of_range = true;
  }
  ClampCounter clamps;
  const double per_ha = leaching_rate_raw(f.leach, sol.n_rate, &clamps);
  sol.leach_clamped = clamps.total() > 0;
  sol.leach_tons = per_ha * sol.land / 1000.0 * fp.leach_multiplier;
  return sol;
}

// ---------------------------------------------------------------------------
// Market level

inline bool nonland_price_is_fixed(const EconomyParams& p) {
  return std::isinf(p.nonland_supply_elasticity);
}

/// Evaluates every farm at the given macro prices and returns the relative
/// excess demand of each cleared market. Farm results land in `farms` (one
/// slot per farm, fixed order), so aggregation is deterministic for any
/// thread count.
inline Residuals excess_demands(const CalibratedEconomy& econ,
                                const ScenarioShocks& shocks, double crop_price,
                                double n_price, double nonland_price,
                                std::vector<FarmSolution>& farms,
                                const SolverOptions& opts = {}) {
  const EconomyParams& par = econ.base.params;
  farms.resize(econ.farms.size());
  parallel_for(econ.farms.size(), opts.threads, [&](std::size_t i) {
    const FarmTechnology& f = econ.farms[i];
    FarmPrices fp;
    fp.crop_price = crop_price;
    fp.eff_n_price = n_price + f.theta0 * shocks.tax_rate;
    fp.nonland_price = nonland_price;
    fp.n_augmentation = shocks.n_augmentation;
    fp.tfp = shocks.tfp;
    fp.land_wedge = shocks.land_wedge[i];
    fp.land_take = shocks.land_take[i];
    fp.leach_multiplier = shocks.leach_multiplier[i];
    fp.land_supply_elasticity = par.land_supply_elasticity;
    fp.water_supply_elasticity = par.water_supply_elasticity;
    farms[i] = solve_farm(f, fp, opts);
  });

  KahanSum sq, sn, sm;
  for (const auto& s : farms) {
    sq.add(s.output);
    sn.add(s.n_tons);
    sm.add(s.nonland);
  }
  const double ms = par.money_scale;
  const double p0c = par.crop_price * ms;
  const double p0n = par.n_price * ms;
  const double p0m = ms;

  Residuals r;
  const double demand =
      econ.total_output0 * std::pow(crop_price / p0c, par.demand_elasticity);
  r.crop = (demand - sq.value()) / econ.total_output0;
  const double n_supply =
      econ.total_n0 * std::pow(n_price / p0n, par.n_supply_elasticity);
  r.n = (sn.value() - n_supply) / econ.total_n0;
  if (nonland_price_is_fixed(par)) {
    r.nonland = 0.0;
  } else {
    const double m_supply = econ.total_nonland0 *
                            std::pow(nonland_price / p0m, par.nonland_supply_elasticity);
    r.nonland = (sm.value() - m_supply) / econ.total_nonland0;
  }
  return r;
}

namespace detail {

/// Gaussian elimination with partial pivoting for the tiny Newton system.
template <std::size_t N>
inline bool solve_linear(std::array<std::array<double, N>, N> a,
                         std::array<double, N>& b, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (std::abs(a[piv][k]) < 1e-300) return false;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= m * a[k][j];
      b[i] -= m * b[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * b[j];
    b[i] = s / a[i][i];
  }
  return true;
}

}  // namespace detail

/// Solves the post-shock equilibrium: damped Newton on the log macro prices
/// (crop, fertilizer, and the regional nonland factor unless its supply is
/// perfectly elastic), with every cell's local response recomputed inside
/// each residual evaluation. Non-convergence is reported, never presented
/// as a solution.
inline EquilibriumSolution solve(const CalibratedEconomy& econ,
                                 const ScenarioShocks& shocks,
                                 const SolverOptions& opts = {}) {
  if (shocks.leach_multiplier.size() != econ.farms.size()) {
    throw std::invalid_argument("solve: shocks not resolved against this economy");
  }
  const EconomyParams& par = econ.base.params;
  const double ms = par.money_scale;
  const double p0[3] = {par.crop_price * ms, par.n_price * ms, ms};
  const bool fixed_m = nonland_price_is_fixed(par);
  const std::size_t dims = fixed_m ? 2 : 3;

  std::array<double, 3> z{0.0, 0.0, 0.0};  // log price deviations
  auto price = [&](std::size_t k) { return p0[k] * std::exp(z[k]); };

  EquilibriumSolution sol;
  std::vector<FarmSolution> work;
  auto eval = [&](const std::array<double, 3>& zz, std::vector<FarmSolution>& out) {
    return excess_demands(econ, shocks, p0[0] * std::exp(zz[0]),
                          p0[1] * std::exp(zz[1]), p0[2] * std::exp(zz[2]), out,
                          opts);
  };

  Residuals res = eval(z, sol.farms);
  int it = 0;
  int stalls = 0;
  for (; it < opts.max_iterations && res.max_abs() >= opts.tolerance; ++it) {
    const std::array<double, 3> base_r{res.crop, res.n, res.nonland};
    std::array<std::array<double, 3>, 3> jac{};
    for (std::size_t k = 0; k < dims; ++k) {
      std::array<double, 3> zp = z;
      zp[k] += opts.fd_step;
      const Residuals rp = eval(zp, work);
      const std::array<double, 3> col{rp.crop, rp.n, rp.nonland};
      for (std::size_t m = 0; m < dims; ++m) {
        jac[m][k] = (col[m] - base_r[m]) / opts.fd_step;
      }
    }
    std::array<double, 3> step{-base_r[0], -base_r[1], -base_r[2]};
    if (!detail::solve_linear(jac, step, dims)) {
      sol.diag.converged = false;
      break;
    }
    double mx = 0.0;
    for (std::size_t k = 0; k < dims; ++k) mx = std::max(mx, std::abs(step[k]));
    if (mx > opts.max_log_step) {
      for (std::size_t k = 0; k < dims; ++k) step[k] *= opts.max_log_step / mx;
    }
    // Halve the step until the residual norm improves.
    double lambda = 1.0;
    Residuals cand;
    bool improved = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      std::array<double, 3> zc = z;
      for (std::size_t k = 0; k < dims; ++k) zc[k] += lambda * step[k];
      cand = eval(zc, work);
      if (cand.max_abs() < res.max_abs() * (1.0 - 1e-4) ||
          cand.max_abs() < opts.tolerance) {
        z = zc;
        res = cand;
        sol.farms.swap(work);
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      if (++stalls >= 3) break;
      // Accept the fully damped step anyway and keep going.
      for (std::size_t k = 0; k < dims; ++k) z[k] += lambda * step[k];
      res = eval(z, sol.farms);
    } else {
      stalls = 0;
    }
  }

  sol.residuals = res;
  sol.diag.iterations = it;
  sol.diag.max_residual = res.max_abs();
  sol.diag.converged = res.max_abs() < opts.tolerance;

  MarketSystem& mk = sol.markets;
  mk.crop_price0 = p0[0];
  mk.n_price0 = p0[1];
  mk.nonland_price0 = p0[2];
  mk.crop_price = price(0);
  mk.n_price = price(1);
  mk.nonland_price = price(2);

  KahanSum sq, sn, sm, revenue, payments;
  for (const auto& s : sol.farms) {
    sq.add(s.output);
    sn.add(s.n_tons);
    sm.add(s.nonland);
    sol.diag.farm_fallbacks += s.used_fallback ? 1 : 0;
    sol.diag.leach_clamps += s.leach_clamped ? 1 : 0;
    sol.diag.leach_range_violations += s.leach_out_of_range ? 1 : 0;
    revenue.add(mk.crop_price * s.output);
    payments.add(s.rent * s.land + s.water_rent * s.water +
                 mk.nonland_price * s.nonland + s.eff_n_price * s.n_tons);
  }
  // Per-farm extra land costs (BMP wedges) are part of the farm's outlays.
  for (std::size_t i = 0; i < sol.farms.size(); ++i) {
    payments.add(shocks.land_wedge[i] * sol.farms[i].land);
  }
  mk.crop_quantity = sq.value();
  mk.n_quantity = sn.value();
  mk.nonland_quantity = sm.value();
  sol.diag.value_identity_residual =
      std::abs(revenue.value() - payments.value()) /
      std::max(revenue.value(), 1e-300);
  return sol;
}

inline EquilibriumSolution solve(const CalibratedEconomy& econ,
                                 const PolicyScenario& scenario,
                                 const SolverOptions& opts = {},
                                 const WetlandParams& wp = {},
                                 const CdrTable& cdr = {}) {
  return solve(econ, resolve_scenario(scenario, econ, wp, cdr), opts);
}

// ---------------------------------------------------------------------------
// Validation closure: target a crop price, back out the neutral productivity
// shift that delivers it, and report the implied quantity changes.

struct ClosureResult {
  double tfp_shift = 1.0;
  EquilibriumSolution solution;
};

inline ClosureResult target_price_closure(const CalibratedEconomy& econ,
                                          double target_price,
                                          const SolverOptions& opts = {}) {
  if (!(target_price > 0.0)) {
    throw std::invalid_argument("target_price_closure: target must be > 0");
  }
  auto solve_at = [&](double tfp) {
    ScenarioShocks s = null_shocks(econ);
    s.label = "closure";
    s.tfp = tfp;
    EquilibriumSolution sol = solve(econ, s, opts);
    if (!sol.diag.converged) {
      throw std::runtime_error("target_price_closure: equilibrium solve failed");
    }
    return sol;
  };

  const double rel_tol = 1e-6;
  ClosureResult out;
  out.solution = solve_at(1.0);
  if (std::abs(out.solution.markets.crop_price - target_price) <=
      rel_tol * target_price) {
    out.tfp_shift = 1.0;
    return out;
  }
  // Crop price falls as productivity rises; bisect the shift until the
  // bracket collapses well past the price tolerance.
  double lo = 0.25, hi = 4.0;
  if (!(solve_at(hi).markets.crop_price <= target_price &&
        target_price <= solve_at(lo).markets.crop_price)) {
    throw std::runtime_error("target_price_closure: target price outside the "
                             "feasible band");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (solve_at(mid).markets.crop_price > target_price ? lo : hi) = mid;
  }
  out.tfp_shift = 0.5 * (lo + hi);
  out.solution = solve_at(out.tfp_shift);
  if (std::abs(out.solution.markets.crop_price - target_price) >
      rel_tol * target_price) {
    throw std::runtime_error("target_price_closure: root finding failed to "
                             "reach the target price");
  }
  return out;
}

}  // namespace nleach

#endif
