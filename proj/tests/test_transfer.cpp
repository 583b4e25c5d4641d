#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nleach/rng.hpp"
#include "nleach/transfer.hpp"

using nleach::TransferFunction;
using nleach::yield_at;
using nleach::yield_derivatives;

namespace {

// Random curve with curvature bounded away from the inflection. k = b*c^n is
// the log headroom to the asymptote at the evaluation point.
struct Draw {
  TransferFunction tf;
  double n;
};

Draw random_draw(nleach::Rng& rng, double k_lo = 0.05, double k_hi = 0.85) {
  Draw d;
  d.n = rng.uniform(50.0, 250.0);
  d.tf.a = rng.lognormal(std::log(10000.0), 0.2);
  d.tf.c = rng.uniform(0.95, 0.99);
  const double k = rng.uniform(k_lo, k_hi);
  d.tf.b = k / std::pow(d.tf.c, d.n);
  return d;
}

double fd_first(const TransferFunction& tf, double n, double h) {
  return (yield_at(tf, n + h) - yield_at(tf, n - h)) / (2.0 * h);
}

double fd_second(const TransferFunction& tf, double n, double h) {
  return (yield_at(tf, n + h) - 2.0 * yield_at(tf, n) + yield_at(tf, n - h)) /
         (h * h);
}

// Two-argument form F(L,N) = L * f(N/L).
double bivariate_output(const TransferFunction& tf, double land, double n_total) {
  return land * yield_at(tf, n_total / land);
}

}  // namespace

TEST_CASE("yield_at closed form") {
  TransferFunction tf{10000.0, 2.0, 0.97};

  SECTION("at n = 0 the exponent collapses to -b") {
    CHECK(yield_at(tf, 0.0) == Catch::Approx(10000.0 * std::exp(-2.0)).epsilon(1e-14));
  }
  SECTION("approaches the asymptote from below at large n") {
    const double y = yield_at(tf, 400.0);
    CHECK(y < tf.a);
    CHECK(y > 0.9999 * tf.a);
    CHECK(yield_at(tf, 500.0) > y);
  }
  SECTION("matches an independently computed high-precision value") {
    // a*exp(-b*c^n) at (10000, 2, 0.97, 150), evaluated with 40-digit
    // arithmetic.
    CHECK(yield_at(tf, 150.0) ==
          Catch::Approx(9794.744653737690744).epsilon(1e-14));
  }
  SECTION("rejects negative rates") {
    CHECK_THROWS_AS(yield_at(tf, -1.0), std::domain_error);
  }
}

TEST_CASE("yield derivatives match the frozen point values") {
  TransferFunction tf{10000.0, 2.0, 0.97};
  const auto d = yield_derivatives(tf, 150.0);
  CHECK(d.f == Catch::Approx(9794.744653737690744).epsilon(1e-14));
  CHECK(d.fp == Catch::Approx(6.187309680824534).epsilon(1e-13));
  CHECK(d.fpp == Catch::Approx(-0.18455204509246035).epsilon(1e-13));
}

TEST_CASE("degenerate flat curve: c = 1 gives zero derivatives") {
  TransferFunction flat{8000.0, 1.0, 1.0};
  const auto d = yield_derivatives(flat, 120.0);
  CHECK(d.fp == 0.0);
  CHECK(d.fpp == 0.0);
  CHECK(nleach::marginal_product(flat, 120.0) == 0.0);
}

TEST_CASE("analytic derivatives agree with finite differences") {
  nleach::Rng rng(20240517);
  for (int i = 0; i < 1000; ++i) {
    const Draw d = random_draw(rng);
    const auto an = yield_derivatives(d.tf, d.n);
    const double h = 1e-4 * d.n;
    CHECK(an.fp == Catch::Approx(fd_first(d.tf, d.n, h)).epsilon(1e-6));
    CHECK(an.fpp == Catch::Approx(fd_second(d.tf, d.n, h)).epsilon(1e-4));
  }
}

TEST_CASE("marginal product reproduces the baseline worked example") {
  // Find the rate where one more ton of N yields 20 more tons of output;
  // at $26.78/ton that extra output is worth $535.60.
  TransferFunction tf{12000.0, 3.0, 0.975};
  double lo = 1.0, hi = 400.0;
  REQUIRE(nleach::marginal_product(tf, lo) > 20.0);
  REQUIRE(nleach::marginal_product(tf, hi) < 20.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (nleach::marginal_product(tf, mid) > 20.0 ? lo : hi) = mid;
  }
  const double mp = nleach::marginal_product(tf, 0.5 * (lo + hi));
  CHECK(mp == Catch::Approx(20.0).epsilon(1e-10));
  CHECK(mp * 26.78 == Catch::Approx(535.6).epsilon(1e-9));
}

TEST_CASE("two-argument form has constant returns to scale") {
  TransferFunction tf{9500.0, 1.5, 0.97};
  nleach::Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const double land = rng.uniform(0.5, 4.0);
    const double n_total = rng.uniform(50.0, 500.0);
    const double f1 = bivariate_output(tf, land, n_total);
    const double f2 = bivariate_output(tf, 2.0 * land, 2.0 * n_total);
    CHECK(f2 == Catch::Approx(2.0 * f1).epsilon(1e-12));
  }
}

TEST_CASE("sigma_land_n equals the bivariate construction") {
  nleach::Rng rng(99);
  int checked = 0;
  while (checked < 100) {
    const Draw d = random_draw(rng, 0.08, 0.80);
    const auto an = yield_derivatives(d.tf, d.n);
    if (std::abs(an.fpp) < 1e-6) continue;  // keep curvature well away from 0
    ++checked;

    const double sigma = nleach::sigma_land_n(d.tf, d.n);

    // sigma = F_L * F_N / (F * F_LN) with numerical partials at (L=1, N=n).
    const double land = 1.0, n_total = d.n;
    const double hl = 1e-4 * land, hn = 1e-4 * n_total;
    const double f_val = bivariate_output(d.tf, land, n_total);
    const double f_l = (bivariate_output(d.tf, land + hl, n_total) -
                        bivariate_output(d.tf, land - hl, n_total)) /
                       (2.0 * hl);
    const double f_n = (bivariate_output(d.tf, land, n_total + hn) -
                        bivariate_output(d.tf, land, n_total - hn)) /
                       (2.0 * hn);
    const double f_ln = (bivariate_output(d.tf, land + hl, n_total + hn) -
                         bivariate_output(d.tf, land + hl, n_total - hn) -
                         bivariate_output(d.tf, land - hl, n_total + hn) +
                         bivariate_output(d.tf, land - hl, n_total - hn)) /
                        (4.0 * hl * hn);
    const double sigma_fd = f_l * f_n / (f_val * f_ln);
    CHECK(sigma == Catch::Approx(sigma_fd).epsilon(1e-4));
  }
}

TEST_CASE("sigma_land_n error cases") {
  TransferFunction tf{10000.0, 2.0, 0.97};
  SECTION("n = 0 rejected") {
    CHECK_THROWS_AS(nleach::sigma_land_n(tf, 0.0), std::domain_error);
  }
  SECTION("vanishing curvature at b*c^n = 1") {
    const double n = 150.0;
    TransferFunction degen{10000.0, 1.0 / std::pow(0.97, n), 0.97};
    CHECK_THROWS_WITH(nleach::sigma_land_n(degen, n),
                      Catch::Matchers::ContainsSubstring("degenerate curvature"));
  }
  SECTION("positive in the diminishing-returns region") {
    nleach::Rng rng(5);
    int checked = 0;
    while (checked < 50) {
      const Draw d = random_draw(rng, 0.05, 0.60);
      const auto an = yield_derivatives(d.tf, d.n);
      // Region of interest: concave in N with both marginal products positive.
      if (!(an.fpp < -1e-9 && an.f - d.n * an.fp > 0.0)) continue;
      ++checked;
      CHECK(nleach::sigma_land_n(d.tf, d.n) > 0.0);
    }
  }
}
