#include <catch2/catch_amalgamated.hpp>

#include "nleach/leaching.hpp"
#include "nleach/rng.hpp"

using nleach::ClampCounter;
using nleach::LeachingResponse;
using nleach::LeachingTax;

TEST_CASE("quadratic leaching rate") {
  LeachingResponse lr{0.2, 0.001, 180.0};

  CHECK(nleach::leaching_rate(lr, 0.0) == 0.0);
  CHECK(nleach::leaching_rate(lr, 100.0) == Catch::Approx(30.0).epsilon(1e-14));
  CHECK_THROWS_AS(nleach::leaching_rate(lr, 200.0), std::domain_error);
  CHECK_THROWS_AS(nleach::leaching_rate(lr, -5.0), std::domain_error);

  SECTION("intensity stays within [0,1] across the range") {
    for (double n = 1.0; n <= 180.0; n += 1.0) {
      const double theta = nleach::leaching_intensity(lr, n);
      CHECK(theta >= 0.0);
      CHECK(theta <= 1.0);
    }
  }
}

TEST_CASE("leaching intensity") {
  LeachingResponse lr{0.2, 0.001, 180.0};
  CHECK(nleach::leaching_intensity(lr, 100.0) == Catch::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(nleach::leaching_intensity(lr, 0.0), std::domain_error);

  SECTION("pure linear response has constant intensity") {
    LeachingResponse lin{0.25, 0.0, 300.0};
    for (double n : {1.0, 50.0, 299.0}) {
      CHECK(nleach::leaching_intensity(lin, n) == Catch::Approx(0.25).epsilon(1e-14));
    }
  }
}

TEST_CASE("clamping to the physical band is counted, not silent") {
  ClampCounter clamps;
  SECTION("above n") {
    LeachingResponse hot{0.9, 0.01, 100.0};  // escapes the [0,n] band
    const double v = nleach::leaching_rate_raw(hot, 50.0, &clamps);
    CHECK(v == 50.0);
    CHECK(clamps.high == 1);
  }
  SECTION("below zero") {
    LeachingResponse neg{0.1, -0.01, 100.0};
    const double v = nleach::leaching_rate_raw(neg, 20.0, &clamps);
    CHECK(v == 0.0);
    CHECK(clamps.low == 1);
  }
}

TEST_CASE("effective N price wedge") {
  LeachingTax tax{100.0};
  CHECK(nleach::effective_n_price(210.0, 0.0, tax) == 210.0);
  CHECK(nleach::effective_n_price(210.0, 0.5, LeachingTax{0.0}) == 210.0);
  CHECK(nleach::effective_n_price(210.0, 0.5, tax) == Catch::Approx(260.0).epsilon(1e-14));
  CHECK_THROWS_AS(nleach::effective_n_price(210.0, 1.5, tax), std::domain_error);

  SECTION("nondecreasing in theta and in the tax rate") {
    nleach::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
      const double theta = rng.uniform(0.0, 1.0);
      const double rate = rng.uniform(0.0, 500.0);
      const double p = nleach::effective_n_price(210.0, theta, LeachingTax{rate});
      const double p_theta = nleach::effective_n_price(
          210.0, std::min(1.0, theta + 0.1), LeachingTax{rate});
      const double p_rate =
          nleach::effective_n_price(210.0, theta, LeachingTax{rate + 50.0});
      CHECK(p_theta >= p);
      CHECK(p_rate >= p);
    }
  }
}
