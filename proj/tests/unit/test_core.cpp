#include <cmath>
#include <cstring>

#include "doctest.h"
#include "lorenzlab/core.hpp"

using namespace lorenzlab;

TEST_CASE("derived constants for sigma=10, beta=8/3, rho=1/2") {
  Params p{10, 8.0 / 3.0, 0.5, 0};
  auto c = derive_constants(p);
  CHECK(c.chi == doctest::Approx(2.0 / 11.0).epsilon(1e-15));
  CHECK(c.eta == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(c.gamma == doctest::Approx(16.0 / 33.0).epsilon(1e-15));
  CHECK(c.nu == doctest::Approx(0.0445752).epsilon(1e-6));
  CHECK(c.z_star == doctest::Approx(1.834711).epsilon(1e-6));
  CHECK(c.alpha == 0.0);
}

TEST_CASE("rho = 1 gives z* = 2 exactly") {
  auto c = derive_constants({10, 8.0 / 3.0, 1.0, 0});
  CHECK(c.z_star == 2.0);
}

TEST_CASE("alpha from alpha_hat") {
  auto c = derive_constants({10, 8.0 / 3.0, 0.5, 27.7});
  CHECK(c.alpha == doctest::Approx(3.9046).epsilon(1e-4));
  CHECK(c.alpha == doctest::Approx(c.nu * std::sqrt(10.0) * 27.7).epsilon(1e-15));
}

TEST_CASE("derive_constants rejects bad sigma and beta") {
  CHECK_THROWS_AS(derive_constants({0, 1, 0.5, 1}), InvalidParameter);
  CHECK_THROWS_AS(derive_constants({-1, 1, 0.5, 1}), InvalidParameter);
  CHECK_THROWS_AS(derive_constants({10, 0, 0.5, 1}), InvalidParameter);
  CHECK_THROWS_AS(derive_constants({10, 1, 0.5, -1}), InvalidParameter);
}

TEST_CASE("validate_params") {
  CHECK(validate_params({10, 8.0 / 3.0, 0.5, 30}).ok());
  CHECK(validate_params({10, 8.0 / 3.0, 0.5, 0}).ok());
  auto r = validate_params({-1, 8.0 / 3.0, 0.5, 1});
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].field == "sigma");
  CHECK(r.issues[0].message == "sigma must be positive");
  auto r2 = validate_params({-1, -2, NAN, -3});
  CHECK(r2.issues.size() == 4);
}

TEST_CASE("derive_constants is bit-identical across calls") {
  Params p{7.3, 1.1, -0.4, 12.5};
  auto a = derive_constants(p), b = derive_constants(p);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("alpha_hat round trip") {
  Params p{10, 8.0 / 3.0, 0.5, 0};
  for (double ah : {0.25, 1.0, 27.04, 40.0, 1234.5}) {
    double a = alpha_from_hat(p, ah);
    CHECK(hat_from_alpha(p, a) == doctest::Approx(ah).epsilon(1e-15));
  }
  auto m = Model::from_transformed(p, 100.0);
  CHECK(m.alpha() == 100.0);
  CHECK(alpha_from_hat(p, m.alpha_hat()) == doctest::Approx(100.0).epsilon(1e-14));
}
