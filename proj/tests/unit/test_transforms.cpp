#include <cmath>
#include <random>

#include "doctest.h"
#include "lorenzlab/transforms.hpp"

using namespace lorenzlab;

namespace {
const DerivedConsts C = derive_constants({10, 8.0 / 3.0, 0.5, 0});
}

TEST_CASE("to_transformed") {
  auto s = to_transformed(State::original(0, 0, 0), C);
  CHECK(s.chart == Chart::Transformed);
  CHECK(s.coords[0] == 0.0);
  CHECK(s.coords[1] == 0.0);
  CHECK(s.coords[2] == doctest::Approx(C.z_star).epsilon(1e-15));

  auto t = to_transformed(State::original(1, 1, 0), C);
  CHECK(t.coords[0] == doctest::Approx(0.245164).epsilon(1e-5));
  CHECK(t.coords[1] == 0.0);
  CHECK(t.coords[2] == doctest::Approx(1.834711).epsilon(1e-6));

  auto h = to_transformed(State::original(0, 0, 17.5), C);
  CHECK(h.coords[0] == 0.0);
  CHECK(h.coords[1] == 0.0);

  CHECK_THROWS_AS(to_transformed(State::transformed(1, 1, 1), C), DomainError);
}

TEST_CASE("from_transformed") {
  auto o = from_transformed(State::transformed(0, 0, C.z_star), C);
  CHECK(o.coords[0] == 0.0);
  CHECK(o.coords[1] == 0.0);
  CHECK(std::fabs(o.coords[2]) < 1e-14);

  double x = 0.7, z = -3.0;
  auto p = from_transformed(State::transformed(x, 0, z), C);
  CHECK(p.coords[0] == doctest::Approx(C.chi / C.nu * x).epsilon(1e-14));
  CHECK(p.coords[1] == p.coords[0]);
  CHECK(p.coords[2] == doctest::Approx((C.z_star - z) / (C.chi * C.chi * 10)).epsilon(1e-14));

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    State s = State::original(U(gen), U(gen), U(gen));
    auto back = from_transformed(to_transformed(s, C), C);
    for (int k = 0; k < 3; ++k)
      CHECK(std::fabs(back.coords[k] - s.coords[k]) <= 1e-12 * std::max(1.0, std::fabs(s.coords[k])));
  }
}

TEST_CASE("polar chart") {
  auto a = to_polar(0, 1);
  CHECK(a.r == 0.0);
  CHECK(a.theta == 0.0);
  auto b = to_polar(1, 0);
  CHECK(b.r == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
  CHECK(b.theta == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK_THROWS_AS(to_polar(0, 0), DomainError);

  auto f0 = from_polar(0, 0);
  CHECK(f0[0] == 0.0);
  CHECK(f0[1] == 1.0);
  auto f1 = from_polar(0, kPi / 2);
  CHECK(f1[0] == doctest::Approx(1.0));
  CHECK(f1[1] == doctest::Approx(-1.0));

  for (double th : {-1.3, -0.2, 0.4, 1.5}) {
    auto p = from_polar(0.3, th), q = from_polar(0.3, th + kPi);
    CHECK(q[0] == doctest::Approx(-p[0]).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(-p[1]).epsilon(1e-12));
  }
}

TEST_CASE("polar round trip on random points, theta in [-pi/2, pi/2)") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> N(0, 3);
  for (int i = 0; i < 1000; ++i) {
    double x = N(gen), y = N(gen);
    auto p = to_polar(x, y);
    CHECK(p.theta >= -kPi / 2);
    CHECK(p.theta < kPi / 2);
    auto f = from_polar(p.r, p.theta);
    CHECK(std::fabs(p.sign * f[0] - x) <= 1e-12 * std::max(1.0, std::hypot(x, y)));
    CHECK(std::fabs(p.sign * f[1] - y) <= 1e-12 * std::max(1.0, std::hypot(x, y)));
  }
}

TEST_CASE("reduce_theta") {
  CHECK(reduce_theta(kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(reduce_theta(-kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(reduce_theta(0.3 + 7 * kPi) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(reduce_theta(0.3 - 5 * kPi) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("generators") {
  const double alpha = 2.5;
  Partials d;
  d.f = C.z_star;
  d.f_z = 1;
  CHECK(apply_generator(Generator::L0, State::polar(0, 0.7, C.z_star), d, C, alpha) == 0.0);

  for (double th : {-1.2, 0.0, 0.9})
    for (double z : {-4.0, 0.5, 6.0}) {
      Partials q;
      q.f = z * z;
      q.f_z = 2 * z;
      q.f_zz = 2;
      double v = apply_generator(Generator::L0, State::polar(0, th, z), q, C, alpha);
      CHECK(v == doctest::Approx(-2 * C.gamma * z * (z - C.z_star) + alpha * alpha).epsilon(1e-13));
    }

  Partials one;
  one.f = 1;
  for (auto g : {Generator::L, Generator::L1}) {
    CHECK(apply_generator(g, State::transformed(0.3, -2, 5), one, C, alpha) == 0.0);
    CHECK(apply_generator(g, State::polar(0.3, -0.2, 5), one, C, alpha) == 0.0);
  }
  CHECK(apply_generator(Generator::L0, State::polar(0, 1, 1), one, C, alpha) == 0.0);
  CHECK_THROWS_AS(apply_generator(Generator::L0, State::transformed(0, 1, 1), one, C, alpha), DomainError);
  CHECK_THROWS_AS(apply_generator(Generator::L, State::original(0, 1, 1), one, C, alpha), DomainError);
}

TEST_CASE("generator L on f = z picks up the feedback term") {
  Partials d;
  d.f_z = 1;
  double x = 1, y = 0, z = 2;
  double v = apply_generator(Generator::L, State::transformed(x, y, z), d, C, 0.0);
  CHECK(v == doctest::Approx(-C.gamma * (2 - C.z_star) - 1.0).epsilon(1e-14));
  CHECK(v == doctest::Approx(-1.080135).epsilon(1e-5));  // quoted value is rounded
}

TEST_CASE("polar and transformed forms of L1 and L agree") {
  // f = e^{2r} = x^2 + (x+y)^2, times a function of z
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    double r = U(gen), th = U(gen), z = 3 * U(gen);
    auto xy = from_polar(r, th);
    double x = xy[0], y = xy[1];
    double h = std::sin(z), hz = std::cos(z), hzz = -std::sin(z);
    double E = x * x + (x + y) * (x + y);
    Partials tr;
    tr.f = E * h;
    tr.f_x = (2 * x + 2 * (x + y)) * h;
    tr.f_y = 2 * (x + y) * h;
    tr.f_z = E * hz;
    tr.f_zz = E * hzz;
    Partials po;
    po.f = E * h;
    po.f_r = 2 * E * h;
    po.f_theta = 0;
    po.f_z = E * hz;
    po.f_zz = E * hzz;
    for (auto g : {Generator::L1, Generator::L}) {
      double a = apply_generator(g, State::transformed(x, y, z), tr, C, 1.7);
      double b = apply_generator(g, State::polar(r, th, z), po, C, 1.7);
      CHECK(a == doctest::Approx(b).epsilon(1e-11));
    }
  }
}

TEST_CASE("apply_generator is linear in the partials") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> U(-2, 2);
  auto rnd = [&] {
    Partials p;
    p.f = U(gen), p.f_x = U(gen), p.f_y = U(gen), p.f_r = U(gen), p.f_theta = U(gen), p.f_z = U(gen),
    p.f_zz = U(gen);
    return p;
  };
  for (int i = 0; i < 50; ++i) {
    Partials a = rnd(), b = rnd();
    double s = U(gen);
    Partials ab;
    ab.f = a.f + s * b.f, ab.f_x = a.f_x + s * b.f_x, ab.f_y = a.f_y + s * b.f_y, ab.f_r = a.f_r + s * b.f_r,
    ab.f_theta = a.f_theta + s * b.f_theta, ab.f_z = a.f_z + s * b.f_z, ab.f_zz = a.f_zz + s * b.f_zz;
    for (auto g : {Generator::L, Generator::L1}) {
      State pt = State::transformed(U(gen), U(gen), 4 * U(gen));
      double lhs = apply_generator(g, pt, ab, C, 1.3);
      double rhs = apply_generator(g, pt, a, C, 1.3) + s * apply_generator(g, pt, b, C, 1.3);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    State pp = State::polar(0, U(gen), 4 * U(gen));
    double lhs = apply_generator(Generator::L0, pp, ab, C, 1.3);
    double rhs = apply_generator(Generator::L0, pp, a, C, 1.3) + s * apply_generator(Generator::L0, pp, b, C, 1.3);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}
