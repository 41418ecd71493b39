#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "tariff/model.hpp"

using namespace tariff;

TEST_CASE("bill of zero consumption is zero") {
  Instance inst = oracle::random_instance(1, {1, 2, 3});
  inst.E[0].row(1).setZero();
  PriceVector x(2, 3);
  x.x.setConstant(7.5);
  CHECK(bill(inst, 0, 1, x) == 0.0);
}

TEST_CASE("bill with a scalar attribute") {
  Instance inst = oracle::random_instance(2, {1, 1, 1});
  inst.E[0](0, 0) = 2.0;
  PriceVector x(1, 1);
  x.x(0, 0) = 3.0;
  CHECK(bill(inst, 0, 0, x) == 6.0);
}

TEST_CASE("bill matches a hand-written dot product") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    Instance inst = oracle::random_instance(100 + k, {2, 3, 4});
    PriceVector x = oracle::random_price(inst, rng);
    for (int s = 0; s < inst.S; ++s)
      for (int w = 0; w < inst.W; ++w) {
        double ref = 0.0;
        for (int h = 0; h < inst.H; ++h) ref += inst.E[s](w, h) * x.x(w, h);
        CHECK(bill(inst, s, w, x) == doctest::Approx(ref).epsilon(1e-12));
      }
  }
}

TEST_CASE("bill is linear in the prices") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  Instance inst = oracle::random_instance(5, {3, 2, 3});
  for (int k = 0; k < 100; ++k) {
    PriceVector a = oracle::random_price(inst, rng), b = oracle::random_price(inst, rng);
    double t = ua(rng);
    PriceVector mix(PriceMatrix(t * a.x + (1 - t) * b.x));
    for (int s = 0; s < inst.S; ++s)
      for (int w = 0; w < inst.W; ++w)
        CHECK(std::abs(bill(inst, s, w, mix) -
                       (t * bill(inst, s, w, a) + (1 - t) * bill(inst, s, w, b))) <= 1e-12);
  }
}

TEST_CASE("disutility is zero at no-purchase and at the reservation bill") {
  std::mt19937_64 rng(6);
  Instance inst = oracle::random_instance(7, {2, 2, 2});
  for (int k = 0; k < 20; ++k) {
    PriceVector x = oracle::random_price(inst, rng);
    for (int s = 0; s < inst.S; ++s) {
      auto V = disutility(inst, s, x);
      CHECK(V(0) == 0.0);
      for (int w = 0; w < inst.W; ++w)
        CHECK(V(w + 1) == doctest::Approx(bill(inst, s, w, x) - inst.R(s, w)).epsilon(1e-14));
    }
  }
  PriceVector x = oracle::random_price(inst, rng);
  inst.R(1, 0) = bill(inst, 1, 0, x);
  CHECK(disutility(inst, 1, x)(1) == 0.0);
}

TEST_CASE("affine forms agree with direct evaluation") {
  std::mt19937_64 rng(8);
  Instance inst = oracle::random_instance(9, {2, 3, 2});
  PriceVector x = oracle::random_price(inst, rng);
  for (int s = 0; s < inst.S; ++s) {
    auto V = disutility(inst, s, x);
    for (int o = 0; o <= inst.W; ++o) CHECK(disutility_form(inst, s, o)(x.flat()) == doctest::Approx(V(o)));
    for (int o = 1; o <= inst.W; ++o)
      CHECK(margin_form(inst, s, o)(x.flat()) ==
            doctest::Approx(bill(inst, s, o - 1, x) - inst.C(s, o - 1)));
  }
  CHECK_THROWS_AS(margin_form(inst, 0, 0), std::invalid_argument);
}

TEST_CASE("validate accepts a well-formed instance") {
  CHECK(validate(oracle::random_instance(10, {3, 2, 2})).empty());
}

TEST_CASE("validate reports a negative consumption entry") {
  Instance inst = oracle::random_instance(11, {2, 2, 2});
  inst.E[1](0, 1) = -0.5;
  auto v = validate(inst);
  REQUIRE(v.size() == 1);
  CHECK(v[0].message == "E[1][0][1] < 0");
}

TEST_CASE("validate reports an empty box and an empty polytope") {
  Instance inst = oracle::random_instance(12, {1, 1, 2});
  inst.X.lower(0, 1) = 5.0;
  auto v = validate(inst);
  REQUIRE(v.size() == 1);
  CHECK(v[0].message == "empty polytope");

  Instance inst2 = oracle::random_instance(12, {1, 1, 2});
  inst2.X.extra.push_back({{1.0, 1.0}, -1.0});  // x0 + x1 <= -1 with x >= 0
  auto v2 = validate(inst2);
  REQUIRE(v2.size() == 1);
  CHECK(v2[0].message == "empty polytope");
}

TEST_CASE("validate reports dimension and weight problems without throwing") {
  Instance inst = oracle::random_instance(13, {2, 2, 2});
  inst.rho(0) = 0.0;
  inst.R.resize(1, 2);
  auto v = validate(inst);
  CHECK(v.size() == 2);
}

TEST_CASE("patterns reject empty rows") {
  CHECK_THROWS_AS(Pattern({{1, 0}, {0, 0}}), std::invalid_argument);
  Pattern p({{1, 0, 0}, {0, 1, 1}});
  CHECK(p.total() == 3);
  CHECK_FALSE(p.is_pure());
  CHECK(Pattern::pure({0, 2}, 3).is_pure());
  CHECK(p.to_string() == "100|011");
  CHECK_THROWS_AS(p.flipped(0, 0), std::invalid_argument);
  CHECK(p.flipped(1, 0).to_string() == "100|111");
  CHECK(p.hash() != p.flipped(1, 0).hash());
}

TEST_CASE("polytope membership and midpoint") {
  Instance inst = oracle::random_instance(14, {1, 2, 2});
  PriceVector m = inst.X.midpoint();
  CHECK(inst.X.contains(m));
  m.x(0, 0) = 4.0 + 1e-9;
  CHECK(inst.X.contains(m));
  m.x(0, 0) = 4.0 + 1e-6;
  CHECK_FALSE(inst.X.contains(m));
}
