#include "pacefair/errors.hpp"
#include "pacefair/market.hpp"

#include <doctest.h>

using namespace pacefair;

namespace {
Matrix mat(Index r, Index c, std::initializer_list<double> xs) {
  Matrix out(r, c);
  auto it = xs.begin();
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) out(i, j) = *it++;
  return out;
}
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}
}  // namespace

TEST_CASE("reference distribution validation") {
  CHECK_NOTHROW(ReferenceDistribution(vec({0.25, 0.75})));
  CHECK_THROWS_AS(ReferenceDistribution(vec({0.5, 0.6})), InvalidArgument);
  CHECK_THROWS_AS(ReferenceDistribution(vec({-0.5, 1.5})), InvalidArgument);
  CHECK_THROWS_AS(ReferenceDistribution::point_mass(3, 3), InvalidArgument);
  const auto u = ReferenceDistribution::uniform(4);
  CHECK(u[2] == doctest::Approx(0.25));
  const auto r = ReferenceDistribution::normalized(vec({1, 3}));
  CHECK(r[1] == doctest::Approx(0.75));
}

TEST_CASE("normalize_valuations scales rows to unit expectation") {
  const ReferenceDistribution half(vec({0.5, 0.5}));
  CHECK(normalize_valuations(mat(1, 2, {1, 1}), half).isApprox(mat(1, 2, {1, 1})));
  CHECK(normalize_valuations(mat(1, 2, {2, 2}), half).isApprox(mat(1, 2, {1, 1})));
  const ReferenceDistribution skew(vec({0.25, 0.75}));
  const Matrix out = normalize_valuations(mat(1, 2, {1, 3}), skew);
  CHECK(out(0, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(out(0, 1) == doctest::Approx(1.2).epsilon(1e-14));
}

TEST_CASE("normalize_valuations rejects rows with zero expectation") {
  const auto point = ReferenceDistribution::point_mass(2, 0);
  CHECK_THROWS_AS(normalize_valuations(mat(2, 2, {1, 1, 0, 1}), point), ZeroExpectedValue);
  CHECK_THROWS_AS(normalize_valuations(mat(1, 3, {1, 1, 1}), point), DimensionMismatch);
}

TEST_CASE("market instance validation") {
  CHECK_THROWS_AS(MarketInstance(mat(1, 2, {1, -1})), InvalidArgument);
  CHECK_THROWS_AS(MarketInstance(mat(2, 2, {1, 1, 1, 1}), vec({1.0})), DimensionMismatch);
  CHECK_THROWS_AS(MarketInstance(mat(1, 2, {1, 1}), vec({0.0})), InvalidArgument);
  const MarketInstance inst(mat(2, 3, {1, 2, 3, 4, 5, 6}));
  CHECK(inst.n() == 2);
  CHECK(inst.m() == 3);
  CHECK(inst.budgets()(1) == doctest::Approx(0.5));
  CHECK(inst.max_value() == 6);
  CHECK(inst.item_values(2)(1) == 6);
}

TEST_CASE("item sequence validation and frequencies") {
  const ItemSequence seq{{0, 2, 2, 1}};
  CHECK_NOTHROW(seq.validate(3));
  CHECK_THROWS_AS(seq.validate(2), DimensionMismatch);
  const Vector f = seq.frequencies(3);
  CHECK(f(2) == doctest::Approx(0.5));
  CHECK(f.sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(ItemSequence{}.frequencies(3), InvalidHorizon);
}

TEST_CASE("proportional share utilities") {
  SUBCASE("single agent gets everything") {
    const MarketInstance inst(mat(1, 2, {1, 1}));
    const Vector u = proportional_share_utilities(inst, ItemSequence{{0, 1, 1, 0, 0}});
    CHECK(u(0) == doctest::Approx(1.0));
  }
  SUBCASE("two agents with disjoint items") {
    const MarketInstance inst(mat(2, 2, {1, 0, 0, 1}));
    const Vector u = proportional_share_utilities(inst, ItemSequence{{0, 1}});
    CHECK(u(0) == doctest::Approx(0.25));
    CHECK(u(1) == doctest::Approx(0.25));
  }
  SUBCASE("agent valuing none of the arrived items") {
    const MarketInstance inst(mat(2, 2, {1, 1, 0, 1}));
    const Vector u = proportional_share_utilities(inst, ItemSequence{{0, 0, 0}});
    CHECK(u(1) == 0.0);
    CHECK(u(0) == doctest::Approx(0.5));
  }
}
