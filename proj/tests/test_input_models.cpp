#include "pacefair/errors.hpp"
#include "pacefair/input_models.hpp"

#include <doctest.h>

#include <algorithm>

using namespace pacefair;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}
Matrix rows(std::initializer_list<std::initializer_list<double>> rs) {
  Matrix out(static_cast<Index>(rs.size()), static_cast<Index>(rs.begin()->size()));
  Index i = 0;
  for (auto r : rs) out.row(i++) = vec(r).transpose();
  return out;
}
}  // namespace

TEST_CASE("model kind names round-trip") {
  for (auto kind : {ModelKind::iid, ModelKind::corrupted, ModelKind::markov, ModelKind::periodic}) {
    CHECK(parse_model_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_model_kind("adversarial"), InvalidArgument);
}

TEST_CASE("tv distance") {
  CHECK(tv_distance(vec({0.2, 0.8}), vec({0.2, 0.8})) == 0.0);
  CHECK(tv_distance(vec({1, 0}), vec({0, 1})) == doctest::Approx(1.0));
  CHECK(tv_distance(vec({0.5, 0.5}), vec({0.75, 0.25})) == doctest::Approx(0.25));
  CHECK_THROWS_AS(tv_distance(vec({1}), vec({0.5, 0.5})), LengthMismatch);
}

TEST_CASE("categorical sampling skips zero-mass items") {
  const Vector cdf = vec({0.0, 0.5, 0.5, 1.0});
  CHECK(sample_categorical(cdf, 0.0) == 1);
  CHECK(sample_categorical(cdf, 0.49) == 1);
  CHECK(sample_categorical(cdf, 0.5) == 3);
  CHECK(sample_categorical(vec({0.3, 0.999999}), 0.9999995) == 1);
}

TEST_CASE("degenerate sequences") {
  SUBCASE("iid point mass") {
    const auto model = InputModel::iid(ReferenceDistribution::point_mass(5, 3));
    CHECK(sample_sequence(model, 5, 11).items == std::vector<std::int32_t>{3, 3, 3, 3, 3});
  }
  SUBCASE("absorbing markov chain") {
    const auto model =
        InputModel::markov(ReferenceDistribution::point_mass(3, 0), Matrix::Identity(3, 3));
    CHECK(sample_sequence(model, 4, 5).items == std::vector<std::int32_t>{0, 0, 0, 0});
  }
  SUBCASE("periodic point masses: one of each per block") {
    const Matrix dists = rows({{0, 1, 0}, {0, 0, 1}});
    const auto model = InputModel::periodic(dists, 3);
    bool saw_12 = false, saw_21 = false;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      const auto seq = sample_sequence(model, 4, seed).items;
      REQUIRE(seq.size() == 4);
      for (std::size_t b = 0; b < 4; b += 2) {
        std::vector<std::int32_t> block{seq[b], seq[b + 1]};
        std::sort(block.begin(), block.end());
        CHECK(block == std::vector<std::int32_t>{1, 2});
        if (seq[b] == 1) saw_12 = true; else saw_21 = true;
      }
    }
    CHECK(saw_12);
    CHECK(saw_21);
  }
}

TEST_CASE("periodic truncates the last block") {
  const auto model = InputModel::periodic(rows({{1, 0}, {0, 1}, {1, 0}}), 9);
  CHECK(sample_sequence(model, 7, 1).horizon() == 7);
}

TEST_CASE("sampling is deterministic per seed and rejects bad horizons") {
  const auto model = InputModel::iid(random_distribution(20, 4));
  CHECK(sample_sequence(model, 200, 9).items == sample_sequence(model, 200, 9).items);
  CHECK(sample_sequence(model, 200, 9).items != sample_sequence(model, 200, 10).items);
  CHECK_THROWS_AS(sample_sequence(model, 0, 1), InvalidHorizon);
}

TEST_CASE("iid empirical frequencies approach the base distribution") {
  const auto base = ReferenceDistribution(vec({0.1, 0.2, 0.3, 0.4}));
  const auto seq = sample_sequence(InputModel::iid(base), 200000, 17);
  const Vector f = seq.frequencies(4);
  CHECK(tv_distance(f, base.probs()) < 0.01);
}

TEST_CASE("model construction errors") {
  CHECK_THROWS_AS(InputModel::markov(ReferenceDistribution::uniform(2), rows({{0.5, 0.6}, {0.5, 0.5}})),
                  InvalidArgument);
  CHECK_THROWS_AS(InputModel::markov(ReferenceDistribution::uniform(3), Matrix::Identity(2, 2)),
                  DimensionMismatch);
  CHECK_THROWS_AS(InputModel::corrupted(ReferenceDistribution(vec({0.9, 0.1})),
                                        {CorruptionKind::budgeted, 0.2}, 1),
                  InvalidArgument);
  CHECK_THROWS_AS(InputModel::corrupted(ReferenceDistribution::uniform(2),
                                        {CorruptionKind::decaying, -1.0}, 1),
                  InvalidArgument);
}

TEST_CASE("corrupted step distributions") {
  const ReferenceDistribution s0(vec({0.1, 0.2, 0.3, 0.4}));
  SUBCASE("budgeted hits the TV target exactly") {
    const auto model = InputModel::corrupted(s0, {CorruptionKind::budgeted, 0.05}, 8);
    for (std::int64_t tau = 1; tau <= 50; ++tau) {
      const Vector s = model.step_distribution(tau);
      CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(tv_distance(s, s0.probs()) == doctest::Approx(0.05).epsilon(1e-12));
    }
  }
  SUBCASE("decaying shrinks like 1/tau") {
    const auto model = InputModel::corrupted(s0, {CorruptionKind::decaying, 1.0}, 8);
    CHECK(tv_distance(model.step_distribution(1000), s0.probs()) < 1e-3);
    const auto report = nonstationarity_report(model, 2000, {});
    CHECK(report.delta_avg > 0.0);
    CHECK(report.delta_avg < 0.05);
  }
  SUBCASE("zero amount is iid") {
    const auto model = InputModel::corrupted(s0, {CorruptionKind::budgeted, 0.0}, 8);
    CHECK(nonstationarity_report(model, 100, {}).delta_avg == 0.0);
  }
}

TEST_CASE("stationary distribution") {
  SUBCASE("rank-one chain") {
    const Matrix p = rows({{0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}});
    CHECK(stationary_distribution(p).probs().isApprox(vec({0.2, 0.5, 0.3}), 1e-12));
  }
  SUBCASE("two-state balance equations") {
    const auto pi = stationary_distribution(rows({{0.7, 0.3}, {0.6, 0.4}}));
    CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("identity: uniform start is already a fixed point") {
    const auto pi = stationary_distribution(Matrix::Identity(3, 3));
    CHECK(pi.probs().isApprox(Vector::Constant(3, 1.0 / 3.0)));
  }
  SUBCASE("periodic chain never settles") {
    const Matrix p = rows({{0, 1, 0}, {0.5, 0, 0.5}, {0, 1, 0}});
    CHECK_THROWS_AS(stationary_distribution(p, 1e-13, 500), NoConvergence);
  }
}

TEST_CASE("reference and average marginals") {
  const auto iid = InputModel::iid(ReferenceDistribution(vec({0.3, 0.7})));
  CHECK(reference_distribution(iid).probs() == vec({0.3, 0.7}));
  CHECK(average_marginal(iid, 10).probs().isApprox(vec({0.3, 0.7})));

  const auto absorbing =
      InputModel::markov(ReferenceDistribution::point_mass(3, 0), Matrix::Identity(3, 3));
  CHECK(average_marginal(absorbing, 5).probs().isApprox(vec({1, 0, 0})));

  const auto periodic = InputModel::periodic(rows({{0, 1, 0}, {0, 0, 1}}));
  CHECK(average_marginal(periodic, 2).probs().isApprox(vec({0, 0.5, 0.5})));
  CHECK(reference_distribution(periodic).probs().isApprox(vec({0, 0.5, 0.5})));
}

TEST_CASE("nonstationarity report") {
  SUBCASE("iid has none") {
    const auto model = InputModel::iid(random_distribution(6, 1));
    const auto report = nonstationarity_report(model, 100, {});
    CHECK(report.delta_avg == 0.0);
    CHECK(report.epsilon_of_iota.empty());
    CHECK_FALSE(report.delta_block.has_value());
  }
  SUBCASE("periodic block averages equal the period average") {
    const auto model = InputModel::periodic(random_period_dists(5, 8, 2), 1);
    const auto report = nonstationarity_report(model, 103, {});
    REQUIRE(report.delta_block.has_value());
    CHECK(*report.delta_block == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("markov epsilon(1) by hand") {
    const auto model = InputModel::markov(ReferenceDistribution::uniform(2), rows({{0.7, 0.3}, {0.6, 0.4}}));
    const auto report = nonstationarity_report(model, 50, {0, 1, 5});
    REQUIRE(report.epsilon_of_iota.size() == 3);
    CHECK(report.epsilon_of_iota[1].first == 1);
    CHECK(report.epsilon_of_iota[1].second == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
    CHECK(report.epsilon_of_iota[2].second < report.epsilon_of_iota[1].second);
    CHECK(report.delta_avg > 0.0);
  }
}

TEST_CASE("random generators") {
  const auto d = random_distribution(10, 3, 4.0);
  CHECK(d.probs().minCoeff() > 0.0);
  CHECK(d.probs().sum() == doctest::Approx(1.0));
  const Matrix p = random_transition(5, 3);
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(random_period_dists(4, 6, 1).rows() == 4);
}
