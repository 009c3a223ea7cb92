#include "pacefair/market.hpp"

#include "pacefair/errors.hpp"

#include <cmath>
#include <string>

namespace pacefair {

namespace {

constexpr double kSimplexTol = 1e-12;

}  // namespace

ReferenceDistribution::ReferenceDistribution(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0) throw InvalidArgument("distribution must have at least one entry");
  if (!probs_.allFinite() || (probs_.array() < 0.0).any()) {
    throw InvalidArgument("distribution entries must be finite and nonnegative");
  }
  if (std::abs(probs_.sum() - 1.0) > kSimplexTol) {
    throw InvalidArgument("distribution must sum to 1, got " + std::to_string(probs_.sum()));
  }
}

ReferenceDistribution ReferenceDistribution::uniform(Index m) {
  if (m <= 0) throw InvalidArgument("item universe must be nonempty");
  return ReferenceDistribution(Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

ReferenceDistribution ReferenceDistribution::point_mass(Index m, Index item) {
  if (item < 0 || item >= m) throw InvalidArgument("point mass outside the item universe");
  Vector p = Vector::Zero(m);
  p(item) = 1.0;
  return ReferenceDistribution(std::move(p));
}

ReferenceDistribution ReferenceDistribution::normalized(const Vector& weights) {
  if (weights.size() == 0 || !weights.allFinite() || (weights.array() < 0.0).any()) {
    throw InvalidArgument("weights must be finite and nonnegative");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) throw InvalidArgument("weights must have positive sum");
  Vector p = weights / total;
  // Push the rounding residue onto the largest entry so the sum is 1 to the last ulp or two.
  Index top = 0;
  p.maxCoeff(&top);
  p(top) += 1.0 - p.sum();
  if (p(top) < 0.0) p(top) = 0.0;
  return ReferenceDistribution(std::move(p));
}

void ItemSequence::validate(Index m) const {
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k] < 0 || items[k] >= m) {
      throw DimensionMismatch("item " + std::to_string(items[k]) + " at step " +
                              std::to_string(k + 1) + " outside universe of size " +
                              std::to_string(m));
    }
  }
}

Vector ItemSequence::frequencies(Index m) const {
  validate(m);
  if (items.empty()) throw InvalidHorizon("empty item sequence has no frequencies");
  Vector counts = Vector::Zero(m);
  for (auto item : items) counts(item) += 1.0;
  return counts / static_cast<double>(items.size());
}

MarketInstance::MarketInstance(ValuationMatrix valuations)
    : MarketInstance(valuations,
                     Vector::Constant(valuations.rows(),
                                      valuations.rows() > 0
                                          ? 1.0 / static_cast<double>(valuations.rows())
                                          : 0.0)) {}

MarketInstance::MarketInstance(ValuationMatrix valuations, Vector budgets)
    : valuations_(std::move(valuations)), budgets_(std::move(budgets)) {
  if (valuations_.rows() <= 0 || valuations_.cols() <= 0) {
    throw InvalidArgument("market needs at least one agent and one item");
  }
  if (budgets_.size() != valuations_.rows()) {
    throw DimensionMismatch("budgets length differs from agent count");
  }
  if (!valuations_.allFinite() || (valuations_.array() < 0.0).any()) {
    throw InvalidArgument("valuations must be finite and nonnegative");
  }
  for (Index i = 0; i < valuations_.rows(); ++i) {
    if (!(valuations_.row(i).maxCoeff() > 0.0)) {
      throw InvalidArgument("agent " + std::to_string(i) + " values every item at zero");
    }
  }
  if (!budgets_.allFinite() || (budgets_.array() <= 0.0).any()) {
    throw InvalidArgument("budgets must be finite and positive");
  }
}

ValuationMatrix normalize_valuations(const ValuationMatrix& valuations,
                                     const ReferenceDistribution& ref) {
  if (valuations.cols() != ref.size()) {
    throw DimensionMismatch("reference distribution length differs from item count");
  }
  const Vector expected = valuations * ref.probs();
  ValuationMatrix out(valuations.rows(), valuations.cols());
  for (Index i = 0; i < valuations.rows(); ++i) {
    if (!(expected(i) > 0.0)) {
      throw ZeroExpectedValue("agent " + std::to_string(i) +
                              " has zero expected value under the reference distribution");
    }
    out.row(i) = valuations.row(i) / expected(i);
  }
  return out;
}

Vector proportional_share_utilities(const MarketInstance& instance, const ItemSequence& seq) {
  seq.validate(instance.m());
  if (seq.items.empty()) throw InvalidHorizon("empty item sequence");
  Vector total = Vector::Zero(instance.n());
  for (auto item : seq.items) total += instance.item_values(item);
  return instance.budgets().cwiseProduct(total) / static_cast<double>(seq.horizon());
}

}  // namespace pacefair
