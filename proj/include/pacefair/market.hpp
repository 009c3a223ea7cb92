#pragma once

#include "pacefair/types.hpp"

#include <cstdint>
#include <vector>

namespace pacefair {

/// Finite categorical distribution over the item universe.
class ReferenceDistribution {
 public:
  /// Throws InvalidArgument unless entries are nonnegative and sum to 1 within 1e-12.
  explicit ReferenceDistribution(Vector probs);

  static ReferenceDistribution uniform(Index m);
  static ReferenceDistribution point_mass(Index m, Index item);
  /// Rescales a nonnegative vector with positive sum onto the simplex.
  static ReferenceDistribution normalized(const Vector& weights);

  const Vector& probs() const noexcept { return probs_; }
  Index size() const noexcept { return probs_.size(); }
  double operator[](Index j) const { return probs_(j); }

 private:
  Vector probs_;
};

/// Realized arrivals: items[tau] is the index of the item revealed at step tau + 1.
struct ItemSequence {
  std::vector<std::int32_t> items;

  Index horizon() const noexcept { return static_cast<Index>(items.size()); }
  /// Throws DimensionMismatch if an index falls outside [0, m).
  void validate(Index m) const;
  /// Empirical item frequencies (length m, sums to 1).
  Vector frequencies(Index m) const;
};

/// Agents, item universe, valuations and per-step budgets.
class MarketInstance {
 public:
  /// Uniform per-step budgets 1/n.
  explicit MarketInstance(ValuationMatrix valuations);
  MarketInstance(ValuationMatrix valuations, Vector budgets);

  Index n() const noexcept { return valuations_.rows(); }
  Index m() const noexcept { return valuations_.cols(); }
  const ValuationMatrix& valuations() const noexcept { return valuations_; }
  const Vector& budgets() const noexcept { return budgets_; }
  /// |v|_inf, the largest valuation entry.
  double max_value() const noexcept { return valuations_.maxCoeff(); }

  /// Column of values for one item across all agents.
  auto item_values(Index item) const { return valuations_.col(item); }

 private:
  ValuationMatrix valuations_;
  Vector budgets_;
};

/// Scales each row so that its expectation under `ref` equals 1.
/// Throws ZeroExpectedValue if some row has zero expectation.
ValuationMatrix normalize_valuations(const ValuationMatrix& valuations,
                                     const ReferenceDistribution& ref);

/// Average utility when every arriving item is split in proportion to budgets:
/// u_i = (1/t) sum_tau B_i v_i(theta_tau).
Vector proportional_share_utilities(const MarketInstance& instance, const ItemSequence& seq);

}  // namespace pacefair
