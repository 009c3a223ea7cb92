#pragma once

// Pacing dynamics: every arriving item is sold in a first-price auction where agent i
// bids beta_i v_i(item); the multiplier then tracks 1/(n * average utility), projected
// onto [1/((1+delta0) n), 1+delta0].

#include "pacefair/dual_averaging.hpp"
#include "pacefair/errors.hpp"
#include "pacefair/market.hpp"
#include "pacefair/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace pacefair {

inline constexpr double kDefaultDelta0 = 1.0;

/// Smallest index attaining max_i beta_i v_i, and that bid.
template <typename DerivedB, typename DerivedV>
std::pair<Index, typename DerivedB::Scalar> highest_bidder(const Eigen::MatrixBase<DerivedB>& beta,
                                                           const Eigen::MatrixBase<DerivedV>& values) {
  using Scalar = typename DerivedB::Scalar;
  Index winner = 0;
  Scalar best = beta(0) * values(0);
  for (Index i = 1; i < beta.size(); ++i) {
    const Scalar bid = beta(i) * values(i);
    if (bid > best) {
      best = bid;
      winner = i;
    }
  }
  return {winner, best};
}

template <typename Scalar>
struct StepOutcome {
  Index winner = 0;
  Scalar winning_bid = 0;
  VectorX<Scalar> utilities;
  VectorX<Scalar> expenditures;
};

template <typename DerivedB, typename DerivedV>
StepOutcome<typename DerivedB::Scalar> auction_step(const Eigen::MatrixBase<DerivedB>& beta,
                                                    const Eigen::MatrixBase<DerivedV>& values) {
  using Scalar = typename DerivedB::Scalar;
  if (beta.size() != values.size() || beta.size() == 0) {
    throw DimensionMismatch("auction needs one bid multiplier per item value");
  }
  StepOutcome<Scalar> out;
  std::tie(out.winner, out.winning_bid) = highest_bidder(beta, values);
  out.utilities = VectorX<Scalar>::Zero(beta.size());
  out.expenditures = VectorX<Scalar>::Zero(beta.size());
  out.utilities(out.winner) = values(out.winner);
  out.expenditures(out.winner) = out.winning_bid;
  return out;
}

template <typename Scalar>
struct PacingState {
  VectorX<Scalar> beta;
  VectorX<Scalar> u_bar;
  VectorX<Scalar> cumulative_spend;
  std::int64_t tau = 0;
  Scalar delta0 = Scalar(kDefaultDelta0);

  static PacingState initial(Index n, Scalar delta0 = Scalar(kDefaultDelta0)) {
    if (n < 1) throw InvalidArgument("pacing needs at least one agent");
    if (!(delta0 > Scalar(0))) throw InvalidArgument("delta0 must be positive");
    return {VectorX<Scalar>::Constant(n, Scalar(1) + delta0), VectorX<Scalar>::Zero(n),
            VectorX<Scalar>::Zero(n), 0, delta0};
  }

  Index n() const noexcept { return beta.size(); }
  Scalar lower() const { return Scalar(1) / ((Scalar(1) + delta0) * Scalar(n())); }
  Scalar upper() const { return Scalar(1) + delta0; }
};

/// Result of advancing a pacing state by one item, without materializing outcome vectors.
template <typename Scalar>
struct PacingStep {
  Index winner;
  Scalar winning_bid;
  Scalar winner_value;
};

/// In-place pacing step; the building block of pace_update and run_pace.
template <typename Scalar, typename Derived>
PacingStep<Scalar> advance_pacing(PacingState<Scalar>& state, const Eigen::MatrixBase<Derived>& values) {
  if (values.size() != state.n()) throw DimensionMismatch("item values length differs from n");
  const auto [winner, bid] = highest_bidder(state.beta, values);
  const Scalar value = values(winner);
  state.tau += 1;
  const Scalar tau = Scalar(state.tau);
  const Scalar n = Scalar(state.n());
  const Scalar lo = state.lower();
  const Scalar hi = state.upper();
  for (Index i = 0; i < state.n(); ++i) {
    const Scalar u = i == winner ? value : Scalar(0);
    state.u_bar(i) = ((tau - Scalar(1)) * state.u_bar(i) + u) / tau;
    const Scalar ub = state.u_bar(i);
    state.beta(i) = ub > Scalar(0) ? std::clamp(Scalar(1) / (n * ub), lo, hi) : hi;
  }
  state.cumulative_spend(winner) += bid;
  return {winner, bid, value};
}

template <typename Scalar, typename Derived>
std::pair<PacingState<Scalar>, StepOutcome<Scalar>> pace_update(const PacingState<Scalar>& state,
                                                               const Eigen::MatrixBase<Derived>& values) {
  PacingState<Scalar> next = state;
  StepOutcome<Scalar> out = auction_step(state.beta, values);
  advance_pacing(next, values);
  return {std::move(next), std::move(out)};
}

/// Which steps of a run keep full per-agent snapshots.
struct TraceOptions {
  /// Sorted, 1-based steps at which beta^{tau+1}, u_bar^tau and b_bar^tau are stored.
  std::vector<std::int64_t> record_steps;

  static TraceOptions none() { return {}; }
  static TraceOptions every_step(std::int64_t t);
  /// Steps k, 2k, ... plus t itself.
  static TraceOptions every(std::int64_t k, std::int64_t t);
};

struct PaceTrace {
  Index n = 0;
  std::int64_t t = 0;
  double delta0 = kDefaultDelta0;

  std::vector<std::int32_t> winners;
  std::vector<double> winning_bids;
  std::vector<double> winner_values;

  std::vector<std::int64_t> recorded_steps;
  Matrix betas;      // row k: beta after step recorded_steps[k]
  Matrix u_bars;     // row k: average utility through that step
  Matrix avg_spend;  // row k: average expenditure through that step

  Vector final_beta;       // beta^{t+1}
  Vector final_u_bar;      // u_bar^t
  Vector avg_expenditure;  // b_bar^t

  /// Total realized utility per agent, sum_tau u_i^tau.
  Vector total_utility() const { return final_u_bar * static_cast<double>(t); }
};

/// Runs pacing on a realized sequence. Throws DimensionMismatch if the sequence leaves the
/// item universe.
PaceTrace run_pace(const MarketInstance& instance, const ItemSequence& seq,
                   double delta0 = kDefaultDelta0, const TraceOptions& options = TraceOptions::none());

/// Dual averaging on f(beta, theta) = max_i beta_i v_i(theta) with the log barrier on the
/// pacing box and subgradient v_{i*}(theta) e_{i*}, i* the lowest-index winner.
struct DaRun {
  LogBarrierRegularizer<double> reg;
  std::vector<DaRecord<double>> records;
  Vector w_next;
};

DaRun run_pace_as_dual_averaging(const MarketInstance& instance, const ItemSequence& seq,
                                 double delta0 = kDefaultDelta0);

/// F(beta, theta) = max_i beta_i v_i(theta) - (1/n) sum_i log beta_i.
double pacing_loss(const MarketInstance& instance, const Vector& beta, Index item);

/// Largest coordinatewise gap between the pacing iterates beta^1..beta^{t+1} and the dual
/// averaging iterates w_1..w_{t+1} on the same data.
double max_deviation_from_da(const MarketInstance& instance, const ItemSequence& seq,
                             double delta0 = kDefaultDelta0);

bool equivalence_with_da(const MarketInstance& instance, const ItemSequence& seq,
                         double delta0 = kDefaultDelta0, double tol = 1e-12);

/// Per-step CSV: tau,winner,winning_bid[,beta_1..beta_n][,ubar_1..ubar_n]. Snapshot columns
/// are filled on recorded steps and left empty elsewhere.
void write_trace_csv(std::ostream& out, const PaceTrace& trace, bool with_beta, bool with_u_bar);

}  // namespace pacefair
