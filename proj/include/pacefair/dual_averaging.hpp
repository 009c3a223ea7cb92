#pragma once

// Composite dual averaging over a box with the log-barrier regularizer
// Psi(w) = -(1/n) sum_i log w_i. Each iterate minimizes <g_bar, w> + Psi(w) over
// [lo, hi]^n, which is separable and has the closed form clamp(1/(n g_bar_i)).

#include "pacefair/errors.hpp"
#include "pacefair/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace pacefair {

template <typename Scalar>
struct LogBarrierRegularizer {
  Index n = 0;
  Scalar lo = 0;
  Scalar hi = 0;

  LogBarrierRegularizer() = default;
  LogBarrierRegularizer(Index dim, Scalar lower, Scalar upper) : n(dim), lo(lower), hi(upper) {
    if (n < 1) throw InvalidArgument("regularizer dimension must be positive");
    if (!(lo > Scalar(0)) || !(hi > lo) || !std::isfinite(static_cast<double>(hi))) {
      throw InvalidArgument("regularizer box needs 0 < lo < hi < inf");
    }
  }

  /// Box [1/((1+delta0) n), 1+delta0] used by pacing dynamics.
  static LogBarrierRegularizer pacing_box(Index dim, Scalar delta0) {
    if (!(delta0 > Scalar(0))) throw InvalidArgument("delta0 must be positive");
    return {dim, Scalar(1) / ((Scalar(1) + delta0) * Scalar(dim)), Scalar(1) + delta0};
  }

  /// Strong-convexity modulus of Psi on the box in the Euclidean norm: 1/(n hi^2).
  Scalar box_modulus() const { return Scalar(1) / (Scalar(n) * hi * hi); }
  /// The constant 1/n used for the pacing instantiation.
  Scalar nominal_modulus() const { return Scalar(1) / Scalar(n); }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& w) const {
    return -w.array().log().sum() / Scalar(n);
  }

  /// argmin Psi over the box.
  VectorX<Scalar> initial_point() const { return VectorX<Scalar>::Constant(n, hi); }

  Scalar clamp(Scalar x) const { return std::clamp(x, lo, hi); }
};

/// clamp(1/(n g_bar_i), lo, hi) with 1/0 read as +inf. Requires g_bar >= 0.
template <typename Scalar, typename Derived>
VectorX<Scalar> composite_argmin(const Eigen::MatrixBase<Derived>& g_bar,
                                 const LogBarrierRegularizer<Scalar>& reg) {
  if (g_bar.size() != reg.n) throw DimensionMismatch("g_bar length differs from regularizer");
  VectorX<Scalar> w(reg.n);
  const Scalar n = Scalar(reg.n);
  for (Index i = 0; i < reg.n; ++i) {
    const Scalar g = g_bar(i);
    w(i) = g > Scalar(0) ? reg.clamp(Scalar(1) / (n * g)) : reg.hi;
  }
  return w;
}

template <typename Scalar>
struct DaState {
  std::int64_t tau = 0;
  VectorX<Scalar> g_bar;
  VectorX<Scalar> w;

  static DaState initial(const LogBarrierRegularizer<Scalar>& reg) {
    return {0, VectorX<Scalar>::Zero(reg.n), reg.initial_point()};
  }
};

/// One dual averaging step: fold g into the running average, then re-solve the composite
/// problem.
template <typename Scalar, typename Derived>
DaState<Scalar> da_step(const DaState<Scalar>& state, const Eigen::MatrixBase<Derived>& g,
                        const LogBarrierRegularizer<Scalar>& reg) {
  if (g.size() != reg.n) throw DimensionMismatch("subgradient length differs from regularizer");
  DaState<Scalar> next;
  next.tau = state.tau + 1;
  const Scalar tau = Scalar(next.tau);
  next.g_bar = ((tau - Scalar(1)) * state.g_bar + g) / tau;
  next.w = composite_argmin(next.g_bar, reg);
  return next;
}

/// One recorded dual averaging step: the iterate played, the subgradient observed there and
/// the composite loss F(w_tau, z_tau).
template <typename Scalar>
struct DaRecord {
  VectorX<Scalar> w;
  VectorX<Scalar> g;
  Scalar loss;
};

template <typename Scalar>
struct RegretBoundCheck {
  Scalar lhs;
  Scalar rhs;
  Scalar regret;  // R_t(w_ref)
  Scalar delta;   // Delta_t
  bool holds;
};

/// Evaluates ||w_{t+1} - w_ref||^2 <= (2/(sigma t)) (Delta_t - R_t(w_ref)) with
/// Delta_t = (1/(2 sigma)) (5 ||g_1||^2 + sum_{tau=1}^{t-1} ||g_{tau+1}||^2 / tau).
template <typename Scalar>
RegretBoundCheck<Scalar> regret_bound_check(const std::vector<DaRecord<Scalar>>& trajectory,
                                            const VectorX<Scalar>& w_next,
                                            const VectorX<Scalar>& w_ref,
                                            const std::vector<Scalar>& ref_losses,
                                            Scalar sigma) {
  if (trajectory.empty()) throw InvalidArgument("regret_bound_check needs a nonempty trajectory");
  if (ref_losses.size() != trajectory.size()) {
    throw DimensionMismatch("one reference loss per trajectory step is required");
  }
  if (!(sigma > Scalar(0))) throw InvalidArgument("sigma must be positive");
  if (w_next.size() != w_ref.size()) throw DimensionMismatch("w_ref length differs from iterate");

  const auto t = trajectory.size();
  Scalar regret = 0;
  for (std::size_t k = 0; k < t; ++k) regret += trajectory[k].loss - ref_losses[k];

  Scalar sq = Scalar(5) * trajectory.front().g.squaredNorm();
  for (std::size_t k = 1; k < t; ++k) sq += trajectory[k].g.squaredNorm() / Scalar(k);
  const Scalar delta = sq / (Scalar(2) * sigma);

  RegretBoundCheck<Scalar> out;
  out.lhs = (w_next - w_ref).squaredNorm();
  out.rhs = Scalar(2) / (sigma * Scalar(t)) * (delta - regret);
  out.regret = regret;
  out.delta = delta;
  out.holds = out.lhs <= out.rhs + Scalar(1e-9);
  return out;
}

/// Runs dual averaging for `t` steps. `oracle(w, tau)` returns the pair (g_tau, F(w, z_tau)).
/// Returns the per-step records; the final iterate w_{t+1} is written to `w_next`.
template <typename Scalar, typename Oracle>
std::vector<DaRecord<Scalar>> run_dual_averaging(Oracle&& oracle,
                                                 const LogBarrierRegularizer<Scalar>& reg,
                                                 std::int64_t t, VectorX<Scalar>& w_next) {
  std::vector<DaRecord<Scalar>> records;
  records.reserve(static_cast<std::size_t>(std::max<std::int64_t>(t, 0)));
  auto state = DaState<Scalar>::initial(reg);
  for (std::int64_t tau = 1; tau <= t; ++tau) {
    auto [g, loss] = oracle(state.w, tau);
    records.push_back({state.w, g, loss});
    state = da_step(state, g, reg);
  }
  w_next = state.w;
  return records;
}

/// Debug dump: tau,w_1..w_n,g_1..g_n, one row per recorded step.
template <typename Scalar>
void write_da_csv(std::ostream& out, const std::vector<DaRecord<Scalar>>& records) {
  if (records.empty()) return;
  const Index n = records.front().w.size();
  out << "tau";
  for (Index i = 1; i <= n; ++i) out << ",w_" << i;
  for (Index i = 1; i <= n; ++i) out << ",g_" << i;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t k = 0; k < records.size(); ++k) {
    out << k + 1;
    for (Index i = 0; i < n; ++i) out << ',' << records[k].w(i);
    for (Index i = 0; i < n; ++i) out << ',' << records[k].g(i);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace pacefair
