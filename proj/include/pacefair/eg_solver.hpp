#pragma once

// Box-constrained Eisenberg-Gale dual over a finite item universe:
//
//   min_{lo <= beta <= hi}  sum_j weights_j max_i beta_i v_ij - (1/n) sum_i log beta_i
//
// With weights equal to the empirical item frequencies this is the hindsight problem of a
// realized sequence; with a reference distribution it is the underlying problem.

#include "pacefair/errors.hpp"
#include "pacefair/market.hpp"
#include "pacefair/types.hpp"

#include <cstdint>
#include <string_view>

namespace pacefair {

struct DualProblem {
  ValuationMatrix valuations;
  Vector weights;  // length m, on the simplex
  double lo = 0.0;
  double hi = 0.0;

  /// Box [1/((1+delta0) n), 1+delta0]. Throws on shape or simplex violations.
  static DualProblem make(ValuationMatrix valuations, Vector weights, double delta0);

  Index n() const noexcept { return valuations.rows(); }
  Index m() const noexcept { return valuations.cols(); }
};

enum class DualMethod {
  /// Newton's method on a log-sum-exp smoothing of the max, with the smoothing driven to
  /// zero along a continuation path. Default.
  smoothed_newton,
  /// Deterministic dual averaging on the full weighted subgradient with restarts.
  dual_averaging,
};

std::string_view to_string(DualMethod method) noexcept;

struct SolverOptions {
  double tol = 1e-8;
  std::int64_t max_iters = 200000;
  DualMethod method = DualMethod::smoothed_newton;
};

struct DualSolution {
  Vector beta_hat;
  double objective = 0.0;
  /// ||beta - clamp(1/(n u(beta)))||_inf for the allocation u the solver settled on.
  double residual = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
};

template <typename Derived>
typename Derived::Scalar dual_objective(const Eigen::MatrixBase<Derived>& beta,
                                        const DualProblem& prob) {
  using Scalar = typename Derived::Scalar;
  if (beta.size() != prob.n()) throw DimensionMismatch("beta length differs from agent count");
  if ((beta.array() <= Scalar(0)).any()) throw NonpositiveBeta("beta must be strictly positive");
  Scalar total = 0;
  for (Index j = 0; j < prob.m(); ++j) {
    if (prob.weights(j) == 0.0) continue;
    total += Scalar(prob.weights(j)) *
             (beta.array() * prob.valuations.col(j).array().template cast<Scalar>()).maxCoeff();
  }
  return total - beta.array().log().sum() / Scalar(prob.n());
}

/// sum_j weights_j v_{i_j, j} e_{i_j} with i_j the lowest-index top bidder on item j.
Vector weighted_subgradient(const Vector& beta, const DualProblem& prob);

/// Expected utilities when each item is split by a softmax of bids at temperature mu.
Vector smoothed_utilities(const Vector& beta, const DualProblem& prob, double mu);

/// Never throws NoConvergence: an unconverged solve is flagged in the result.
DualSolution solve_dual(const DualProblem& prob, const SolverOptions& options = {});

/// u_i = 1/(n beta_i), the average equilibrium utility implied by the dual.
Vector equilibrium_utilities(const DualSolution& sol, Index n);

/// Dual of the market whose supply is the realized sequence's item frequencies.
DualSolution hindsight_solution(const MarketInstance& instance, const ItemSequence& seq,
                                double delta0 = 1.0, const SolverOptions& options = {});

/// Dual of the market whose supply is `ref`.
DualSolution reference_solution(const MarketInstance& instance, const ReferenceDistribution& ref,
                                double delta0 = 1.0, const SolverOptions& options = {});

}  // namespace pacefair
