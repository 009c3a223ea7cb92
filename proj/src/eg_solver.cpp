#include "pacefair/eg_solver.hpp"

#include "pacefair/dual_averaging.hpp"
#include "pacefair/pace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace pacefair {

namespace {

constexpr double kSimplexTol = 1e-12;

// The problem restricted to items with positive weight; zero-weight items never affect the
// objective.
struct CompactProblem {
  Matrix values;  // n x k
  Vector weights;  // k
  double lo;
  double hi;
  Index n() const { return values.rows(); }
};

CompactProblem compact(const DualProblem& prob) {
  std::vector<Index> keep;
  for (Index j = 0; j < prob.m(); ++j) {
    if (prob.weights(j) > 0.0) keep.push_back(j);
  }
  CompactProblem out{Matrix(prob.n(), static_cast<Index>(keep.size())),
                     Vector(static_cast<Index>(keep.size())), prob.lo, prob.hi};
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.values.col(static_cast<Index>(k)) = prob.valuations.col(keep[k]);
    out.weights(static_cast<Index>(k)) = prob.weights(keep[k]);
  }
  return out;
}

struct Smoothed {
  double value;
  Vector grad;
  Matrix shares;  // n x k softmax weights times values: p_ij v_ij
};

// phi_mu(beta) = sum_j w_j (M_j + mu log sum_i exp((beta_i v_ij - M_j)/mu)) - (1/n) sum log beta.
Smoothed evaluate(const CompactProblem& prob, const Vector& beta, double mu, bool with_shares) {
  const Index n = prob.n();
  const Index k = prob.values.cols();
  Smoothed out{0.0, Vector::Zero(n), Matrix()};
  if (with_shares) out.shares.resize(n, k);
  Vector expo(n);
  for (Index j = 0; j < k; ++j) {
    const auto v = prob.values.col(j);
    const double top = (beta.array() * v.array()).maxCoeff();
    expo = ((beta.array() * v.array() - top) / mu).exp();
    const double z = expo.sum();
    out.value += prob.weights(j) * (top + mu * std::log(z));
    const Vector pv = (expo.array() * v.array()).matrix() / z;
    out.grad += prob.weights(j) * pv;
    if (with_shares) out.shares.col(j) = pv;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.value -= inv_n * beta.array().log().sum();
  out.grad.array() -= inv_n / beta.array();
  return out;
}

Matrix hessian(const CompactProblem& prob, const Vector& beta, const Smoothed& s, double mu) {
  const Index n = prob.n();
  // (1/mu) sum_j w_j [diag(p_j v_j^2) - (p_j v_j)(p_j v_j)^T] + diag(1/(n beta^2)).
  const Vector diag_term = (s.shares.array() * prob.values.array()).matrix() * prob.weights;
  Matrix h = -(s.shares * prob.weights.asDiagonal() * s.shares.transpose());
  h.diagonal() += diag_term;
  h /= mu;
  h.diagonal().array() += 1.0 / (static_cast<double>(n) * beta.array().square());
  return h;
}

double fixed_point_residual(const Vector& beta, const Vector& utilities, double lo, double hi) {
  const double n = static_cast<double>(beta.size());
  double worst = 0.0;
  for (Index i = 0; i < beta.size(); ++i) {
    const double target = utilities(i) > 0.0 ? std::clamp(1.0 / (n * utilities(i)), lo, hi) : hi;
    worst = std::max(worst, std::abs(beta(i) - target));
  }
  return worst;
}

DualSolution solve_smoothed_newton(const DualProblem& full, const SolverOptions& options) {
  const CompactProblem prob = compact(full);
  const Index n = prob.n();
  Vector beta = Vector::Constant(n, prob.hi);

  double scale = 0.0;
  for (Index j = 0; j < prob.values.cols(); ++j) scale += prob.weights(j) * prob.values.col(j).maxCoeff();
  const double mu_start = 0.1 * scale;
  const double mu_final = std::max(10.0 * options.tol * scale, 1e-14 * scale);

  DualSolution sol;
  bool stage_converged = false;
  double mu = mu_start;
  for (;;) {
    stage_converged = false;
    for (int newton = 0; newton < 200 && sol.iterations < options.max_iters; ++newton) {
      ++sol.iterations;
      const Smoothed s = evaluate(prob, beta, mu, true);
      const double eps = 1e-12 * prob.hi;
      std::vector<Index> free;
      for (Index i = 0; i < n; ++i) {
        const bool at_lo = beta(i) <= prob.lo + eps && s.grad(i) > 0.0;
        const bool at_hi = beta(i) >= prob.hi - eps && s.grad(i) < 0.0;
        if (!at_lo && !at_hi) free.push_back(i);
      }
      if (free.empty()) {
        stage_converged = true;
        break;
      }
      const Matrix h = hessian(prob, beta, s, mu);
      const auto nf = static_cast<Index>(free.size());
      Matrix h_free(nf, nf);
      Vector g_free(nf);
      for (Index a = 0; a < nf; ++a) {
        g_free(a) = s.grad(free[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < nf; ++b) {
          h_free(a, b) = h(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
        }
      }
      const Vector d_free = h_free.ldlt().solve(-g_free);
      Vector direction = Vector::Zero(n);
      for (Index a = 0; a < nf; ++a) direction(free[static_cast<std::size_t>(a)]) = d_free(a);

      double step = 1.0;
      Vector candidate = beta;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        candidate = (beta + step * direction).cwiseMax(prob.lo).cwiseMin(prob.hi);
        const double predicted = s.grad.dot(candidate - beta);
        const double value = evaluate(prob, candidate, mu, false).value;
        if (value <= s.value + 1e-4 * predicted + 1e-15 * (1.0 + std::abs(s.value))) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      const double change = (candidate - beta).cwiseAbs().maxCoeff();
      if (accepted) beta = candidate;
      if (!accepted || change <= 1e-2 * options.tol) {
        stage_converged = accepted || change <= options.tol;
        break;
      }
    }
    if (mu <= mu_final || sol.iterations >= options.max_iters) break;
    mu = std::max(mu * 0.1, mu_final);
  }

  const Smoothed final_eval = evaluate(prob, beta, mu, false);
  const Vector utilities = final_eval.grad.array() + 1.0 / (static_cast<double>(n) * beta.array());
  sol.beta_hat = beta;
  sol.objective = dual_objective(beta, full);
  sol.residual = fixed_point_residual(beta, utilities, prob.lo, prob.hi);
  sol.converged = stage_converged && sol.residual <= 10.0 * options.tol;

  const Vector init = Vector::Constant(n, prob.hi);
  const double init_objective = dual_objective(init, full);
  if (init_objective < sol.objective) {
    sol.beta_hat = init;
    sol.objective = init_objective;
    sol.residual = fixed_point_residual(init, weighted_subgradient(init, full), prob.lo, prob.hi);
    sol.converged = sol.residual <= 10.0 * options.tol;
  }
  return sol;
}

DualSolution solve_dual_averaging(const DualProblem& prob, const SolverOptions& options) {
  const Index n = prob.n();
  const LogBarrierRegularizer<double> reg(n, prob.lo, prob.hi);
  Vector beta = reg.initial_point();
  DualSolution sol;
  sol.beta_hat = beta;
  sol.objective = dual_objective(beta, prob);

  std::int64_t epoch_len = 64;
  bool settled = false;
  while (sol.iterations < options.max_iters && !settled) {
    // Restart: the running average is re-anchored at the gradient whose argmin is beta.
    Vector sum = (1.0 / (static_cast<double>(n) * beta.array())).matrix();
    double count = 1.0;
    for (std::int64_t s = 0; s < epoch_len && sol.iterations < options.max_iters; ++s) {
      ++sol.iterations;
      sum += weighted_subgradient(beta, prob);
      count += 1.0;
      const Vector next = composite_argmin(sum / count, reg);
      const double change = (next - beta).cwiseAbs().maxCoeff();
      beta = next;
      const double objective = dual_objective(beta, prob);
      if (objective < sol.objective) {
        sol.objective = objective;
        sol.beta_hat = beta;
      }
      if (change <= options.tol) {
        settled = true;
        break;
      }
    }
    epoch_len *= 2;
  }
  sol.residual =
      fixed_point_residual(sol.beta_hat, weighted_subgradient(sol.beta_hat, prob), prob.lo, prob.hi);
  sol.converged = sol.residual <= 10.0 * options.tol;
  return sol;
}

}  // namespace

DualProblem DualProblem::make(ValuationMatrix valuations, Vector weights, double delta0) {
  if (valuations.rows() < 1 || valuations.cols() < 1) {
    throw InvalidArgument("dual problem needs at least one agent and one item");
  }
  if (weights.size() != valuations.cols()) {
    throw DimensionMismatch("weights length differs from item count");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any() ||
      std::abs(weights.sum() - 1.0) > kSimplexTol) {
    throw InvalidArgument("weights must be a probability vector");
  }
  if (!valuations.allFinite() || (valuations.array() < 0.0).any()) {
    throw InvalidArgument("valuations must be finite and nonnegative");
  }
  if (!(delta0 > 0.0)) throw InvalidArgument("delta0 must be positive");
  const Vector expected = valuations * weights;
  for (Index i = 0; i < valuations.rows(); ++i) {
    if (!(expected(i) > 0.0)) {
      throw ZeroExpectedValue("agent " + std::to_string(i) + " has zero weighted value");
    }
  }
  const double n = static_cast<double>(valuations.rows());
  return {std::move(valuations), std::move(weights), 1.0 / ((1.0 + delta0) * n), 1.0 + delta0};
}

std::string_view to_string(DualMethod method) noexcept {
  switch (method) {
    case DualMethod::smoothed_newton: return "smoothed_newton";
    case DualMethod::dual_averaging: return "dual_averaging";
  }
  return "unknown";
}

Vector weighted_subgradient(const Vector& beta, const DualProblem& prob) {
  Vector g = Vector::Zero(prob.n());
  for (Index j = 0; j < prob.m(); ++j) {
    if (prob.weights(j) == 0.0) continue;
    const auto values = prob.valuations.col(j);
    const auto [winner, bid] = highest_bidder(beta, values);
    (void)bid;
    g(winner) += prob.weights(j) * values(winner);
  }
  return g;
}

Vector smoothed_utilities(const Vector& beta, const DualProblem& prob, double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("smoothing temperature must be positive");
  const CompactProblem compacted = compact(prob);
  const Smoothed s = evaluate(compacted, beta, mu, false);
  return s.grad.array() + 1.0 / (static_cast<double>(prob.n()) * beta.array());
}

DualSolution solve_dual(const DualProblem& prob, const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (options.max_iters < 1) throw InvalidArgument("solver needs at least one iteration");
  switch (options.method) {
    case DualMethod::smoothed_newton: return solve_smoothed_newton(prob, options);
    case DualMethod::dual_averaging: return solve_dual_averaging(prob, options);
  }
  throw InvalidArgument("unknown dual method");
}

Vector equilibrium_utilities(const DualSolution& sol, Index n) {
  if (sol.beta_hat.size() != n) throw DimensionMismatch("solution length differs from n");
  if ((sol.beta_hat.array() <= 0.0).any()) throw NonpositiveBeta("beta must be strictly positive");
  return (1.0 / (static_cast<double>(n) * sol.beta_hat.array())).matrix();
}

DualSolution hindsight_solution(const MarketInstance& instance, const ItemSequence& seq,
                                double delta0, const SolverOptions& options) {
  return solve_dual(DualProblem::make(instance.valuations(), seq.frequencies(instance.m()), delta0),
                    options);
}

DualSolution reference_solution(const MarketInstance& instance, const ReferenceDistribution& ref,
                                double delta0, const SolverOptions& options) {
  return solve_dual(DualProblem::make(instance.valuations(), ref.probs(), delta0), options);
}

}  // namespace pacefair
