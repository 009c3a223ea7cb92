#pragma once

#include "pacefair/errors.hpp"
#include "pacefair/market.hpp"
#include "pacefair/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace pacefair {

enum class ModelKind { iid, corrupted, markov, periodic };

std::string_view to_string(ModelKind kind) noexcept;
/// Throws InvalidArgument for an unknown name.
ModelKind parse_model_kind(std::string_view name);

enum class CorruptionKind {
  /// s_tau = normalize(s0 + (scale / tau) * u_tau), u_tau uniform on [0,1)^m.
  decaying,
  /// s_tau = (1 - lambda) s0 + lambda e_c, corner c drawn once from the model seed, lambda so that
  /// TV(s_tau, s0) equals the target exactly at every step.
  budgeted,
};

struct CorruptionSchedule {
  CorruptionKind kind = CorruptionKind::decaying;
  /// Perturbation scale for `decaying`, per-step TV target for `budgeted`.
  double amount = 0.0;
};

/// Arrival process over a finite item universe. Immutable once built.
class InputModel {
 public:
  static InputModel iid(ReferenceDistribution base, std::uint64_t seed = 0);
  static InputModel corrupted(ReferenceDistribution base, CorruptionSchedule schedule,
                              std::uint64_t seed);
  /// Rows of `transition` must be probability vectors.
  static InputModel markov(ReferenceDistribution initial, Matrix transition,
                           std::uint64_t seed = 0);
  /// One row per position within a block; q = rows.
  static InputModel periodic(Matrix period_dists, std::uint64_t seed = 0);

  ModelKind kind() const noexcept { return kind_; }
  Index m() const noexcept { return base_.size(); }
  /// s0 for iid/corrupted, the initial distribution for markov, the per-period average for
  /// periodic.
  const ReferenceDistribution& base() const noexcept { return base_; }
  const Matrix& transition() const noexcept { return transition_; }
  const Matrix& period_dists() const noexcept { return period_dists_; }
  Index period() const noexcept { return period_dists_.rows(); }
  const CorruptionSchedule& schedule() const noexcept { return schedule_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Distribution s_tau of the independent draw at step tau (1-based); iid and corrupted only.
  Vector step_distribution(std::int64_t tau) const;

 private:
  InputModel(ModelKind kind, ReferenceDistribution base) : kind_(kind), base_(std::move(base)) {}

  ModelKind kind_;
  ReferenceDistribution base_;
  Matrix transition_;
  Matrix period_dists_;
  CorruptionSchedule schedule_;
  std::uint64_t seed_ = 0;
};

/// Distances between and summaries of nonstationarity for a model over a horizon.
struct NonstationarityReport {
  /// (1/t) sum_tau TV(Q_tau, reference).
  double delta_avg = 0.0;
  /// Markov only: (iota, max_z TV(P^iota(z, .), pi)).
  std::vector<std::pair<std::int64_t, double>> epsilon_of_iota;
  /// Periodic only: (1/t) sum_k |I_k| TV(Pi, block-average marginal).
  std::optional<double> delta_block;
};

/// Total variation distance (1/2) sum |p_j - q_j|.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar tv_distance(const Eigen::MatrixBase<DerivedA>& p,
                                      const Eigen::MatrixBase<DerivedB>& q);

double tv_distance(const ReferenceDistribution& p, const ReferenceDistribution& q);

/// Smallest index j with u < cdf[j], skipping zero-mass entries; u in [0, 1).
Index sample_categorical(const Vector& cdf, double u);

ItemSequence sample_sequence(const InputModel& model, std::int64_t t, std::uint64_t path_seed);

/// Power iteration from the uniform vector until ||pi P - pi||_1 <= tol.
/// Throws NoConvergence after `max_iters` iterations.
ReferenceDistribution stationary_distribution(const Matrix& transition, double tol = 1e-13,
                                              std::int64_t max_iters = 100000);

/// The distribution valuations are normalized against and benchmark solutions are computed
/// for: s0 (iid/corrupted), stationary distribution (markov), per-period average (periodic).
ReferenceDistribution reference_distribution(const InputModel& model);

/// Exact (1/t) sum_tau Q_tau.
ReferenceDistribution average_marginal(const InputModel& model, std::int64_t t);

NonstationarityReport nonstationarity_report(const InputModel& model, std::int64_t t,
                                             const std::vector<std::int64_t>& iota_grid);

/// Entries uniform on [0,1) raised to `sharpness`, then normalized. Larger sharpness
/// concentrates the mass on fewer items.
ReferenceDistribution random_distribution(Index m, std::uint64_t seed, double sharpness = 1.0);
/// Dense random row-stochastic matrix; every entry positive, so the chain is irreducible
/// and aperiodic.
Matrix random_transition(Index m, std::uint64_t seed);
Matrix random_period_dists(Index q, Index m, std::uint64_t seed, double sharpness = 1.0);

// ---------------------------------------------------------------------------

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar tv_distance(const Eigen::MatrixBase<DerivedA>& p,
                                      const Eigen::MatrixBase<DerivedB>& q) {
  if (p.size() != q.size()) throw LengthMismatch("tv_distance: vectors differ in length");
  return (p - q).cwiseAbs().sum() / typename DerivedA::Scalar(2);
}

}  // namespace pacefair
