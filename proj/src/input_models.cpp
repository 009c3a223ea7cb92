#include "pacefair/input_models.hpp"

#include "pacefair/errors.hpp"
#include "pacefair/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pacefair {

namespace {

constexpr double kRowTol = 1e-12;

void check_row_stochastic(const Matrix& rows, const char* what) {
  if (!rows.allFinite() || (rows.array() < 0.0).any()) {
    throw InvalidArgument(std::string(what) + " entries must be finite and nonnegative");
  }
  for (Index r = 0; r < rows.rows(); ++r) {
    if (std::abs(rows.row(r).sum() - 1.0) > kRowTol) {
      throw InvalidArgument(std::string(what) + " row " + std::to_string(r) +
                            " does not sum to 1");
    }
  }
}

Vector cumulative(const Eigen::Ref<const Vector>& probs) {
  Vector cdf(probs.size());
  double acc = 0.0;
  for (Index j = 0; j < probs.size(); ++j) {
    acc += probs(j);
    cdf(j) = acc;
  }
  return cdf;
}

Matrix cumulative_rows(const Matrix& rows) {
  Matrix cdf(rows.rows(), rows.cols());
  for (Index r = 0; r < rows.rows(); ++r) cdf.row(r) = cumulative(rows.row(r).transpose()).transpose();
  return cdf;
}

Index sample_row(const Matrix& cdf_rows, Index row, double u) {
  return sample_categorical(cdf_rows.row(row).transpose(), u);
}

void check_horizon(std::int64_t t) {
  if (t < 1) throw InvalidHorizon("horizon must be at least 1, got " + std::to_string(t));
  if (t > std::numeric_limits<std::int32_t>::max()) throw InvalidHorizon("horizon too large");
}

Matrix matrix_power(const Matrix& base, std::int64_t exponent) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  Matrix square = base;
  while (exponent > 0) {
    if (exponent & 1) result = result * square;
    exponent >>= 1;
    if (exponent > 0) square = square * square;
  }
  return result;
}

// Calls visit(tau, Q_tau) for tau = 1..t over the exact per-step marginals of a model.
// Markov marginals stop being recomputed once they reach a fixed point.
template <typename Visitor>
void for_each_marginal(const InputModel& model, std::int64_t t, Visitor&& visit) {
  switch (model.kind()) {
    case ModelKind::iid:
    case ModelKind::periodic: {
      // Periodic blocks are shuffled uniformly, so every position has the block-average law.
      const Vector& q = model.base().probs();
      for (std::int64_t tau = 1; tau <= t; ++tau) visit(tau, q);
      break;
    }
    case ModelKind::corrupted:
      for (std::int64_t tau = 1; tau <= t; ++tau) visit(tau, model.step_distribution(tau));
      break;
    case ModelKind::markov: {
      RowVectorX<double> q = model.base().probs().transpose();
      bool settled = false;
      for (std::int64_t tau = 1; tau <= t; ++tau) {
        visit(tau, q.transpose());
        if (!settled) {
          RowVectorX<double> next = q * model.transition();
          settled = (next == q);
          q = std::move(next);
        }
      }
      break;
    }
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::iid: return "iid";
    case ModelKind::corrupted: return "corrupted";
    case ModelKind::markov: return "markov";
    case ModelKind::periodic: return "periodic";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "iid") return ModelKind::iid;
  if (name == "corrupted") return ModelKind::corrupted;
  if (name == "markov") return ModelKind::markov;
  if (name == "periodic") return ModelKind::periodic;
  throw InvalidArgument("unknown input model kind '" + std::string(name) + "'");
}

InputModel InputModel::iid(ReferenceDistribution base, std::uint64_t seed) {
  InputModel model(ModelKind::iid, std::move(base));
  model.seed_ = seed;
  return model;
}

InputModel InputModel::corrupted(ReferenceDistribution base, CorruptionSchedule schedule,
                                 std::uint64_t seed) {
  if (!std::isfinite(schedule.amount) || schedule.amount < 0.0) {
    throw InvalidArgument("corruption amount must be finite and nonnegative");
  }
  if (schedule.kind == CorruptionKind::budgeted) {
    const double reach = 1.0 - base.probs().maxCoeff();
    if (schedule.amount > reach) {
      throw InvalidArgument("budgeted corruption " + std::to_string(schedule.amount) +
                            " exceeds the largest achievable per-step TV " +
                            std::to_string(reach));
    }
  }
  InputModel model(ModelKind::corrupted, std::move(base));
  model.schedule_ = schedule;
  model.seed_ = seed;
  return model;
}

InputModel InputModel::markov(ReferenceDistribution initial, Matrix transition,
                              std::uint64_t seed) {
  if (transition.rows() != initial.size() || transition.cols() != initial.size()) {
    throw DimensionMismatch("transition matrix must be m x m with m = initial length");
  }
  check_row_stochastic(transition, "transition");
  InputModel model(ModelKind::markov, std::move(initial));
  model.transition_ = std::move(transition);
  model.seed_ = seed;
  return model;
}

InputModel InputModel::periodic(Matrix period_dists, std::uint64_t seed) {
  if (period_dists.rows() < 1 || period_dists.cols() < 1) {
    throw InvalidArgument("periodic model needs q >= 1 distributions over m >= 1 items");
  }
  check_row_stochastic(period_dists, "period distribution");
  Vector average = period_dists.colwise().mean().transpose();
  InputModel model(ModelKind::periodic, ReferenceDistribution::normalized(average));
  model.period_dists_ = std::move(period_dists);
  model.seed_ = seed;
  return model;
}

Vector InputModel::step_distribution(std::int64_t tau) const {
  if (tau < 1) throw InvalidHorizon("steps are numbered from 1");
  const Vector& s0 = base_.probs();
  switch (kind_) {
    case ModelKind::iid: return s0;
    case ModelKind::corrupted: break;
    default: throw InvalidArgument("step_distribution applies to iid and corrupted models");
  }
  CounterRng rng(derive_seed(seed_, static_cast<std::uint64_t>(tau)));
  if (schedule_.kind == CorruptionKind::decaying) {
    const double eps = schedule_.amount / static_cast<double>(tau);
    Vector s(s0.size());
    for (Index j = 0; j < s.size(); ++j) s(j) = s0(j) + eps * rng.uniform();
    return s / s.sum();
  }
  if (schedule_.amount == 0.0) return s0;
  // One corner per model, drawn from the model seed: a fresh corner each step would average
  // back toward s0 and leave the long-run marginal nearly uncorrupted.
  CounterRng corner_rng(derive_seed(seed_, 0));
  const auto corner =
      static_cast<Index>(corner_rng.below(static_cast<std::uint64_t>(s0.size())));
  const double lambda = schedule_.amount / (1.0 - s0(corner));
  Vector s = (1.0 - lambda) * s0;
  s(corner) += lambda;
  return s;
}

double tv_distance(const ReferenceDistribution& p, const ReferenceDistribution& q) {
  return tv_distance(p.probs(), q.probs());
}

Index sample_categorical(const Vector& cdf, double u) {
  const double* begin = cdf.data();
  const double* end = begin + cdf.size();
  const double* hit = std::upper_bound(begin, end, u);
  if (hit == end) {
    // u landed beyond a cdf that rounds below 1: take the last item with positive mass.
    Index j = cdf.size() - 1;
    while (j > 0 && cdf(j) == cdf(j - 1)) --j;
    return j;
  }
  return static_cast<Index>(hit - begin);
}

ItemSequence sample_sequence(const InputModel& model, std::int64_t t, std::uint64_t path_seed) {
  check_horizon(t);
  CounterRng rng(mix64(path_seed));
  ItemSequence seq;
  seq.items.reserve(static_cast<std::size_t>(t));
  auto push = [&seq](Index item) { seq.items.push_back(static_cast<std::int32_t>(item)); };

  switch (model.kind()) {
    case ModelKind::iid: {
      const Vector cdf = cumulative(model.base().probs());
      for (std::int64_t tau = 1; tau <= t; ++tau) push(sample_categorical(cdf, rng.uniform()));
      break;
    }
    case ModelKind::corrupted: {
      for (std::int64_t tau = 1; tau <= t; ++tau) {
        const Vector cdf = cumulative(model.step_distribution(tau));
        push(sample_categorical(cdf, rng.uniform()));
      }
      break;
    }
    case ModelKind::markov: {
      const Matrix cdf = cumulative_rows(model.transition());
      Index state = sample_categorical(cumulative(model.base().probs()), rng.uniform());
      push(state);
      for (std::int64_t tau = 2; tau <= t; ++tau) {
        state = sample_row(cdf, state, rng.uniform());
        push(state);
      }
      break;
    }
    case ModelKind::periodic: {
      const Matrix cdf = cumulative_rows(model.period_dists());
      const Index q = model.period();
      std::vector<std::int32_t> block(static_cast<std::size_t>(q));
      while (seq.horizon() < t) {
        for (Index k = 0; k < q; ++k) {
          block[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(sample_row(cdf, k, rng.uniform()));
        }
        for (Index k = q - 1; k > 0; --k) {
          const auto swap_with = rng.below(static_cast<std::uint64_t>(k + 1));
          std::swap(block[static_cast<std::size_t>(k)], block[swap_with]);
        }
        const auto take = std::min<std::int64_t>(q, t - seq.horizon());
        seq.items.insert(seq.items.end(), block.begin(), block.begin() + take);
      }
      break;
    }
  }
  return seq;
}

ReferenceDistribution stationary_distribution(const Matrix& transition, double tol,
                                              std::int64_t max_iters) {
  if (transition.rows() != transition.cols() || transition.rows() == 0) {
    throw DimensionMismatch("transition matrix must be square and nonempty");
  }
  check_row_stochastic(transition, "transition");
  const Index m = transition.rows();
  RowVectorX<double> pi = RowVectorX<double>::Constant(m, 1.0 / static_cast<double>(m));
  double residual = 0.0;
  for (std::int64_t iter = 0; iter < max_iters; ++iter) {
    RowVectorX<double> next = pi * transition;
    residual = (next - pi).cwiseAbs().sum();
    if (residual <= tol) return ReferenceDistribution::normalized(next.transpose());
    pi = std::move(next);
  }
  throw NoConvergence("power iteration residual " + std::to_string(residual) +
                      " above tolerance after " + std::to_string(max_iters) +
                      " iterations; chain may be periodic or reducible");
}

ReferenceDistribution reference_distribution(const InputModel& model) {
  if (model.kind() == ModelKind::markov) return stationary_distribution(model.transition());
  return model.base();
}

ReferenceDistribution average_marginal(const InputModel& model, std::int64_t t) {
  check_horizon(t);
  Vector sum = Vector::Zero(model.m());
  for_each_marginal(model, t, [&sum](std::int64_t, const Vector& q) { sum += q; });
  return ReferenceDistribution::normalized(sum / static_cast<double>(t));
}

NonstationarityReport nonstationarity_report(const InputModel& model, std::int64_t t,
                                             const std::vector<std::int64_t>& iota_grid) {
  check_horizon(t);
  const ReferenceDistribution ref = reference_distribution(model);
  NonstationarityReport report;

  double total = 0.0;
  for_each_marginal(model, t, [&](std::int64_t, const Vector& q) {
    total += tv_distance(q, ref.probs());
  });
  report.delta_avg = std::clamp(total / static_cast<double>(t), 0.0, 1.0);

  if (model.kind() == ModelKind::markov) {
    for (auto iota : iota_grid) {
      if (iota < 0) throw InvalidArgument("iota must be nonnegative");
      const Matrix power = matrix_power(model.transition(), iota);
      double worst = 0.0;
      for (Index z = 0; z < power.rows(); ++z) {
        worst = std::max(worst, tv_distance(power.row(z).transpose(), ref.probs()));
      }
      report.epsilon_of_iota.emplace_back(iota, std::min(worst, 1.0));
    }
  }

  if (model.kind() == ModelKind::periodic) {
    const Index q = model.period();
    double weighted = 0.0;
    Vector block_sum = Vector::Zero(model.m());
    std::int64_t block_len = 0;
    for_each_marginal(model, t, [&](std::int64_t tau, const Vector& marginal) {
      block_sum += marginal;
      ++block_len;
      if (block_len == q || tau == t) {
        const Vector avg = block_sum / static_cast<double>(block_len);
        weighted += static_cast<double>(block_len) * tv_distance(ref.probs(), avg);
        block_sum.setZero();
        block_len = 0;
      }
    });
    report.delta_block = std::clamp(weighted / static_cast<double>(t), 0.0, 1.0);
  }
  return report;
}

ReferenceDistribution random_distribution(Index m, std::uint64_t seed, double sharpness) {
  if (m < 1) throw InvalidArgument("item universe must be nonempty");
  CounterRng rng(mix64(seed ^ 0xD1B54A32D192ED03ULL));
  Vector w(m);
  // 1 - U lies in (0, 1], so every item keeps positive mass.
  for (Index j = 0; j < m; ++j) w(j) = std::pow(1.0 - rng.uniform(), sharpness);
  return ReferenceDistribution::normalized(w);
}

Matrix random_transition(Index m, std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("item universe must be nonempty");
  Matrix p(m, m);
  for (Index r = 0; r < m; ++r) {
    p.row(r) = random_distribution(m, derive_seed(seed, static_cast<std::uint64_t>(r))).probs().transpose();
  }
  return p;
}

Matrix random_period_dists(Index q, Index m, std::uint64_t seed, double sharpness) {
  if (q < 1) throw InvalidArgument("period must be at least 1");
  Matrix dists(q, m);
  for (Index k = 0; k < q; ++k) {
    dists.row(k) =
        random_distribution(m, derive_seed(seed, static_cast<std::uint64_t>(k)), sharpness)
            .probs()
            .transpose();
  }
  return dists;
}

}  // namespace pacefair
