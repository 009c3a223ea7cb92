#pragma once

#include "pacefair/errors.hpp"
#include "pacefair/market.hpp"
#include "pacefair/pace.hpp"
#include "pacefair/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pacefair {

/// Reg_i = t u_i^HS - sum_tau u_i^tau, signed.
Vector regret(const PaceTrace& trace, const Vector& hindsight_u, std::int64_t t);

/// Envy_i = max_k S_ik - S_ii with S_ik agent i's value for the items agent k won.
Vector envy(const PaceTrace& trace, const MarketInstance& instance, const ItemSequence& seq);

struct MeanSquareErrors {
  double beta = 0.0;         // ||beta^{t+1} - ref_beta||^2
  double utility = 0.0;      // ||u_bar^t - ref_u||^2
  double expenditure = 0.0;  // ||b_bar^t - (1/n) 1||^2
};

MeanSquareErrors mean_square_errors(const PaceTrace& trace, const Vector& ref_beta,
                                    const Vector& ref_u);

/// max_i |actual_i - reference_i| / reference_i.
template <typename DerivedA, typename DerivedR>
typename DerivedA::Scalar relative_error_max(const Eigen::MatrixBase<DerivedA>& actual,
                                             const Eigen::MatrixBase<DerivedR>& reference) {
  if (actual.size() != reference.size()) throw DimensionMismatch("relative error: length mismatch");
  if ((reference.array() <= 0).any()) {
    throw NonpositiveReference("relative error needs a strictly positive reference");
  }
  return ((actual - reference).array().abs() / reference.array()).maxCoeff();
}

/// Names of the recorded series, in output order.
inline constexpr std::array<std::string_view, 12> kMetricNames = {
    "rel_beta_hs",   "rel_u_hs",      "rel_beta_star",   "rel_u_star",
    "mse_beta_hs",   "mse_u_hs",      "mse_beta_star",   "mse_u_star",
    "mse_expenditure", "regret_max",  "envy_max",        "baseline_rel_u_hs"};

/// Index of a metric in kMetricNames; throws InvalidArgument if unknown.
std::size_t metric_index(std::string_view name);

struct MetricSeries {
  std::string model;
  std::int64_t path_id = 0;
  std::uint64_t path_seed = 0;
  Index n = 0;
  Index m = 0;
  double delta0 = 1.0;
  std::vector<std::int64_t> times;
  /// values[k][s] is metric kMetricNames[k] at times[s].
  std::array<std::vector<double>, kMetricNames.size()> values;

  const std::vector<double>& metric(std::string_view name) const {
    return values[metric_index(name)];
  }
};

/// Every step up to 100, then steps growing by a factor 1.1 (rounded), always ending at t.
std::vector<std::int64_t> geometric_grid(std::int64_t t);

/// Benchmarks the series are measured against.
struct Benchmarks {
  Vector beta_hs;
  Vector u_hs;
  Vector beta_star;
  Vector u_star;
};

/// Evaluates every metric at the trace's recorded steps. Regret and envy are reported per
/// step, divided by the elapsed time; the hindsight benchmark is that of the full horizon.
MetricSeries compute_metric_series(const MarketInstance& instance, const ItemSequence& seq,
                                   const PaceTrace& trace, const Benchmarks& bench);

/// Long format rows: model,path_id,metric,t,value.
void write_series_csv_header(std::ostream& out);
void write_series_csv_rows(std::ostream& out, const MetricSeries& series);

}  // namespace pacefair
