#include "pacefair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pacefair {

namespace {

void check_trace(const PaceTrace& trace, const MarketInstance& instance, const ItemSequence& seq) {
  if (trace.n != instance.n()) throw DimensionMismatch("trace agent count differs from instance");
  if (trace.t != seq.horizon()) throw DimensionMismatch("trace length differs from sequence");
  seq.validate(instance.m());
}

}  // namespace

Vector regret(const PaceTrace& trace, const Vector& hindsight_u, std::int64_t t) {
  if (trace.t != t) throw DimensionMismatch("trace length differs from horizon");
  if (hindsight_u.size() != trace.n) throw DimensionMismatch("hindsight utilities length differs from n");
  Vector realized = Vector::Zero(trace.n);
  for (std::size_t k = 0; k < trace.winners.size(); ++k) {
    realized(trace.winners[k]) += trace.winner_values[k];
  }
  return static_cast<double>(t) * hindsight_u - realized;
}

Vector envy(const PaceTrace& trace, const MarketInstance& instance, const ItemSequence& seq) {
  check_trace(trace, instance, seq);
  const Index n = instance.n();
  Matrix bundle_value = Matrix::Zero(n, n);  // (i, k): agent i's value for agent k's items
  for (std::size_t k = 0; k < seq.items.size(); ++k) {
    bundle_value.col(trace.winners[k]) += instance.item_values(seq.items[k]);
  }
  Vector out(n);
  for (Index i = 0; i < n; ++i) out(i) = bundle_value.row(i).maxCoeff() - bundle_value(i, i);
  return out;
}

MeanSquareErrors mean_square_errors(const PaceTrace& trace, const Vector& ref_beta,
                                    const Vector& ref_u) {
  if (ref_beta.size() != trace.n || ref_u.size() != trace.n) {
    throw DimensionMismatch("reference vectors must have length n");
  }
  const double share = 1.0 / static_cast<double>(trace.n);
  return {(trace.final_beta - ref_beta).squaredNorm(), (trace.final_u_bar - ref_u).squaredNorm(),
          (trace.avg_expenditure.array() - share).matrix().squaredNorm()};
}

std::size_t metric_index(std::string_view name) {
  const auto it = std::find(kMetricNames.begin(), kMetricNames.end(), name);
  if (it == kMetricNames.end()) throw InvalidArgument("unknown metric '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - kMetricNames.begin());
}

std::vector<std::int64_t> geometric_grid(std::int64_t t) {
  std::vector<std::int64_t> grid;
  for (std::int64_t s = 1; s <= std::min<std::int64_t>(t, 100); ++s) grid.push_back(s);
  while (!grid.empty() && grid.back() < t) {
    const auto prev = grid.back();
    const auto next = std::max(prev + 1, static_cast<std::int64_t>(std::llround(prev * 1.1)));
    grid.push_back(std::min(next, t));
  }
  return grid;
}

MetricSeries compute_metric_series(const MarketInstance& instance, const ItemSequence& seq,
                                   const PaceTrace& trace, const Benchmarks& bench) {
  check_trace(trace, instance, seq);
  const Index n = instance.n();
  for (const Vector* v : {&bench.beta_hs, &bench.u_hs, &bench.beta_star, &bench.u_star}) {
    if (v->size() != n) throw DimensionMismatch("benchmark vectors must have length n");
  }

  MetricSeries series;
  series.n = n;
  series.m = instance.m();
  series.delta0 = trace.delta0;
  series.times = trace.recorded_steps;
  for (auto& v : series.values) v.reserve(series.times.size());
  auto push = [&series](std::string_view name, double value) {
    series.values[metric_index(name)].push_back(value);
  };

  const double share = 1.0 / static_cast<double>(n);
  Matrix bundle_value = Matrix::Zero(n, n);
  Vector baseline_total = Vector::Zero(n);
  std::size_t next = 0;
  for (std::int64_t tau = 1; tau <= trace.t && next < series.times.size(); ++tau) {
    const auto k = static_cast<std::size_t>(tau - 1);
    const auto values = instance.item_values(seq.items[k]);
    bundle_value.col(trace.winners[k]) += values;
    baseline_total += values;
    if (series.times[next] != tau) continue;

    const auto row = static_cast<Index>(next);
    const Vector beta = trace.betas.row(row).transpose();
    const Vector u_bar = trace.u_bars.row(row).transpose();
    const Vector spend = trace.avg_spend.row(row).transpose();
    const double elapsed = static_cast<double>(tau);
    const Vector baseline = instance.budgets().cwiseProduct(baseline_total) / elapsed;

    double envy_max = 0.0;
    for (Index i = 0; i < n; ++i) {
      envy_max = std::max(envy_max, bundle_value.row(i).maxCoeff() - bundle_value(i, i));
    }

    push("rel_beta_hs", relative_error_max(beta, bench.beta_hs));
    push("rel_u_hs", relative_error_max(u_bar, bench.u_hs));
    push("rel_beta_star", relative_error_max(beta, bench.beta_star));
    push("rel_u_star", relative_error_max(u_bar, bench.u_star));
    push("mse_beta_hs", (beta - bench.beta_hs).squaredNorm());
    push("mse_u_hs", (u_bar - bench.u_hs).squaredNorm());
    push("mse_beta_star", (beta - bench.beta_star).squaredNorm());
    push("mse_u_star", (u_bar - bench.u_star).squaredNorm());
    push("mse_expenditure", (spend.array() - share).matrix().squaredNorm());
    push("regret_max", (bench.u_hs - u_bar).maxCoeff());
    push("envy_max", envy_max / elapsed);
    push("baseline_rel_u_hs", relative_error_max(baseline, bench.u_hs));
    ++next;
  }
  if (next != series.times.size()) throw DimensionMismatch("recorded steps exceed the trace");
  return series;
}

void write_series_csv_header(std::ostream& out) { out << "model,path_id,metric,t,value\n"; }

void write_series_csv_rows(std::ostream& out, const MetricSeries& series) {
  const auto old_precision = out.precision(17);
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    for (std::size_t s = 0; s < series.times.size(); ++s) {
      out << series.model << ',' << series.path_id << ',' << kMetricNames[k] << ','
          << series.times[s] << ',' << series.values[k][s] << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace pacefair
