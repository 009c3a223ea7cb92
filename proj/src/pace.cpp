#include "pacefair/pace.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pacefair {

TraceOptions TraceOptions::every_step(std::int64_t t) { return every(1, t); }

TraceOptions TraceOptions::every(std::int64_t k, std::int64_t t) {
  if (k < 1) throw InvalidArgument("recording stride must be positive");
  TraceOptions options;
  for (std::int64_t s = k; s <= t; s += k) options.record_steps.push_back(s);
  if (t >= 1 && (options.record_steps.empty() || options.record_steps.back() != t)) {
    options.record_steps.push_back(t);
  }
  return options;
}

PaceTrace run_pace(const MarketInstance& instance, const ItemSequence& seq, double delta0,
                   const TraceOptions& options) {
  seq.validate(instance.m());
  if (seq.items.empty()) throw InvalidHorizon("pacing needs at least one item");
  if (!std::is_sorted(options.record_steps.begin(), options.record_steps.end())) {
    throw InvalidArgument("record steps must be sorted");
  }

  const Index n = instance.n();
  const std::int64_t t = seq.horizon();
  PaceTrace trace;
  trace.n = n;
  trace.t = t;
  trace.delta0 = delta0;
  trace.winners.reserve(static_cast<std::size_t>(t));
  trace.winning_bids.reserve(static_cast<std::size_t>(t));
  trace.winner_values.reserve(static_cast<std::size_t>(t));

  std::vector<std::int64_t> steps;
  for (auto s : options.record_steps) {
    if (s >= 1 && s <= t && (steps.empty() || steps.back() != s)) steps.push_back(s);
  }
  trace.betas.resize(static_cast<Index>(steps.size()), n);
  trace.u_bars.resize(static_cast<Index>(steps.size()), n);
  trace.avg_spend.resize(static_cast<Index>(steps.size()), n);

  auto state = PacingState<double>::initial(n, delta0);
  std::size_t next_record = 0;
  for (auto item : seq.items) {
    const auto step = advance_pacing(state, instance.item_values(item));
    trace.winners.push_back(static_cast<std::int32_t>(step.winner));
    trace.winning_bids.push_back(step.winning_bid);
    trace.winner_values.push_back(step.winner_value);
    if (next_record < steps.size() && steps[next_record] == state.tau) {
      const auto row = static_cast<Index>(next_record);
      trace.betas.row(row) = state.beta.transpose();
      trace.u_bars.row(row) = state.u_bar.transpose();
      trace.avg_spend.row(row) =
          (state.cumulative_spend / static_cast<double>(state.tau)).transpose();
      ++next_record;
    }
  }
  trace.recorded_steps = std::move(steps);
  trace.final_beta = state.beta;
  trace.final_u_bar = state.u_bar;
  trace.avg_expenditure = state.cumulative_spend / static_cast<double>(t);
  return trace;
}

double pacing_loss(const MarketInstance& instance, const Vector& beta, Index item) {
  const auto [winner, bid] = highest_bidder(beta, instance.item_values(item));
  (void)winner;
  return bid - beta.array().log().sum() / static_cast<double>(instance.n());
}

DaRun run_pace_as_dual_averaging(const MarketInstance& instance, const ItemSequence& seq,
                                 double delta0) {
  seq.validate(instance.m());
  DaRun run;
  run.reg = LogBarrierRegularizer<double>::pacing_box(instance.n(), delta0);
  auto oracle = [&](const Vector& w, std::int64_t tau) {
    const Index item = seq.items[static_cast<std::size_t>(tau - 1)];
    const auto values = instance.item_values(item);
    const auto [winner, bid] = highest_bidder(w, values);
    Vector g = Vector::Zero(instance.n());
    g(winner) = values(winner);
    const double loss = bid + run.reg.value(w);
    return std::pair<Vector, double>{std::move(g), loss};
  };
  run.records = run_dual_averaging(oracle, run.reg, seq.horizon(), run.w_next);
  return run;
}

double max_deviation_from_da(const MarketInstance& instance, const ItemSequence& seq,
                             double delta0) {
  const PaceTrace trace = run_pace(instance, seq, delta0, TraceOptions::every_step(seq.horizon()));
  const DaRun da = run_pace_as_dual_averaging(instance, seq, delta0);
  double worst = (da.records.front().w.array() - (1.0 + delta0)).abs().maxCoeff();
  // records[k].w is w_{k+1}; trace row k - 1 is beta^{k+1}.
  for (std::size_t k = 1; k < da.records.size(); ++k) {
    const auto row = static_cast<Index>(k - 1);
    worst = std::max(worst, (da.records[k].w - trace.betas.row(row).transpose()).cwiseAbs().maxCoeff());
  }
  worst = std::max(worst, (da.w_next - trace.final_beta).cwiseAbs().maxCoeff());
  return worst;
}

bool equivalence_with_da(const MarketInstance& instance, const ItemSequence& seq, double delta0,
                         double tol) {
  return max_deviation_from_da(instance, seq, delta0) <= tol;
}

void write_trace_csv(std::ostream& out, const PaceTrace& trace, bool with_beta, bool with_u_bar) {
  out << "tau,winner,winning_bid";
  if (with_beta) {
    for (Index i = 1; i <= trace.n; ++i) out << ",beta_" << i;
  }
  if (with_u_bar) {
    for (Index i = 1; i <= trace.n; ++i) out << ",ubar_" << i;
  }
  out << '\n';
  const auto old_precision = out.precision(17);
  std::size_t next_record = 0;
  for (std::int64_t tau = 1; tau <= trace.t; ++tau) {
    const auto k = static_cast<std::size_t>(tau - 1);
    out << tau << ',' << trace.winners[k] << ',' << trace.winning_bids[k];
    const bool recorded =
        next_record < trace.recorded_steps.size() && trace.recorded_steps[next_record] == tau;
    const auto row = static_cast<Index>(next_record);
    if (with_beta) {
      for (Index i = 0; i < trace.n; ++i) {
        out << ',';
        if (recorded) out << trace.betas(row, i);
      }
    }
    if (with_u_bar) {
      for (Index i = 0; i < trace.n; ++i) {
        out << ',';
        if (recorded) out << trace.u_bars(row, i);
      }
    }
    if (recorded) ++next_record;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace pacefair
