// Acceptance suite: one PASS/FAIL line per criterion, with the measured quantities.
// Exit status is nonzero if any criterion fails.

#include "oracles.hpp"
#include "pacefair/eg_solver.hpp"
#include "pacefair/harness.hpp"
#include "pacefair/metrics.hpp"
#include "pacefair/pace.hpp"
#include "pacefair/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace pacefair;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_seconds,
               const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_seconds > 0 && seconds > budget_seconds) {
    out.pass = false;
    out.detail += "; over time budget " + std::to_string(budget_seconds) + " s";
  }
  if (!out.pass) ++failures;
  std::printf("[%s] %2d %-34s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
              out.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// --- shared instance builders ---------------------------------------------------------------

InputModel model_of_kind(int kind, Index m, std::uint64_t seed) {
  switch (kind) {
    case 0: return InputModel::iid(random_distribution(m, seed), seed);
    case 1:
      return InputModel::corrupted(random_distribution(m, seed), {CorruptionKind::decaying, 2.0}, seed);
    case 2: return InputModel::markov(random_distribution(m, seed), random_transition(m, seed), seed);
    default: return InputModel::periodic(random_period_dists(10, m, seed, 2.0), seed);
  }
}

struct DaCase {
  MarketInstance instance;
  ItemSequence seq;
};

std::vector<DaCase> equivalence_cases() {
  std::vector<DaCase> cases;
  const Index ns[] = {2, 5, 20};
  const Index ms[] = {3, 50};
  for (int k = 0; k < 50; ++k) {
    const Index n = ns[k % 3];
    const Index m = ms[(k / 3) % 2];
    const auto seed = static_cast<std::uint64_t>(1000 + k);
    const InputModel model = model_of_kind(k % 4, m, seed);
    const Index rank = std::min<Index>({n, m, 5});
    MarketInstance inst = generate_market(n, m, rank, 0.1, seed, reference_distribution(model));
    cases.push_back({std::move(inst), sample_sequence(model, 2000, seed)});
  }
  return cases;
}

ExperimentConfig base_config(ModelKind kind, Index n, Index m, std::int64_t t, std::int64_t paths) {
  ExperimentConfig c;
  c.market.n = n;
  c.market.m = m;
  c.market.rank = std::min<Index>({n, m, 10});
  c.model.kind = kind;
  c.t = t;
  c.paths = paths;
  c.record_every = 100;
  return c;
}

// --- criteria -------------------------------------------------------------------------------

Outcome equivalence(const std::vector<DaCase>& cases) {
  double worst = 0.0;
  int bad = 0;
  for (const auto& c : cases) {
    const double dev = max_deviation_from_da(c.instance, c.seq);
    worst = std::max(worst, dev);
    bad += dev > 1e-12;
  }
  return {bad == 0, std::to_string(cases.size()) + " runs, max |beta - w| = " + fmt(worst)};
}

Outcome lemma_diagnostic(const std::vector<DaCase>& cases) {
  int checks = 0, box_fail = 0, nominal_fail = 0;
  double min_slack_box = INFINITY;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& c = cases[k];
    const DaRun da = run_pace_as_dual_averaging(c.instance, c.seq);
    const auto hs = hindsight_solution(c.instance, c.seq);
    if (!hs.converged) return {false, "hindsight solve did not converge on run " + std::to_string(k)};

    std::vector<Vector> refs{hs.beta_hat};
    CounterRng rng(derive_seed(7, k));
    for (int r = 0; r < 5; ++r) {
      Vector w(c.instance.n());
      for (Index i = 0; i < w.size(); ++i) w(i) = da.reg.lo + (da.reg.hi - da.reg.lo) * rng.uniform();
      refs.push_back(w);
    }
    for (const auto& w_ref : refs) {
      const double psi = da.reg.value(w_ref);
      std::vector<double> ref_losses;
      ref_losses.reserve(c.seq.items.size());
      for (auto item : c.seq.items) {
        ref_losses.push_back((w_ref.array() * c.instance.item_values(item).array()).maxCoeff() + psi);
      }
      const auto box = regret_bound_check(da.records, da.w_next, w_ref, ref_losses, da.reg.box_modulus());
      const auto nominal = regret_bound_check(da.records, da.w_next, w_ref, ref_losses, da.reg.nominal_modulus());
      ++checks;
      box_fail += !box.holds;
      nominal_fail += !nominal.holds;
      min_slack_box = std::min(min_slack_box, box.rhs - box.lhs);
    }
  }
  return {box_fail == 0,
          std::to_string(checks) + " checks; sigma = 1/(n h^2): " + std::to_string(box_fail) +
              " violations (min slack " + fmt(min_slack_box) + "); sigma = 1/n: " +
              std::to_string(nominal_fail) + " violations"};
}

Outcome grid_oracle() {
  double worst = 0.0, worst_closed = 0.0;
  int bad = 0;
  for (int k = 0; k < 30; ++k) {
    const Index n = 1 + k % 3;
    const Index m = 1 + (k / 3) % 5;
    const auto seed = static_cast<std::uint64_t>(500 + k);
    const Index rank = 1 + static_cast<Index>(seed % static_cast<std::uint64_t>(std::min(n, m)));
    const auto ref = random_distribution(m, seed);
    const MarketInstance inst = generate_market(n, m, rank, 0.5, seed, ref);
    const auto w = random_distribution(m, seed + 77, 2.0);
    const auto prob = DualProblem::make(inst.valuations(), w.probs(), 1.0);
    const auto sol = solve_dual(prob);
    if (!sol.converged) ++bad;
    const Vector grid = oracle::grid_minimizer(inst.valuations(), w.probs(), prob.lo, prob.hi, 1e-3);
    const double gap = (grid - sol.beta_hat).cwiseAbs().maxCoeff();
    worst = std::max(worst, gap);
    bad += gap > 2e-3;
    if (n == 1) {
      const double closed = std::clamp(1.0 / inst.valuations().row(0).dot(w.probs().transpose()), prob.lo, prob.hi);
      const double err = std::abs(closed - sol.beta_hat(0));
      worst_closed = std::max(worst_closed, err);
      bad += err > 1e-8;
    }
  }
  return {bad == 0, "30 instances, max |beta - grid| = " + fmt(worst) +
                        ", n=1 closed-form error " + fmt(worst_closed)};
}

Outcome decay_ratio(const AggregateReport& r, const std::string& metric, std::int64_t early,
                    double factor) {
  const double a = r.mean_at(metric, early);
  const double b = r.terminal(metric);
  return {b <= a / factor, metric + " t=" + std::to_string(early) + ": " + fmt(a) + ", t=" +
                               std::to_string(r.times.back()) + ": " + fmt(b) + " (ratio " +
                               fmt(b / a) + ")"};
}

Outcome corruption_monotone() {
  std::vector<double> terminal;
  std::string detail;
  for (double delta : {0.0, 0.05, 0.2}) {
    ExperimentConfig c = base_config(ModelKind::corrupted, 10, 30, 20000, 10);
    c.model.corruption = {CorruptionKind::budgeted, delta};
    const auto r = run_experiment(c).report;
    terminal.push_back(r.terminal("mse_beta_star"));
    detail += "delta=" + fmt(delta) + ": " + fmt(terminal.back()) + "  ";
  }
  const bool pass = terminal[0] < terminal[1] && terminal[1] < terminal[2];
  return {pass, detail};
}

Outcome periodic_scaling() {
  std::vector<double> terminal;
  std::string detail;
  bool decayed = true;
  for (Index q : {10, 50, 100}) {
    ExperimentConfig c = base_config(ModelKind::periodic, 10, 30, 20000, 10);
    c.model.period = q;
    c.model.sharpness = 4.0;
    const auto r = run_experiment(c).report;
    const double early = r.mean_at("mse_beta_hs", 500);
    terminal.push_back(r.terminal("mse_beta_hs"));
    decayed &= terminal.back() < 0.5 * early;
    detail += "q=" + std::to_string(q) + ": " + fmt(early) + " -> " + fmt(terminal.back()) + "  ";
  }
  const bool ordered = terminal[0] <= terminal[1] && terminal[1] <= terminal[2];
  return {ordered && decayed, detail};
}

Outcome markov_convergence() {
  ExperimentConfig c = base_config(ModelKind::markov, 10, 30, 20000, 10);
  const auto r = run_experiment(c).report;
  const auto beta = decay_ratio(r, "rel_beta_hs", 1000, 3.0);
  const auto u = decay_ratio(r, "rel_u_hs", 1000, 3.0);
  return {beta.pass && u.pass, beta.detail + "; " + u.detail};
}

Outcome baseline_dominance() {
  std::string detail;
  bool pass = true;
  for (auto kind : {ModelKind::iid, ModelKind::corrupted, ModelKind::markov, ModelKind::periodic}) {
    ExperimentConfig c = base_config(kind, 100, 300, 20000, 10);
    if (kind == ModelKind::corrupted) c.model.corruption = {CorruptionKind::decaying, 2.0};
    const auto r = run_experiment(c).report;
    const auto& pace = r.mean_of("rel_u_hs");
    const auto& base = r.mean_of("baseline_rel_u_hs");
    double worst_margin = INFINITY;
    for (std::size_t s = 0; s < r.times.size(); ++s) {
      if (r.times[s] < 2000) continue;
      worst_margin = std::min(worst_margin, base[s] - pace[s]);
    }
    pass &= worst_margin > 0.0;
    detail += std::string(to_string(kind)) + ": pace " + fmt(pace.back()) + " vs baseline " +
              fmt(base.back()) + " (min gap " + fmt(worst_margin) + ")  ";
  }
  return {pass, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "pacefair_acceptance_repro";
  fs::remove_all(dir);
  std::string detail;
  bool pass = true;
  for (auto kind : {ModelKind::iid, ModelKind::corrupted, ModelKind::markov, ModelKind::periodic}) {
    ExperimentConfig c = base_config(kind, 10, 30, 5000, 4);
    c.record_every = 0;
    const std::string name(to_string(kind));
    c.output_dir = dir / (name + "_1");
    run_experiment(c);
    c.output_dir = dir / (name + "_2");
    c.threads = 3;
    run_experiment(c);
    for (const char* file : {"metrics.csv", "aggregate.csv"}) {
      const std::string a = slurp(dir / (name + "_1") / file);
      const std::string b = slurp(dir / (name + "_2") / file);
      pass &= !a.empty() && a == b;
    }
  }
  fs::remove_all(dir);
  return {pass, pass ? "metrics.csv and aggregate.csv byte-identical for 4 models"
                     : "CSV outputs differ between identical runs"};
}

Outcome invariants() {
  int cases = 0, bad = 0;
  for (std::uint64_t c = 0; c < 1000; ++c) {
    CounterRng rng(derive_seed(31337, c));
    const Index n = 1 + static_cast<Index>(rng.below(10));
    const Index m = 1 + static_cast<Index>(rng.below(15));
    const Index rank = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::min(n, m))));
    const double delta0 = 0.05 + 3.0 * rng.uniform();
    const std::int64_t t = 1 + static_cast<std::int64_t>(rng.below(500));
    const InputModel model = model_of_kind(static_cast<int>(c % 4), m, c);
    const MarketInstance inst = generate_market(n, m, rank, 3.0 * rng.uniform(), c);
    const ItemSequence seq = sample_sequence(model, t, c);

    bool ok = true;
    auto state = PacingState<double>::initial(n, delta0);
    for (std::int64_t tau = 1; tau <= t; ++tau) {
      const auto values = inst.item_values(seq.items[static_cast<std::size_t>(tau - 1)]);
      const Vector u_prev = state.u_bar;
      const auto [next, out] = pace_update(state, values);
      ok &= (next.beta.array() >= next.lower()).all() && (next.beta.array() <= next.upper()).all();
      for (Index i = 0; i < n; ++i) {
        if (i != out.winner) ok &= out.utilities(i) == 0.0 && out.expenditures(i) == 0.0;
      }
      ok &= out.utilities(out.winner) == values(out.winner);
      ok &= out.expenditures.sum() == out.winning_bid;
      const Vector avg = (static_cast<double>(tau - 1) * u_prev + out.utilities) / static_cast<double>(tau);
      ok &= (next.u_bar - avg).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + avg.cwiseAbs().maxCoeff());
      state = next;
    }
    const auto trace = run_pace(inst, seq, delta0);
    ok &= (envy(trace, inst, seq).array() >= 0.0).all();
    ++cases;
    bad += !ok;
  }
  return {bad == 0, std::to_string(cases) + " generated cases, " + std::to_string(bad) + " failures"};
}

}  // namespace

int main() {
  std::printf("pacefair acceptance suite\n");
  const auto cases = equivalence_cases();
  criterion(1, "pacing equals dual averaging", 10, [&] { return equivalence(cases); });
  criterion(2, "regret bound diagnostic", 0, [&] { return lemma_diagnostic(cases); });
  criterion(3, "hindsight solver vs grid oracle", 30, grid_oracle);
  criterion(4, "iid convergence of beta", 60, [] {
    const auto r = run_experiment(base_config(ModelKind::iid, 10, 30, 20000, 10)).report;
    return decay_ratio(r, "mse_beta_star", 1000, 5.0);
  });
  criterion(5, "corruption monotonicity", 180, corruption_monotone);
  criterion(6, "periodic block-length scaling", 180, periodic_scaling);
  criterion(7, "markov convergence", 60, markov_convergence);
  criterion(8, "expenditure target", 0, [] {
    const auto r = run_experiment(base_config(ModelKind::iid, 10, 30, 20000, 10)).report;
    return decay_ratio(r, "mse_expenditure", 1000, 5.0);
  });
  criterion(9, "baseline dominance at scale", 600, baseline_dominance);
  criterion(10, "reproducibility", 0, reproducibility);
  criterion(11, "invariant suite", 0, invariants);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
