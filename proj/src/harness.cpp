#include "pacefair/harness.hpp"

#include "pacefair/errors.hpp"
#include "pacefair/pace.hpp"
#include "pacefair/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace pacefair {

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string_view corruption_name(CorruptionKind kind) {
  return kind == CorruptionKind::budgeted ? "budgeted" : "decaying";
}

InputModel build_model(const ModelSpec& spec, Index m) {
  if (spec.explicit_model) {
    InputModel model = model_from_json(*spec.explicit_model);
    if (model.m() != m) throw ConfigError("model item universe differs from the market's");
    return model;
  }
  switch (spec.kind) {
    case ModelKind::iid:
      return InputModel::iid(random_distribution(m, spec.seed, spec.sharpness), spec.seed);
    case ModelKind::corrupted:
      return InputModel::corrupted(random_distribution(m, spec.seed, spec.sharpness),
                                   spec.corruption, derive_seed(spec.seed, 3));
    case ModelKind::markov:
      return InputModel::markov(random_distribution(m, spec.seed, spec.sharpness),
                                random_transition(m, derive_seed(spec.seed, 1)), spec.seed);
    case ModelKind::periodic:
      return InputModel::periodic(
          random_period_dists(spec.period, m, derive_seed(spec.seed, 2), spec.sharpness), spec.seed);
  }
  throw ConfigError("unknown model kind");
}

Index model_universe(const ExperimentConfig& config) {
  if (config.market.path) {
    const Json j = read_json_file(*config.market.path);
    return market_from_json(j).m();
  }
  return config.market.m;
}

std::string model_label(const ExperimentConfig& config, const InputModel& model) {
  return config.label.empty() ? std::string(to_string(model.kind())) : config.label;
}

}  // namespace

MarketInstance generate_market(Index n, Index m, Index rank, double noise, std::uint64_t seed,
                               const ReferenceDistribution& ref) {
  if (n < 1 || m < 1) throw InvalidArgument("market needs n >= 1 and m >= 1");
  if (rank < 1 || rank > std::min(n, m)) {
    throw InvalidRank("rank must lie in [1, min(n, m)], got " + std::to_string(rank));
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("noise must be >= 0");
  if (ref.size() != m) throw DimensionMismatch("reference distribution length differs from m");

  CounterRng item_rng(derive_seed(seed, 0));
  Matrix item_factors(m, rank);
  for (Index j = 0; j < m; ++j) {
    for (Index k = 0; k < rank; ++k) item_factors(j, k) = item_rng.uniform();
  }

  Matrix values(n, m);
  for (Index i = 0; i < n; ++i) {
    // Each agent row has its own stream; a zero row is redrawn from the next attempt's stream.
    for (std::uint64_t attempt = 0;; ++attempt) {
      CounterRng rng(derive_seed(derive_seed(seed, 1 + static_cast<std::uint64_t>(i)), attempt));
      RowVectorX<double> factors(rank);
      for (Index k = 0; k < rank; ++k) factors(k) = rng.uniform();
      RowVectorX<double> row = factors * item_factors.transpose();
      for (Index j = 0; j < m; ++j) row(j) = std::max(0.0, row(j) + noise * (rng.uniform() - 0.5));
      if (row.dot(ref.probs().transpose()) > 0.0) {
        values.row(i) = row;
        break;
      }
      if (attempt > 1000) throw InvalidArgument("could not draw a valuation row with positive value");
    }
  }
  return MarketInstance(normalize_valuations(values, ref));
}

MarketInstance generate_market(Index n, Index m, Index rank, double noise, std::uint64_t seed) {
  return generate_market(n, m, rank, noise, seed, ReferenceDistribution::uniform(m));
}

void ExperimentConfig::validate() const {
  if (t < 1) throw ConfigError("t must be at least 1");
  if (paths < 1) throw ConfigError("paths must be at least 1");
  if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
  if (record_every < 0) throw ConfigError("record.every must be positive");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (market.path && !std::filesystem::exists(*market.path)) {
    throw ConfigError("market file " + market.path->string() + " does not exist");
  }
  if (!market.path && (market.n < 1 || market.m < 1)) throw ConfigError("market needs n, m >= 1");
  if (!(solver.tol > 0.0) || solver.max_iters < 1) throw ConfigError("invalid solver options");
  if (!model.explicit_model && model.kind == ModelKind::periodic && model.period < 1) {
    throw ConfigError("period must be at least 1");
  }
}

ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  try {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    const int version = j.value("schema_version", 0);
    if (version != kConfigSchemaVersion) {
      throw ConfigError("unsupported schema_version " + std::to_string(version) + ", expected " +
                        std::to_string(kConfigSchemaVersion));
    }
    ExperimentConfig c;
    c.label = j.value("label", std::string());

    const Json& market = j.at("market");
    if (market.contains("path")) {
      std::filesystem::path p = market.at("path").get<std::string>();
      c.market.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      c.market.normalize = market.value("normalize", false);
    } else {
      c.market.n = market.at("n").get<Index>();
      c.market.m = market.at("m").get<Index>();
      c.market.rank = market.value("rank", Index{10});
      c.market.noise = market.value("noise", 0.1);
      c.market.seed = market.value("seed", std::uint64_t{1});
      c.market.normalize = market.value("normalize", true);
    }

    const Json& model = j.at("model");
    if (model.contains("explicit")) {
      c.model.explicit_model = model.at("explicit");
    } else {
      c.model.kind = parse_model_kind(model.at("kind").get<std::string>());
      c.model.seed = model.value("seed", std::uint64_t{2});
      c.model.sharpness = model.value("sharpness", 1.0);
      c.model.period = model.value("period", Index{100});
      const std::string schedule = model.value("schedule", std::string("decaying"));
      if (schedule != "decaying" && schedule != "budgeted") {
        throw ConfigError("unknown corruption schedule '" + schedule + "'");
      }
      c.model.corruption.kind =
          schedule == "budgeted" ? CorruptionKind::budgeted : CorruptionKind::decaying;
      c.model.corruption.amount = model.value("amount", 1.0);
    }

    c.t = j.at("t").get<std::int64_t>();
    c.paths = j.value("paths", std::int64_t{10});
    c.delta0 = j.value("delta0", 1.0);
    c.base_seed = j.value("base_seed", std::uint64_t{42});
    if (j.contains("record")) {
      const Json& record = j.at("record");
      if (record.is_string()) {
        if (record.get<std::string>() != "geometric") throw ConfigError("record must be 'geometric' or {\"every\": k}");
      } else {
        c.record_every = record.at("every").get<std::int64_t>();
        if (c.record_every < 1) throw ConfigError("record.every must be positive");
      }
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.threads = j.value("threads", 1u);
    if (j.contains("solver")) {
      const Json& solver = j.at("solver");
      c.solver.tol = solver.value("tol", c.solver.tol);
      c.solver.max_iters = solver.value("max_iters", c.solver.max_iters);
      const std::string method = solver.value("method", std::string("smoothed_newton"));
      if (method == "smoothed_newton") {
        c.solver.method = DualMethod::smoothed_newton;
      } else if (method == "dual_averaging") {
        c.solver.method = DualMethod::dual_averaging;
      } else {
        throw ConfigError("unknown solver method '" + method + "'");
      }
    }
    c.dump_trace = j.value("dump_trace", false);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
}

Json config_to_json(const ExperimentConfig& c) {
  Json market;
  if (c.market.path) {
    market = Json{{"path", c.market.path->string()}, {"normalize", c.market.normalize}};
  } else {
    market = Json{{"n", c.market.n},         {"m", c.market.m},       {"rank", c.market.rank},
                  {"noise", c.market.noise}, {"seed", c.market.seed}, {"normalize", c.market.normalize}};
  }
  Json model;
  if (c.model.explicit_model) {
    model = Json{{"explicit", *c.model.explicit_model}};
  } else {
    model = Json{{"kind", std::string(to_string(c.model.kind))},
                 {"seed", c.model.seed},
                 {"sharpness", c.model.sharpness},
                 {"period", c.model.period},
                 {"schedule", std::string(corruption_name(c.model.corruption.kind))},
                 {"amount", c.model.corruption.amount}};
  }
  Json out{{"schema_version", kConfigSchemaVersion},
           {"label", c.label},
           {"market", market},
           {"model", model},
           {"t", c.t},
           {"paths", c.paths},
           {"delta0", c.delta0},
           {"base_seed", c.base_seed},
           {"threads", c.threads},
           {"solver",
            {{"tol", c.solver.tol},
             {"max_iters", c.solver.max_iters},
             {"method", std::string(to_string(c.solver.method))}}},
           {"dump_trace", c.dump_trace}};
  if (c.record_every > 0) {
    out["record"] = Json{{"every", c.record_every}};
  } else {
    out["record"] = "geometric";
  }
  if (!c.output_dir.empty()) out["output_dir"] = c.output_dir.string();
  return out;
}

double AggregateReport::mean_at(std::string_view metric, std::int64_t t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) {
    throw InvalidArgument("time " + std::to_string(t) + " was not recorded");
  }
  return mean_of(metric)[static_cast<std::size_t>(it - times.begin())];
}

AggregateReport summarize(const std::vector<MetricSeries>& series) {
  if (series.empty()) throw InvalidArgument("summarize needs at least one series");
  const auto& first = series.front();
  for (const auto& s : series) {
    if (s.times != first.times) throw GridMismatch("series disagree on recording times");
    for (const auto& v : s.values) {
      if (v.size() != s.times.size()) throw GridMismatch("metric values misaligned with times");
    }
  }
  AggregateReport report;
  report.model = first.model;
  report.paths = static_cast<std::int64_t>(series.size());
  report.times = first.times;
  const auto points = first.times.size();
  const double count = static_cast<double>(series.size());
  if (series.size() > 1) report.std_error.emplace();
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    auto& mean = report.mean[k];
    mean.assign(points, 0.0);
    for (const auto& s : series) {
      for (std::size_t p = 0; p < points; ++p) mean[p] += s.values[k][p];
    }
    for (auto& v : mean) v /= count;
    if (report.std_error) {
      auto& se = (*report.std_error)[k];
      se.assign(points, 0.0);
      for (const auto& s : series) {
        for (std::size_t p = 0; p < points; ++p) {
          const double d = s.values[k][p] - mean[p];
          se[p] += d * d;
        }
      }
      for (auto& v : se) v = std::sqrt(v / (count - 1.0)) / std::sqrt(count);
    }
  }
  return report;
}

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  const Index m = model_universe(config);
  InputModel model = build_model(config.model, m);
  ReferenceDistribution reference = reference_distribution(model);

  std::optional<MarketInstance> instance;
  if (config.market.path) {
    MarketInstance raw = market_from_json(read_json_file(*config.market.path));
    if (config.market.normalize) {
      instance.emplace(normalize_valuations(raw.valuations(), reference), raw.budgets());
    } else {
      instance.emplace(std::move(raw));
    }
  } else if (config.market.normalize) {
    instance.emplace(generate_market(config.market.n, m, config.market.rank, config.market.noise,
                                     config.market.seed, reference));
  } else {
    const auto uniform = ReferenceDistribution::uniform(m);
    instance.emplace(generate_market(config.market.n, m, config.market.rank, config.market.noise,
                                     config.market.seed, uniform));
  }

  DualSolution star = reference_solution(*instance, reference, config.delta0, config.solver);
  if (!star.converged) {
    throw NoConvergence("reference dual solve did not converge (residual " +
                        std::to_string(star.residual) + ")");
  }
  return {std::move(*instance), std::move(model), std::move(reference), std::move(star)};
}

std::uint64_t path_seed(const ExperimentConfig& config, std::int64_t path) {
  const auto index = config.force_equal_path_seeds ? 0 : static_cast<std::uint64_t>(path);
  return derive_seed(config.base_seed, index);
}

MetricSeries run_path(const ExperimentConfig& config, const PreparedExperiment& prepared,
                      std::int64_t path) {
  const std::uint64_t seed = path_seed(config, path);
  const ItemSequence seq = sample_sequence(prepared.model, config.t, seed);
  const TraceOptions options = config.record_every > 0
                                   ? TraceOptions::every(config.record_every, config.t)
                                   : TraceOptions{geometric_grid(config.t)};
  const PaceTrace trace = run_pace(prepared.instance, seq, config.delta0, options);

  const DualSolution hs = hindsight_solution(prepared.instance, seq, config.delta0, config.solver);
  if (!hs.converged) {
    throw NoConvergence("hindsight solve for path " + std::to_string(path) + " (seed " +
                        std::to_string(seed) + ") did not converge, residual " +
                        std::to_string(hs.residual));
  }
  const Index n = prepared.instance.n();
  const Benchmarks bench{hs.beta_hat, equilibrium_utilities(hs, n),
                         prepared.reference_solution.beta_hat,
                         equilibrium_utilities(prepared.reference_solution, n)};
  MetricSeries series = compute_metric_series(prepared.instance, seq, trace, bench);
  series.model = model_label(config, prepared.model);
  series.path_id = path;
  series.path_seed = seed;

  if (config.dump_trace && path == 0 && !config.output_dir.empty()) {
    const PaceTrace full = run_pace(prepared.instance, seq, config.delta0,
                                    TraceOptions::every_step(config.t));
    std::ofstream trace_out(config.output_dir / "trace_path0.csv");
    write_trace_csv(trace_out, full, true, true);
    const DaRun da = run_pace_as_dual_averaging(prepared.instance, seq, config.delta0);
    std::ofstream da_out(config.output_dir / "da_trajectory_path0.csv");
    write_da_csv(da_out, da.records);
  }
  return series;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  if (!config.output_dir.empty()) std::filesystem::create_directories(config.output_dir);
  const PreparedExperiment prepared = prepare_experiment(config);

  const auto paths = static_cast<std::size_t>(config.paths);
  std::vector<std::optional<MetricSeries>> results(paths);
  std::vector<std::exception_ptr> errors(paths);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t p = next.fetch_add(1);
      if (p >= paths || failed.load()) return;
      try {
        results[p] = run_path(config, prepared, static_cast<std::int64_t>(p));
      } catch (...) {
        errors[p] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const unsigned workers = std::min<unsigned>(config.threads, static_cast<unsigned>(paths));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult result;
  result.series.reserve(paths);
  for (auto& r : results) result.series.push_back(std::move(*r));
  result.report = summarize(result.series);

  const Json config_json = config_to_json(config);
  Json seeds = Json::array();
  for (const auto& s : result.series) seeds.push_back(s.path_seed);
  Json terminal = Json::object();
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    Json entry{{"mean", result.report.mean[k].back()}};
    if (result.report.std_error) entry["stderr"] = (*result.report.std_error)[k].back();
    terminal[std::string(kMetricNames[k])] = entry;
  }
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
  result.report.provenance = Json{{"config", config_json},
                                  {"config_hash", hex64(fnv1a(config_json.dump()))},
                                  {"base_seed", config.base_seed},
                                  {"path_seeds", seeds},
                                  {"artifact_version", std::string(kArtifactVersion)},
                                  {"reference_beta", vector_to_json(prepared.reference_solution.beta_hat)},
                                  {"terminal", terminal},
                                  {"t", config.t},
                                  {"wall_clock_seconds", elapsed.count()},
                                  {"finished_at_unix", static_cast<std::int64_t>(std::time(nullptr))}};

  if (!config.output_dir.empty()) {
    std::ofstream metrics(config.output_dir / "metrics.csv");
    write_series_csv_header(metrics);
    for (const auto& s : result.series) write_series_csv_rows(metrics, s);
    std::ofstream aggregate(config.output_dir / "aggregate.csv");
    write_aggregate_csv(aggregate, result.report);
    write_json_file(config.output_dir / "summary.json", result.report.provenance);
  }
  return result;
}

void write_aggregate_csv(std::ostream& out, const AggregateReport& report, bool with_header) {
  if (with_header) out << "model,metric,t,mean,stderr\n";
  const auto old_precision = out.precision(17);
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    for (std::size_t p = 0; p < report.times.size(); ++p) {
      out << report.model << ',' << kMetricNames[k] << ',' << report.times[p] << ','
          << report.mean[k][p] << ',';
      if (report.std_error) out << (*report.std_error)[k][p];
      out << '\n';
    }
  }
  out.precision(old_precision);
}

std::vector<MetricSeries> read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "model,path_id,metric,t,value") {
    throw InvalidArgument("expected header model,path_id,metric,t,value");
  }
  std::vector<MetricSeries> out;
  std::map<std::pair<std::string, std::int64_t>, std::size_t> where;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::string, 5> fields;
    std::size_t start = 0;
    for (std::size_t f = 0; f < 5; ++f) {
      const auto comma = line.find(',', start);
      if ((comma == std::string::npos) != (f == 4)) {
        throw InvalidArgument("line " + std::to_string(line_no) + ": expected 5 fields");
      }
      fields[f] = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma + 1;
    }
    try {
      const auto key = std::make_pair(fields[0], std::stoll(fields[1]));
      auto [it, inserted] = where.try_emplace(key, out.size());
      if (inserted) {
        out.emplace_back();
        out.back().model = key.first;
        out.back().path_id = key.second;
      }
      MetricSeries& s = out[it->second];
      const std::size_t k = metric_index(fields[2]);
      const std::int64_t t = std::stoll(fields[3]);
      const double value = std::stod(fields[4]);
      auto& column = s.values[k];
      if (k == 0) {
        s.times.push_back(t);
      } else if (column.size() >= s.times.size() || s.times[column.size()] != t) {
        throw GridMismatch("line " + std::to_string(line_no) + ": time grid differs across metrics");
      }
      column.push_back(value);
    } catch (const std::logic_error& e) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace pacefair
