#pragma once

// Experiment orchestration: build a market and an arrival model, run pacing on repeated
// sample paths, benchmark against hindsight and reference solutions, aggregate.

#include "pacefair/eg_solver.hpp"
#include "pacefair/input_models.hpp"
#include "pacefair/json_io.hpp"
#include "pacefair/market.hpp"
#include "pacefair/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pacefair {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr std::string_view kArtifactVersion = "1.0.0";

/// max(0, A B^T + noise E) with A (n x rank), B (m x rank) uniform on [0,1) and E uniform on
/// [-1/2, 1/2), then each row normalized to expectation 1 under `ref`.
MarketInstance generate_market(Index n, Index m, Index rank, double noise, std::uint64_t seed,
                               const ReferenceDistribution& ref);
/// Same, normalized against the uniform distribution.
MarketInstance generate_market(Index n, Index m, Index rank, double noise, std::uint64_t seed);

struct MarketSpec {
  std::optional<std::filesystem::path> path;  // inline instance file; otherwise generated
  Index n = 10;
  Index m = 30;
  Index rank = 10;
  double noise = 0.1;
  std::uint64_t seed = 1;
  /// Rescale valuations against the model's reference distribution.
  bool normalize = true;
};

/// Either an explicit model (JSON) or parameters for a randomly generated one.
struct ModelSpec {
  std::optional<Json> explicit_model;
  ModelKind kind = ModelKind::iid;
  std::uint64_t seed = 2;
  double sharpness = 1.0;  // concentration of generated distributions
  CorruptionSchedule corruption;
  Index period = 100;
};

struct ExperimentConfig {
  std::string label;  // written in the model column; defaults to the model kind
  MarketSpec market;
  ModelSpec model;
  std::int64_t t = 1000;
  std::int64_t paths = 10;
  double delta0 = 1.0;
  std::uint64_t base_seed = 42;
  /// 0: geometric grid; k > 0: every k steps.
  std::int64_t record_every = 0;
  std::filesystem::path output_dir;  // empty: nothing written
  unsigned threads = 1;
  SolverOptions solver;
  bool dump_trace = false;  // per-step CSVs for path 0
  /// Test hook: every path reuses the seed of path 0.
  bool force_equal_path_seeds = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses the versioned JSON configuration. Relative instance paths resolve against
/// `base_dir`.
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json config_to_json(const ExperimentConfig& config);

struct AggregateReport {
  std::string model;
  std::int64_t paths = 0;
  std::vector<std::int64_t> times;
  std::array<std::vector<double>, kMetricNames.size()> mean;
  /// Absent with a single path.
  std::optional<std::array<std::vector<double>, kMetricNames.size()>> std_error;
  Json provenance;

  const std::vector<double>& mean_of(std::string_view metric) const {
    return mean[metric_index(metric)];
  }
  /// Mean of `metric` at the recorded time `t`; throws InvalidArgument if t was not recorded.
  double mean_at(std::string_view metric, std::int64_t t) const;
  double terminal(std::string_view metric) const { return mean_of(metric).back(); }
};

/// Mean and standard error (sample sd / sqrt(paths)) across paths at each time.
/// Throws GridMismatch when the series disagree on times.
AggregateReport summarize(const std::vector<MetricSeries>& series);

struct PreparedExperiment {
  MarketInstance instance;
  InputModel model;
  ReferenceDistribution reference;
  DualSolution reference_solution;
};

/// Builds the market, the model and the reference benchmark of a config.
PreparedExperiment prepare_experiment(const ExperimentConfig& config);

std::uint64_t path_seed(const ExperimentConfig& config, std::int64_t path);

/// Runs one sample path. Throws NoConvergence if the hindsight solve fails.
MetricSeries run_path(const ExperimentConfig& config, const PreparedExperiment& prepared,
                      std::int64_t path);

struct ExperimentResult {
  AggregateReport report;
  std::vector<MetricSeries> series;
};

/// Runs every path (in parallel when config.threads > 1), aggregates and, if an output
/// directory is set, writes metrics.csv, aggregate.csv and summary.json.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_aggregate_csv(std::ostream& out, const AggregateReport& report, bool with_header = true);

/// Reads rows written by write_series_csv_rows (header included) back into series, one per
/// (model, path_id) in order of first appearance.
std::vector<MetricSeries> read_series_csv(std::istream& in);

}  // namespace pacefair
