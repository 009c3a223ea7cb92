// pacefair: run pacing experiments, solve hindsight duals, generate markets and sequences.
//
// Exit codes: 0 success, 1 usage or other failure, 2 configuration error, 3 a required solve
// did not converge.

#include "pacefair/errors.hpp"
#include "pacefair/harness.hpp"
#include "pacefair/json_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace pacefair;

namespace {

void print_terminal(const AggregateReport& report) {
  std::cout << "model " << report.model << ", paths " << report.paths << ", t "
            << report.times.back() << '\n';
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    std::cout << "  " << kMetricNames[k] << " = " << report.mean[k].back();
    if (report.std_error) std::cout << " +- " << (*report.std_error)[k].back();
    std::cout << '\n';
  }
}

void emit_json(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out, j);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pacing-based online fair allocation experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> run_seed;
  std::string run_out;
  std::optional<std::int64_t> run_paths;
  std::optional<unsigned> run_threads;
  bool dump_trace = false;
  bool quiet = false;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", run_seed, "Override base_seed");
  run->add_option("--out", run_out, "Override output directory");
  run->add_option("--paths", run_paths, "Override number of sample paths");
  run->add_option("--threads", run_threads, "Worker threads");
  run->add_flag("--dump-trace", dump_trace, "Write per-step traces of path 0");
  run->add_flag("--quiet", quiet, "Do not print the terminal summary");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the hindsight dual of a realized sequence");
  std::string instance_path, sequence_path, solve_out;
  double delta0 = 1.0;
  double tol = 1e-8;
  solve->add_option("--instance", instance_path, "Market JSON")->required();
  solve->add_option("--sequence", sequence_path, "Sequence JSON")->required();
  solve->add_option("--delta0", delta0, "Box parameter");
  solve->add_option("--tol", tol, "Residual tolerance");
  solve->add_option("--out", solve_out, "Output file (default stdout)");

  // gen-market
  auto* gen = app.add_subcommand("gen-market", "Generate a low-rank synthetic market");
  Index gen_n = 10, gen_m = 30, gen_rank = 10;
  double gen_noise = 0.1;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--n", gen_n, "Agents");
  gen->add_option("--m", gen_m, "Items");
  gen->add_option("--rank", gen_rank, "Factor rank");
  gen->add_option("--noise", gen_noise, "Noise amplitude");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // sample
  auto* sample = app.add_subcommand("sample", "Sample an item sequence from a model");
  std::string model_path, sample_out;
  std::int64_t sample_t = 100;
  std::uint64_t sample_seed = 0;
  sample->add_option("--model", model_path, "Input model JSON")->required();
  sample->add_option("--t", sample_t, "Horizon");
  sample->add_option("--seed", sample_seed, "Path seed");
  sample->add_option("--out", sample_out, "Output file (default stdout)");

  // summarize
  auto* summ = app.add_subcommand("summarize", "Aggregate a metrics.csv into mean/stderr rows");
  std::string summ_in, summ_out;
  summ->add_option("--input", summ_in, "metrics.csv")->required();
  summ->add_option("--out", summ_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      const fs::path path(config_path);
      ExperimentConfig config = config_from_json(read_json_file(path), path.parent_path());
      if (run_seed) config.base_seed = *run_seed;
      if (!run_out.empty()) config.output_dir = run_out;
      if (run_paths) config.paths = *run_paths;
      if (run_threads) config.threads = *run_threads;
      if (dump_trace) config.dump_trace = true;
      config.validate();
      const ExperimentResult result = run_experiment(config);
      if (!quiet) print_terminal(result.report);
    } else if (*solve) {
      const MarketInstance instance = market_from_json(read_json_file(instance_path));
      const ItemSequence seq = sequence_from_json(read_json_file(sequence_path));
      SolverOptions options;
      options.tol = tol;
      const DualSolution sol = hindsight_solution(instance, seq, delta0, options);
      Json j = solution_to_json(sol);
      j["utilities"] = vector_to_json(equilibrium_utilities(sol, instance.n()));
      emit_json(j, solve_out);
      if (!sol.converged) {
        std::cerr << "error: hindsight solve did not converge (residual " << sol.residual << ")\n";
        return 3;
      }
    } else if (*gen) {
      emit_json(market_to_json(generate_market(gen_n, gen_m, gen_rank, gen_noise, gen_seed)),
                gen_out);
    } else if (*sample) {
      const InputModel model = model_from_json(read_json_file(model_path));
      emit_json(sequence_to_json(sample_sequence(model, sample_t, sample_seed), model.m()),
                sample_out);
    } else if (*summ) {
      std::ifstream in(summ_in);
      if (!in) throw ConfigError("cannot open " + summ_in);
      const auto series = read_series_csv(in);
      if (series.empty()) throw ConfigError(summ_in + " holds no rows");
      // One report per model label, in order of first appearance.
      std::vector<std::string> labels;
      for (const auto& s : series) {
        if (std::find(labels.begin(), labels.end(), s.model) == labels.end()) labels.push_back(s.model);
      }
      std::ofstream file;
      if (!summ_out.empty()) {
        file.open(summ_out);
        if (!file) throw ConfigError("cannot write " + summ_out);
      }
      std::ostream& out = summ_out.empty() ? std::cout : file;
      bool header = true;
      for (const auto& label : labels) {
        std::vector<MetricSeries> group;
        for (const auto& s : series) {
          if (s.model == label) group.push_back(s);
        }
        write_aggregate_csv(out, summarize(group), header);
        header = false;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NoConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
