#pragma once

#include <rbadapt/config.hpp>
#include <rbadapt/csv.hpp>

namespace rbadapt {

ParametricFOM build_model(const ExperimentConfig& config);

struct RunOptions {
  unsigned threads = 1;
  // Record the test-set error after every iteration (costs one ROM solve per test
  // point per iteration; excluded from offline_seconds).
  bool track_error_curve = false;
};

struct RunReport {
  ExperimentConfig config;
  GreedyResult result;
  ParameterList test;
  TrueErrors errors;
  std::vector<double> error_curve;  // eps_max after each iteration when tracked

  double offline_seconds = 0.0;     // greedy loop, curve tracking excluded
  double validation_seconds = 0.0;  // FOM solves on the test set

  bool converged() const { return result.trace.converged; }
  bool success() const { return converged() && errors.max <= config.greedy.tol; }
  Index dimension() const { return test.empty() ? 0 : test.front().size(); }
};

// Builds the model, samples the sets, runs the configured algorithm and measures the
// true output error on the test set.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

CsvMetadata run_metadata(const ExperimentConfig& config);

// trace.csv, errors.csv and summary.txt under config.output_dir.
void write_run_artifacts(const RunReport& report);
std::string summarize(const RunReport& report);

struct Comparison {
  RunReport fixed;
  RunReport adaptive;
};

// Runs both configs with error-curve tracking. Throws ConfigError when the models or
// test sets differ.
Comparison run_comparison(const ExperimentConfig& fixed, const ExperimentConfig& adaptive,
                          const RunOptions& options = {});

// iteration,eps_max_fixed,eps_max_adaptive,delta_max_fixed,delta_max_adaptive
std::string comparison_curves_csv(const Comparison& c, const CsvMetadata& meta = {});
// label,algorithm,training_points,iterations,r,l_deim,offline_seconds,eps_max
std::string runtime_table_csv(const Comparison& c, const CsvMetadata& meta = {}, bool record_wall_time = true);
std::string runtime_table_text(const Comparison& c);

void write_comparison_artifacts(const Comparison& c, const std::filesystem::path& directory);

}  // namespace rbadapt
