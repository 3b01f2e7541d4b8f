// rbadapt: run reduced-basis greedy experiments from config files.
//
//   rbadapt run <config> [--out DIR] [--threads N] [--max-iters N] [--seed-coarse S] ...
//   rbadapt compare <fixed-config> <adaptive-config> [--out DIR] [--threads N]
//   rbadapt models
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 not converged
// or tolerance missed on the test set.

#include <rbadapt/benchmarks.hpp>
#include <rbadapt/experiment.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace rbadapt;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;

struct Overrides {
  std::string out;
  std::optional<unsigned> threads;
  std::optional<int> max_iters;
  std::optional<std::uint64_t> seed_coarse, seed_fine, seed_test;
  bool no_wall_time = false;
};

unsigned thread_count(const Overrides& o) {
  if (o.threads) return *o.threads;
  if (const char* env = std::getenv("RB_ADAPT_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError(std::string("RB_ADAPT_THREADS is not a number: ") + env);
    return static_cast<unsigned>(v);
  }
  return 1;
}

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& o) {
  ExperimentConfig cfg = load_config(path);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.max_iters) cfg.greedy.max_iterations = *o.max_iters;
  if (o.seed_coarse) cfg.coarse.seed = *o.seed_coarse;
  if (o.seed_fine) cfg.fine.seed = *o.seed_fine;
  if (o.seed_test) cfg.test.seed = *o.seed_test;
  if (o.no_wall_time) cfg.record_wall_time = false;
  cfg.validate();
  return cfg;
}

std::string domain_text(const ParameterDomain& d) {
  std::ostringstream os;
  for (Index j = 0; j < d.dimension(); ++j) {
    if (j) os << " x ";
    os << "[" << d.lower[j] << ", " << d.upper[j] << "]";
  }
  return os.str();
}

int cmd_models() {
  for (const auto& m : available_models()) {
    std::string names;
    for (std::size_t j = 0; j < m.domain.names.size(); ++j) {
      names += (j ? "," : "") + m.domain.names[j];
      if (m.domain.scales[j] == AxisScale::Log) names += "(log)";
    }
    std::printf("%-9s n=%-5ld K=%-4ld (%s) in %s\n          %s\n", m.name.c_str(), static_cast<long>(m.default_n),
                static_cast<long>(m.default_K), names.c_str(), domain_text(m.domain).c_str(), m.description.c_str());
  }
  return kExitOk;
}

int cmd_run(const std::string& path, const Overrides& o) {
  const ExperimentConfig cfg = load_with_overrides(path, o);
  const RunReport rep = run_experiment(cfg, {thread_count(o), false});
  write_run_artifacts(rep);
  std::cout << summarize(rep);
  std::cout << "artifacts       " << cfg.output_dir.string() << "\n";
  return rep.success() ? kExitOk : kExitNotConverged;
}

int cmd_compare(const std::string& fixed_path, const std::string& adaptive_path, const Overrides& o) {
  Overrides per_run = o;
  per_run.out.clear();
  ExperimentConfig fixed = load_with_overrides(fixed_path, per_run);
  ExperimentConfig adaptive = load_with_overrides(adaptive_path, per_run);
  const std::filesystem::path out = o.out.empty() ? std::filesystem::path("out/compare") : std::filesystem::path(o.out);
  fixed.output_dir = out / "fixed";
  adaptive.output_dir = out / "adaptive";
  const Comparison c = run_comparison(fixed, adaptive, {thread_count(o), true});
  write_run_artifacts(c.fixed);
  write_run_artifacts(c.adaptive);
  write_comparison_artifacts(c, out);
  std::cout << runtime_table_text(c);
  std::cout << "artifacts       " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-basis greedy experiments with adaptive training sets"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores); also RB_ADAPT_THREADS");
    sub->add_option("--max-iters", o.max_iters, "Override greedy.max_iterations")->check(CLI::PositiveNumber);
    sub->add_option("--seed-coarse", o.seed_coarse, "Override the coarse-set seed");
    sub->add_option("--seed-fine", o.seed_fine, "Override the fine-set seed");
    sub->add_option("--seed-test", o.seed_test, "Override the test-set seed");
    sub->add_flag("--no-wall-time", o.no_wall_time, "Write 0 for wall times so artifacts are reproducible");
  };

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", run_config, "Config file")->required();
  add_common(run);

  std::string fixed_config, adaptive_config;
  auto* compare = app.add_subcommand("compare", "Run a fixed and an adaptive config side by side");
  compare->add_option("fixed", fixed_config, "Config with a fixed training set")->required();
  compare->add_option("adaptive", adaptive_config, "Config with adaptive sampling")->required();
  add_common(compare);

  app.add_subcommand("models", "List the built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config, o);
    if (*compare) return cmd_compare(fixed_config, adaptive_config, o);
    return cmd_models();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
