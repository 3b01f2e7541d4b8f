#include <rbadapt/benchmarks.hpp>
#include <rbadapt/experiment.hpp>

#include <chrono>
#include <cstdio>
#include <sstream>

namespace rbadapt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool uses_fine_set(Algorithm a) { return a == Algorithm::AdaptiveSampling || a == Algorithm::FullyAdaptive; }

std::string seconds_text(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", s);
  return buf;
}

std::string training_label(const RunReport& r) {
  const auto& t = r.result.trace.iterations;
  const Index nc = t.empty() ? 0 : t.front().card_coarse;
  if (!uses_fine_set(r.config.algorithm)) return std::to_string(nc);
  return std::to_string(nc) + "+" + std::to_string(r.result.sets.fine.size() + r.result.sets.consumed.size());
}

}  // namespace

ParametricFOM build_model(const ExperimentConfig& config) {
  const Index K = config.K;
  if (config.model == "burgers") return build_burgers(config.n > 0 ? config.n : 500, K > 0 ? K : 1000);
  if (config.model == "convdiff") return build_convdiff(config.n > 0 ? config.n : 800, K > 0 ? K : 100);
  if (config.model == "thermal")
    return load_thermal(config.model_path, {}, K > 0 ? K : 100, config.final_time > 0.0 ? config.final_time : 100.0);
  throw ConfigError("unknown model '" + config.model + "'");
}

CsvMetadata run_metadata(const ExperimentConfig& config) {
  return {{"config_hash", config.hash_hex()},
          {"name", config.name},
          {"model", config.model},
          {"algorithm", to_string(config.algorithm)},
          {"seed_coarse", std::to_string(config.coarse.seed)},
          {"seed_fine", std::to_string(config.fine.seed)},
          {"seed_test", std::to_string(config.test.seed)}};
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  RunReport rep;
  rep.config = config;
  const ParametricFOM fom = build_model(config);

  const ParameterList coarse = generate_parameter_set(fom.domain, config.coarse);
  const ParameterList fine =
      uses_fine_set(config.algorithm) ? generate_parameter_set(fom.domain, config.fine) : ParameterList{};
  rep.test = generate_parameter_set(fom.domain, config.test);

  GreedyConfig gc = config.greedy;
  gc.threads = options.threads;

  std::vector<Matrix> reference;
  double observer_seconds = 0.0;
  GreedyObserver observer;
  if (options.track_error_curve) {
    const auto t0 = Clock::now();
    reference = reference_outputs(fom, rep.test, options.threads);
    rep.validation_seconds += seconds_since(t0);
    observer = [&](const IterationRecord&, const ReducedModel& rom, const TrainingSets&) {
      const auto t1 = Clock::now();
      rep.error_curve.push_back(true_errors_against(rom, rep.test, reference, options.threads).max);
      observer_seconds += seconds_since(t1);
    };
  }

  switch (config.algorithm) {
    case Algorithm::Standard: rep.result = standard_pod_greedy(fom, coarse, gc, observer); break;
    case Algorithm::AdaptiveSampling: rep.result = pod_greedy_adaptive(fom, coarse, fine, gc, observer); break;
    case Algorithm::AdaptiveDeim: rep.result = adaptive_pod_greedy_deim(fom, coarse, gc, observer); break;
    case Algorithm::FullyAdaptive: rep.result = fully_adaptive(fom, coarse, fine, gc, observer); break;
  }
  rep.offline_seconds = rep.result.trace.total_seconds - observer_seconds;

  const auto t0 = Clock::now();
  if (reference.empty()) reference = reference_outputs(fom, rep.test, options.threads);
  rep.errors = true_errors_against(rep.result.rom, rep.test, reference, options.threads);
  rep.validation_seconds += seconds_since(t0);
  return rep;
}

std::string summarize(const RunReport& r) {
  const auto& tr = r.result.trace;
  const auto& ph = r.result.timings;
  std::ostringstream os;
  os << "name            " << r.config.name << "\n";
  os << "model           " << r.config.model << "\n";
  os << "algorithm       " << to_string(r.config.algorithm) << "\n";
  os << "config_hash     " << r.config.hash_hex() << "\n";
  os << "seeds           coarse=" << r.config.coarse.seed << " fine=" << r.config.fine.seed
     << " test=" << r.config.test.seed << "\n";
  os << "converged       " << (tr.converged ? "yes" : "no") << "\n";
  os << "iterations      " << tr.iterations.size() << "\n";
  os << "r               " << r.result.basis.r() << "\n";
  os << "l_deim          " << (r.result.deim ? r.result.deim->order() : 0) << "\n";
  os << "tol             " << format_real(r.config.greedy.tol) << "\n";
  os << "eps_max         " << format_real(r.errors.max) << "\n";
  os << "test_points     " << r.test.size() << "\n";
  if (r.config.record_wall_time) {
    os << "offline_s       " << seconds_text(r.offline_seconds) << "\n";
    os << "  fom_s         " << seconds_text(ph.fom) << "\n";
    os << "  basis_s       " << seconds_text(ph.basis) << "\n";
    os << "  estimator_s   " << seconds_text(ph.estimator) << "\n";
    os << "  surrogate_s   " << seconds_text(ph.surrogate) << "\n";
    os << "    loocv_s     " << seconds_text(ph.loocv) << "\n";
    os << "validation_s    " << seconds_text(r.validation_seconds) << "\n";
  }
  os << "status          " << (r.success() ? "ok" : (tr.converged ? "tolerance missed on test set" : "not converged"))
     << "\n";
  return os.str();
}

void write_run_artifacts(const RunReport& r) {
  const auto meta = run_metadata(r.config);
  const auto& dir = r.config.output_dir;
  write_trace_csv(r.result.trace, r.dimension(), dir / "trace.csv", meta, r.config.record_wall_time);
  write_error_csv(r.test, r.errors.epsilon, dir / "errors.csv", meta);
  write_file_atomic(dir / "summary.txt", summarize(r));
}

Comparison run_comparison(const ExperimentConfig& fixed, const ExperimentConfig& adaptive, const RunOptions& options) {
  if (fixed.model != adaptive.model || fixed.n != adaptive.n || fixed.K != adaptive.K ||
      fixed.model_path != adaptive.model_path)
    throw ConfigError("compare: both configs must target the same model");
  auto test_block = [](const ExperimentConfig& c) {
    const std::string s = c.canonical();
    return s.substr(s.find("test."));
  };
  if (test_block(fixed) != test_block(adaptive)) throw ConfigError("compare: both configs must use the same test set");
  RunOptions opts = options;
  opts.track_error_curve = true;
  Comparison c;
  c.fixed = run_experiment(fixed, opts);
  c.adaptive = run_experiment(adaptive, opts);
  return c;
}

std::string comparison_curves_csv(const Comparison& c, const CsvMetadata& meta) {
  std::ostringstream os;
  if (!meta.empty()) {
    os << "#";
    for (const auto& [k, v] : meta) os << " " << k << "=" << v;
    os << "\n";
  }
  os << "iteration,eps_max_fixed,eps_max_adaptive,delta_max_fixed,delta_max_adaptive\n";
  const auto& tf = c.fixed.result.trace.iterations;
  const auto& ta = c.adaptive.result.trace.iterations;
  const std::size_t n = std::max(tf.size(), ta.size());
  auto cell = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? format_real(v[i]) : std::string(); };
  for (std::size_t i = 0; i < n; ++i) {
    os << i + 1 << "," << cell(c.fixed.error_curve, i) << "," << cell(c.adaptive.error_curve, i) << ","
       << (i < tf.size() ? format_real(tf[i].delta_max) : "") << "," << (i < ta.size() ? format_real(ta[i].delta_max) : "")
       << "\n";
  }
  return os.str();
}

std::string runtime_table_csv(const Comparison& c, const CsvMetadata& meta, bool record_wall_time) {
  std::ostringstream os;
  if (!meta.empty()) {
    os << "#";
    for (const auto& [k, v] : meta) os << " " << k << "=" << v;
    os << "\n";
  }
  os << "label,algorithm,training_points,iterations,r,l_deim,offline_seconds,eps_max\n";
  for (const RunReport* r : {&c.fixed, &c.adaptive}) {
    os << r->config.name << "," << to_string(r->config.algorithm) << "," << training_label(*r) << ","
       << r->result.trace.iterations.size() << "," << r->result.basis.r() << ","
       << (r->result.deim ? r->result.deim->order() : 0) << ","
       << seconds_text(record_wall_time ? r->offline_seconds : 0.0) << "," << format_real(r->errors.max) << "\n";
  }
  return os.str();
}

std::string runtime_table_text(const Comparison& c) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-18s %12s %6s %5s %12s %14s\n", "run", "algorithm", "training", "iters", "r",
                "offline [s]", "eps_max");
  os << line;
  for (const RunReport* r : {&c.fixed, &c.adaptive}) {
    std::snprintf(line, sizeof line, "%-22s %-18s %12s %6zu %5ld %12.3f %14.6e\n", r->config.name.c_str(),
                  to_string(r->config.algorithm).c_str(), training_label(*r).c_str(),
                  r->result.trace.iterations.size(), static_cast<long>(r->result.basis.r()), r->offline_seconds,
                  r->errors.max);
    os << line;
  }
  return os.str();
}

void write_comparison_artifacts(const Comparison& c, const std::filesystem::path& directory) {
  CsvMetadata meta = {{"fixed_hash", c.fixed.config.hash_hex()},
                      {"adaptive_hash", c.adaptive.config.hash_hex()},
                      {"seed_test", std::to_string(c.fixed.config.test.seed)}};
  const bool wall = c.fixed.config.record_wall_time && c.adaptive.config.record_wall_time;
  write_file_atomic(directory / "curves.csv", comparison_curves_csv(c, meta));
  write_file_atomic(directory / "runtime.csv", runtime_table_csv(c, meta, wall));
  write_file_atomic(directory / "runtime.txt", runtime_table_text(c));
}

}  // namespace rbadapt
