#include <rbadapt/benchmarks.hpp>
#include <rbadapt/config.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rbadapt {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Standard: return "standard";
    case Algorithm::AdaptiveSampling: return "adaptive-sampling";
    case Algorithm::AdaptiveDeim: return "adaptive-deim";
    case Algorithm::FullyAdaptive: return "fully-adaptive";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "standard") return Algorithm::Standard;
  if (name == "adaptive-sampling") return Algorithm::AdaptiveSampling;
  if (name == "adaptive-deim") return Algorithm::AdaptiveDeim;
  if (name == "fully-adaptive") return Algorithm::FullyAdaptive;
  throw ConfigError("unknown algorithm '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tail_name(rbf::PolynomialTail t) {
  switch (t) {
    case rbf::PolynomialTail::None: return "none";
    case rbf::PolynomialTail::Linear: return "linear";
    case rbf::PolynomialTail::Affine: return "affine";
  }
  return "?";
}

rbf::PolynomialTail tail_from_string(const std::string& s) {
  if (s == "none") return rbf::PolynomialTail::None;
  if (s == "linear") return rbf::PolynomialTail::Linear;
  if (s == "affine") return rbf::PolynomialTail::Affine;
  throw ConfigError("unknown polynomial tail '" + s + "' (none, linear, affine)");
}

class Reader {
 public:
  Reader(std::string origin, int line) : origin_(std::move(origin)), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line_) + ": " + msg);
  }

  double real(const std::string& v) const {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail("expected a number, got '" + v + "'");
  }

  long long integer(const std::string& v) const {
    try {
      std::size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail("expected an integer, got '" + v + "'");
  }

  std::uint64_t seed(const std::string& v) const {
    try {
      std::size_t pos = 0;
      if (!v.empty() && v[0] != '-') {
        const unsigned long long x = std::stoull(v, &pos, 0);
        if (pos == v.size()) return x;
      }
    } catch (const std::exception&) {
    }
    fail("expected an unsigned 64-bit seed, got '" + v + "'");
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail("expected true or false, got '" + v + "'");
  }

  std::vector<Index> counts(const std::string& v) const {
    std::vector<Index> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(static_cast<Index>(integer(trim(item))));
    if (out.empty()) fail("expected a comma-separated list of counts");
    return out;
  }

  template <typename F>
  auto wrap(F&& f) const {
    try {
      return f();
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind(origin_, 0) == 0) throw;
      fail(what);
    }
  }

 private:
  std::string origin_;
  int line_;
};

void set_sampling(SamplingSpec& spec, const std::string& key, const std::string& value, const Reader& rd) {
  if (key == "mode")
    spec.mode = rd.wrap([&] { return sampling_mode_from_string(value); });
  else if (key == "count")
    spec.count = static_cast<Index>(rd.integer(value));
  else if (key == "per_axis")
    spec.per_axis = rd.counts(value);
  else if (key == "seed")
    spec.seed = rd.seed(value);
  else
    rd.fail("unknown key '" + key + "'");
}

std::string sampling_canonical(const std::string& section, const SamplingSpec& s) {
  std::ostringstream os;
  os << section << ".mode=" << to_string(s.mode) << "\n";
  os << section << ".seed=" << s.seed << "\n";
  if (s.mode == SamplingMode::Random || s.mode == SamplingMode::PermutedLog) {
    os << section << ".count=" << s.count << "\n";
  } else {
    os << section << ".per_axis=";
    for (std::size_t i = 0; i < s.per_axis.size(); ++i) os << (i ? "," : "") << s.per_axis[i];
    os << "\n";
  }
  return os.str();
}

void validate_sampling(const std::string& section, const SamplingSpec& s) {
  if (s.mode == SamplingMode::Random || s.mode == SamplingMode::PermutedLog) {
    if (s.count < 0) throw ConfigError("[" + section + "] count must be nonnegative");
  } else {
    if (s.per_axis.empty()) throw ConfigError("[" + section + "] grid modes need per_axis");
    for (Index c : s.per_axis)
      if (c < 1) throw ConfigError("[" + section + "] per_axis counts must be positive");
  }
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "model.name=" << model << "\n";
  os << "model.n=" << n << "\n";
  os << "model.K=" << K << "\n";
  os << "model.final_time=" << fmt(final_time) << "\n";
  os << "model.path=" << model_path.generic_string() << "\n";
  os << "greedy.algorithm=" << to_string(algorithm) << "\n";
  os << "greedy.tol=" << fmt(greedy.tol) << "\n";
  os << "greedy.max_iterations=" << greedy.max_iterations << "\n";
  os << "greedy.n_add=" << (greedy.n_add_mode == NAddMode::Adaptive ? std::string("adaptive") : std::to_string(greedy.n_add_fixed))
     << "\n";
  os << "greedy.kernel=" << rbf::to_string(greedy.kernel) << "\n";
  os << "greedy.loocv=" << (greedy.loocv ? "true" : "false") << "\n";
  os << "greedy.shape=" << fmt(greedy.shape) << "\n";
  os << "greedy.tail=" << tail_name(greedy.tail) << "\n";
  os << "greedy.delta_min=" << greedy.delta.min_delta << "\n";
  os << "greedy.delta_max=" << greedy.delta.max_delta << "\n";
  os << "greedy.removal_window=" << fmt(greedy.delta.removal_window) << "\n";
  os << "greedy.initial_rb=" << greedy.initial_rb << "\n";
  os << "greedy.initial_deim=" << greedy.initial_deim << "\n";
  os << "greedy.remove_converged=" << (greedy.remove_converged ? "true" : "false") << "\n";
  os << sampling_canonical("coarse", coarse) << sampling_canonical("fine", fine) << sampling_canonical("test", test);
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void ExperimentConfig::validate() const {
  if (model != "burgers" && model != "convdiff" && model != "thermal")
    throw ConfigError("unknown model '" + model + "' (burgers, convdiff, thermal)");
  if (n < 0) throw ConfigError("[model] n must be nonnegative");
  if (K < 0) throw ConfigError("[model] K must be nonnegative");
  if (final_time < 0.0) throw ConfigError("[model] final_time must be nonnegative");
  if (!(greedy.tol > 0.0)) throw ConfigError("[greedy] tol must be positive");
  if (greedy.max_iterations < 1) throw ConfigError("[greedy] max_iterations must be at least 1");
  if (greedy.shape < 0.0) throw ConfigError("[greedy] shape must be nonnegative");
  if (greedy.initial_rb < 1 || greedy.initial_deim < 1) throw ConfigError("[greedy] initial counts must be positive");
  validate_sampling("coarse", coarse);
  validate_sampling("fine", fine);
  validate_sampling("test", test);
  if (coarse.mode == SamplingMode::Random && coarse.count < 1) throw ConfigError("[coarse] count must be positive");
  if (model == "thermal") {
    if (model_path.empty()) throw ConfigError("[model] path is required for the thermal model");
    const ThermalFiles files;
    for (const auto& f : {files.E, files.A0, files.A1, files.A2, files.A3, files.B, files.C})
      if (!std::filesystem::exists(model_path / f))
        throw ConfigError("thermal matrix file not found: " + (model_path / f).string());
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig cfg;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const Reader rd(origin, line);
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') rd.fail("malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "run" && section != "model" && section != "greedy" && section != "coarse" && section != "fine" &&
          section != "test" && section != "output")
        rd.fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) rd.fail("expected key = value");
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    if (section.empty()) rd.fail("key '" + key + "' outside of a section");

    if (section == "run") {
      if (key == "name")
        cfg.name = value;
      else
        rd.fail("unknown key '" + key + "'");
    } else if (section == "model") {
      if (key == "name")
        cfg.model = value;
      else if (key == "n")
        cfg.n = static_cast<Index>(rd.integer(value));
      else if (key == "K")
        cfg.K = static_cast<Index>(rd.integer(value));
      else if (key == "final_time")
        cfg.final_time = rd.real(value);
      else if (key == "path")
        cfg.model_path = value;
      else
        rd.fail("unknown key '" + key + "'");
    } else if (section == "greedy") {
      auto& g = cfg.greedy;
      if (key == "algorithm")
        cfg.algorithm = rd.wrap([&] { return algorithm_from_string(value); });
      else if (key == "tol")
        g.tol = rd.real(value);
      else if (key == "max_iterations")
        g.max_iterations = static_cast<int>(rd.integer(value));
      else if (key == "n_add") {
        if (value == "adaptive") {
          g.n_add_mode = NAddMode::Adaptive;
        } else {
          g.n_add_mode = NAddMode::Fixed;
          g.n_add_fixed = static_cast<int>(rd.integer(value));
        }
      } else if (key == "kernel")
        g.kernel = rd.wrap([&] { return rbf::kernel_from_string(value); });
      else if (key == "loocv")
        g.loocv = rd.boolean(value);
      else if (key == "shape")
        g.shape = rd.real(value);
      else if (key == "tail")
        g.tail = rd.wrap([&] { return tail_from_string(value); });
      else if (key == "delta_min")
        g.delta.min_delta = static_cast<int>(rd.integer(value));
      else if (key == "delta_max")
        g.delta.max_delta = static_cast<int>(rd.integer(value));
      else if (key == "removal_window")
        g.delta.removal_window = rd.real(value);
      else if (key == "initial_rb")
        g.initial_rb = static_cast<int>(rd.integer(value));
      else if (key == "initial_deim")
        g.initial_deim = static_cast<int>(rd.integer(value));
      else if (key == "remove_converged")
        g.remove_converged = rd.boolean(value);
      else if (key == "threads")
        g.threads = static_cast<unsigned>(rd.integer(value));
      else
        rd.fail("unknown key '" + key + "'");
    } else if (section == "coarse") {
      set_sampling(cfg.coarse, key, value, rd);
    } else if (section == "fine") {
      set_sampling(cfg.fine, key, value, rd);
    } else if (section == "test") {
      set_sampling(cfg.test, key, value, rd);
    } else if (section == "output") {
      if (key == "directory")
        cfg.output_dir = value;
      else if (key == "wall_time")
        cfg.record_wall_time = rd.boolean(value);
      else
        rd.fail("unknown key '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ExperimentConfig cfg = parse_config(in, path.string());
  cfg.source = path;
  const auto base = path.parent_path();
  if (!cfg.model_path.empty() && cfg.model_path.is_relative()) cfg.model_path = base / cfg.model_path;
  return cfg;
}

}  // namespace rbadapt
