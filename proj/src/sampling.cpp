#include <rbadapt/sampling.hpp>

#include <cmath>

namespace rbadapt {

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound == 0) throw ConfigError("below(0) is undefined");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do x = next();
  while (x >= limit);
  return x % bound;
}

namespace {

Vector axis_points(double lo, double hi, Index count, bool log_axis) {
  Vector pts(count);
  if (count == 1) {
    pts[0] = log_axis ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    return pts;
  }
  for (Index i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    if (log_axis) {
      const double a = std::log10(lo), b = std::log10(hi);
      pts[i] = std::pow(10.0, a + t * (b - a));
    } else {
      pts[i] = lo + t * (hi - lo);
    }
  }
  // Pin the endpoints exactly; pow() need not reproduce them.
  pts[0] = lo;
  pts[count - 1] = hi;
  return pts;
}

ParameterList tensor_grid(const std::vector<Vector>& axes) {
  ParameterList out;
  Index total = 1;
  for (const auto& a : axes) total *= a.size();
  out.reserve(static_cast<std::size_t>(total));
  const Index d = static_cast<Index>(axes.size());
  std::vector<Index> idx(static_cast<std::size_t>(d), 0);
  for (Index k = 0; k < total; ++k) {
    Parameter mu(d);
    for (Index j = 0; j < d; ++j) mu[j] = axes[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
    out.push_back(mu);
    for (Index j = d - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < axes[static_cast<std::size_t>(j)].size()) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  return out;
}

Index axis_count(const SamplingSpec& spec, Index j) {
  if (spec.per_axis.size() == 1) return spec.per_axis.front();
  return spec.per_axis[static_cast<std::size_t>(j)];
}

}  // namespace

ParameterList generate_parameter_set(const ParameterDomain& domain, const SamplingSpec& spec) {
  domain.validate();
  const Index d = domain.dimension();
  auto is_log = [&](Index j) { return domain.scales[static_cast<std::size_t>(j)] == AxisScale::Log; };

  switch (spec.mode) {
    case SamplingMode::Random: {
      if (spec.count < 1) throw ConfigError("random sampling needs count >= 1");
      SplitMix64 rng(spec.seed);
      ParameterList out;
      out.reserve(static_cast<std::size_t>(spec.count));
      for (Index k = 0; k < spec.count; ++k) {
        Parameter unit(d);
        for (Index j = 0; j < d; ++j) unit[j] = rng.uniform();
        Parameter mu = domain.denormalize(unit);
        mu = mu.cwiseMax(domain.lower).cwiseMin(domain.upper);
        out.push_back(mu);
      }
      return out;
    }
    case SamplingMode::Equidistant:
    case SamplingMode::LogEquidistant: {
      if (spec.per_axis.size() != 1 && static_cast<Index>(spec.per_axis.size()) != d)
        throw ConfigError("grid sampling needs one count or one count per axis");
      std::vector<Vector> axes;
      for (Index j = 0; j < d; ++j) {
        const Index c = axis_count(spec, j);
        if (c < 1) throw ConfigError("grid counts must be >= 1");
        const bool log_axis = spec.mode == SamplingMode::LogEquidistant || is_log(j);
        if (log_axis && !(domain.lower[j] > 0.0))
          throw ConfigError("logarithmic spacing needs a strictly positive axis, axis " + std::to_string(j) +
                            " starts at " + std::to_string(domain.lower[j]));
        axes.push_back(axis_points(domain.lower[j], domain.upper[j], c, log_axis));
      }
      return tensor_grid(axes);
    }
    case SamplingMode::PermutedLog: {
      if (spec.count < 1) throw ConfigError("permuted-log sampling needs count >= 1");
      SplitMix64 rng(spec.seed);
      const Index N = spec.count;
      Matrix values(N, d);
      for (Index j = 0; j < d; ++j) {
        const double lo = domain.lower[j], hi = domain.upper[j];
        if (!(lo > 0.0)) throw ConfigError("permuted-log sampling needs strictly positive axes");
        const double a = std::log10(lo), b = std::log10(hi);
        for (Index i = 0; i < N; ++i) {
          const double t = static_cast<double>(i + 1) / static_cast<double>(N);
          values(i, j) = i + 1 == N ? hi : std::pow(10.0, a + t * (b - a));
        }
        SplitMix64 axis_rng = rng.split();
        for (Index i = N - 1; i > 0; --i) {
          const Index k = static_cast<Index>(axis_rng.below(static_cast<std::uint64_t>(i + 1)));
          std::swap(values(i, j), values(k, j));
        }
      }
      ParameterList out;
      for (Index i = 0; i < N; ++i) out.emplace_back(values.row(i).transpose());
      return out;
    }
  }
  throw ConfigError("unknown sampling mode");
}

std::string to_string(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::Random: return "random";
    case SamplingMode::Equidistant: return "equidistant";
    case SamplingMode::LogEquidistant: return "log_equidistant";
    case SamplingMode::PermutedLog: return "permuted_log";
  }
  return "?";
}

SamplingMode sampling_mode_from_string(const std::string& name) {
  if (name == "random") return SamplingMode::Random;
  if (name == "equidistant") return SamplingMode::Equidistant;
  if (name == "log_equidistant") return SamplingMode::LogEquidistant;
  if (name == "permuted_log") return SamplingMode::PermutedLog;
  throw ConfigError("unknown sampling mode '" + name + "'");
}

}  // namespace rbadapt
