#include <rbadapt/greedy.hpp>
#include <rbadapt/parallel.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace rbadapt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> key_of(const Parameter& mu) { return {mu.data(), mu.data() + mu.size()}; }

// Estimate assigned when the reduced model cannot be solved at a parameter.
constexpr double kFailedEstimate = 1e10;

Index argmax_lowest(const std::vector<double>& v) {
  Index best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<Index>(i);
  return best;
}

}  // namespace

TrainingSets::TrainingSets(ParameterList c, ParameterList f) {
  std::set<std::vector<double>> seen;
  for (auto& mu : c)
    if (seen.insert(key_of(mu)).second) coarse.push_back(std::move(mu));
  for (auto& mu : f)
    if (seen.insert(key_of(mu)).second) fine.push_back(std::move(mu));
}

void TrainingSets::check_invariants() const {
  std::set<std::vector<double>> c;
  for (const auto& mu : coarse)
    if (!c.insert(key_of(mu)).second) throw Error("coarse training set holds duplicate " + format_parameter(mu));
  for (const auto& mu : fine) {
    const auto k = key_of(mu);
    if (c.count(k)) throw Error("training sets intersect at " + format_parameter(mu));
    if (consumed.count(k)) throw Error("consumed point reappeared in the fine set: " + format_parameter(mu));
  }
}

int compute_n_add(double delta_max, double tol) {
  if (!(delta_max >= tol)) return 0;
  // Quotients such as 1e-2 / 1e-5 land just below the integer; snap within a few ulps.
  const double ratio = std::floor(delta_max / tol * (1.0 + 1e-12));
  return std::max(1, static_cast<int>(std::floor(std::log10(ratio))));
}

BasisCounts adaptive_basis_counts(double delta_max, double prev_delta_max, double tol, bool nonlinear,
                                  const DeltaScheme& scheme) {
  BasisCounts out;
  if (!(delta_max >= tol)) return out;
  const double ratio = delta_max / tol;
  const bool overshoot = prev_delta_max > 0.0 && delta_max > prev_delta_max && ratio < scheme.removal_window;
  if (overshoot && scheme.min_delta < 0) {
    out.rb = scheme.min_delta;
  } else {
    const int raw = static_cast<int>(std::ceil(std::log10(ratio)));
    out.rb = std::clamp(raw, 1, std::max(1, scheme.max_delta));
  }
  out.deim = nonlinear ? out.rb : 0;
  return out;
}

SetUpdate update_training_sets(TrainingSets& sets, std::vector<double>& estimates, const Vector& surrogate_on_fine,
                               double tol, Index n_add, bool remove) {
  if (estimates.size() != sets.coarse.size()) throw StructuralError("one estimate per coarse point required");
  if (surrogate_on_fine.size() != static_cast<Index>(sets.fine.size()))
    throw StructuralError("one surrogate value per fine point required");
  SetUpdate u;

  if (n_add > 0 && !sets.fine.empty()) {
    std::vector<std::size_t> order(sets.fine.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = surrogate_on_fine[static_cast<Index>(a)], sb = surrogate_on_fine[static_cast<Index>(b)];
      if (sa != sb) return sa > sb;
      return key_of(sets.fine[a]) < key_of(sets.fine[b]);
    });
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(n_add), order.size());
    u.fine_exhausted = order.size() < static_cast<std::size_t>(n_add);
    std::vector<bool> moved(sets.fine.size(), false);
    for (std::size_t i = 0; i < take; ++i) {
      const auto& mu = sets.fine[order[i]];
      sets.coarse.push_back(mu);
      estimates.push_back(std::numeric_limits<double>::quiet_NaN());
      sets.consumed.insert(key_of(mu));
      moved[order[i]] = true;
    }
    ParameterList rest;
    rest.reserve(sets.fine.size() - take);
    for (std::size_t i = 0; i < sets.fine.size(); ++i)
      if (!moved[i]) rest.push_back(std::move(sets.fine[i]));
    sets.fine = std::move(rest);
    u.added = static_cast<Index>(take);
  }

  if (remove) {
    ParameterList kept;
    std::vector<double> kept_est;
    Index worst = -1;
    double worst_value = -1.0;
    for (std::size_t i = 0; i < sets.coarse.size(); ++i) {
      const double e = estimates[i];
      if (!std::isnan(e) && e > worst_value) {
        worst_value = e;
        worst = static_cast<Index>(i);
      }
      if (!std::isnan(e) && e < tol) {
        ++u.removed;
        continue;
      }
      kept.push_back(sets.coarse[i]);
      kept_est.push_back(e);
    }
    if (kept.empty() && worst >= 0 && worst_value >= tol) {
      kept.push_back(sets.coarse[static_cast<std::size_t>(worst)]);
      kept_est.push_back(worst_value);
      --u.removed;
    }
    sets.coarse = std::move(kept);
    estimates = std::move(kept_est);
  }
  return u;
}

SurrogateFit fit_error_surrogate(const ParameterDomain& domain, const ParameterList& centers,
                                 const std::vector<double>& estimates, const GreedyConfig& config) {
  const Index d = domain.dimension();
  const Index l = static_cast<Index>(centers.size());
  if (l == 0) throw ConfigError("surrogate needs at least one center");
  Matrix C(d, l);
  for (Index i = 0; i < l; ++i) C.col(i) = domain.normalize(centers[static_cast<std::size_t>(i)]);

  const double top = *std::max_element(estimates.begin(), estimates.end());
  const double floor_value = std::max(top * 1e-16, std::numeric_limits<double>::min());
  Vector logv(l);
  for (Index i = 0; i < l; ++i) logv[i] = std::log10(std::max(estimates[static_cast<std::size_t>(i)], floor_value));

  rbf::PolynomialTail tail = config.tail;
  const Index tail_size = tail == rbf::PolynomialTail::None ? 0 : d + (tail == rbf::PolynomialTail::Affine ? 1 : 0);
  if (l < tail_size + 1) tail = rbf::PolynomialTail::None;

  SurrogateFit out;
  rbf::Kernel<double> kernel{config.kernel, 1.0};
  if (rbf::has_shape(config.kernel)) {
    const auto bounds = rbf::default_shape_bounds<double>(C, config.kernel);
    kernel.shape = config.shape > 0.0 ? config.shape : std::sqrt(bounds.first * bounds.second);
    if (config.loocv && l >= 3) {
      const auto t0 = Clock::now();
      try {
        kernel.shape = rbf::loocv_select_shape<double>(C, logv, config.kernel, bounds, tail).shape;
      } catch (const rbf::LoocvError& e) {
        if (e.best_shape() > 0.0) kernel.shape = e.best_shape();
      }
      out.loocv_seconds = seconds_since(t0);
    }
  }

  try {
    out.surrogate = rbf::fit<double>(C, logv, kernel, tail);
  } catch (const rbf::IllConditionedError&) {
    if (tail == rbf::PolynomialTail::None) throw;
    out.surrogate = rbf::fit<double>(C, logv, kernel, rbf::PolynomialTail::None);
  }
  out.surrogate.log_space = true;
  return out;
}

namespace {

struct Variant {
  bool adaptive_sampling = false;
  bool adaptive_counts = false;
  bool deim = false;
};

void validate(const GreedyConfig& config) {
  if (!(config.tol > 0.0)) throw ConfigError("tol must be positive");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (config.n_add_mode == NAddMode::Fixed && config.n_add_fixed < 0) throw ConfigError("n_add must be nonnegative");
  if (config.initial_rb < 1) throw ConfigError("initial RB increment must be at least 1");
  if (config.initial_deim < 1) throw ConfigError("initial DEIM order must be at least 1");
}

Vector evaluate_on_fine(const ParametricFOM& fom, const rbf::Surrogate<double>& s, const ParameterList& fine,
                        unsigned threads) {
  Vector out(static_cast<Index>(fine.size()));
  parallel_for(fine.size(), threads, [&](std::size_t i) {
    out[static_cast<Index>(i)] = rbf::evaluate<double>(s, fom.domain.normalize(fine[i]));
  });
  return out;
}

GreedyResult run_greedy(const ParametricFOM& fom, TrainingSets sets, const GreedyConfig& config, Variant variant,
                        const GreedyObserver& observer) {
  validate(config);
  fom.validate();
  if (sets.coarse.empty()) throw ConfigError("training set is empty");
  for (const auto& mu : sets.coarse)
    if (!fom.domain.contains(mu)) throw ConfigError("training parameter outside the domain: " + format_parameter(mu));

  const auto start = Clock::now();
  const bool use_deim = variant.deim && !fom.is_linear();
  const unsigned threads = resolve_threads(config.threads);

  GreedyResult res;
  res.basis = Basis(fom.n());
  DeimArtifacts deim;
  Index deim_target = config.initial_deim;
  int delta_rb = variant.adaptive_counts ? config.initial_rb : 1;
  int delta_deim = 0;
  bool last_removed = false;
  double prev_max = 0.0;
  auto cache = std::make_shared<SigmaMinCache>();
  Parameter mu_star = sets.coarse.front();

  for (int it = 1; it <= config.max_iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.mu_star = mu_star;

    auto t0 = Clock::now();
    const Trajectory traj = simulate(fom, mu_star);
    Matrix F;
    if (use_deim) F = nonlinearity_snapshots(fom, traj, mu_star);
    res.timings.fom += seconds_since(t0);

    t0 = Clock::now();
    if (delta_rb < 0 && -delta_rb >= res.basis.r()) delta_rb = 0;
    res.basis = pod_extend(res.basis, traj.states, delta_rb).basis;
    if (use_deim) {
      deim_target = std::max<Index>(1, deim_target + (it > 1 ? delta_deim : 0));
      const DeimUpdate up = deim_update(deim, F, deim_target);
      deim = up.artifacts;
      deim_target = up.achieved;
    }
    res.rom = galerkin_project(fom, res.basis, use_deim ? std::optional<DeimArtifacts>(deim) : std::nullopt);
    res.timings.basis += seconds_since(t0);

    t0 = Clock::now();
    const ErrorEstimator estimator(fom, res.rom, cache);
    auto estimate_range = [&](std::vector<double>& out, std::size_t first) {
      parallel_for(sets.coarse.size() - first, threads, [&](std::size_t j) {
        const std::size_t i = first + j;
        double v;
        try {
          v = estimator.estimate(sets.coarse[i]).value;
        } catch (const DivergenceError&) {
          v = kFailedEstimate;
        } catch (const SingularOperatorError&) {
          v = kFailedEstimate;
        }
        out[i] = std::isfinite(v) ? v : kFailedEstimate;
      });
    };
    std::vector<double> estimates(sets.coarse.size());
    estimate_range(estimates, 0);
    res.timings.estimator += seconds_since(t0);

    Index imax = argmax_lowest(estimates);
    double delta_max = estimates[static_cast<std::size_t>(imax)];
    rec.card_coarse = static_cast<Index>(sets.coarse.size());
    rec.r = res.basis.r();
    rec.l_deim = use_deim ? deim.order() : 0;

    bool converged = false;
    bool reseeded = false;
    if (delta_max <= config.tol) {
      converged = true;
      if (variant.adaptive_sampling && !sets.fine.empty()) {
        // Every coarse estimate meets the tolerance. Before accepting, sweep the fine set
        // with a surrogate built on all estimates of this ROM; the most suspicious fine
        // points are estimated (no FOM solve) until the surrogate is below tol or one of
        // them fails the tolerance.
        while (!sets.fine.empty()) {
          t0 = Clock::now();
          const SurrogateFit fit = fit_error_surrogate(fom.domain, sets.coarse, estimates, config);
          const Vector s = evaluate_on_fine(fom, fit.surrogate, sets.fine, threads);
          res.timings.surrogate += seconds_since(t0);
          res.timings.loocv += fit.loocv_seconds;
          const double s_max = s.maxCoeff();
          if (s_max <= config.tol) break;
          const Index n_add = config.n_add_mode == NAddMode::Fixed ? std::max(1, config.n_add_fixed)
                                                                   : compute_n_add(s_max, config.tol);
          const std::size_t first_new = sets.coarse.size();
          rec.n_add += update_training_sets(sets, estimates, s, config.tol, n_add, false).added;
          t0 = Clock::now();
          estimate_range(estimates, first_new);
          res.timings.estimator += seconds_since(t0);
          imax = argmax_lowest(estimates);
          delta_max = estimates[static_cast<std::size_t>(imax)];
          if (delta_max > config.tol) {
            converged = false;
            reseeded = true;
            break;
          }
        }
        rec.card_coarse = static_cast<Index>(sets.coarse.size());
      }
    }
    rec.delta_max = delta_max;

    if (!converged) {
      mu_star = sets.coarse[static_cast<std::size_t>(imax)];
      if (reseeded) {
        rec.n_del = update_training_sets(sets, estimates, Vector(0), config.tol, 0, config.remove_converged).removed;
      } else if (variant.adaptive_sampling) {
        Index n_add = 0;
        Vector s(0);
        if (!sets.fine.empty()) {
          n_add = config.n_add_mode == NAddMode::Fixed ? config.n_add_fixed : compute_n_add(delta_max, config.tol);
          t0 = Clock::now();
          const SurrogateFit fit = fit_error_surrogate(fom.domain, sets.coarse, estimates, config);
          s = evaluate_on_fine(fom, fit.surrogate, sets.fine, threads);
          res.timings.surrogate += seconds_since(t0);
          res.timings.loocv += fit.loocv_seconds;
        }
        const SetUpdate u = update_training_sets(sets, estimates, s, config.tol, sets.fine.empty() ? 0 : n_add,
                                                 config.remove_converged);
        rec.n_add = u.added;
        rec.n_del = u.removed;
      }

      if (variant.adaptive_counts) {
        BasisCounts bc = adaptive_basis_counts(delta_max, prev_max, config.tol, use_deim, config.delta);
        if (bc.rb < 0 && last_removed) bc = {1, use_deim ? 1 : 0};
        last_removed = bc.rb < 0;
        delta_rb = bc.rb;
        delta_deim = bc.deim;
      }
    }
    sets.check_invariants();
    prev_max = delta_max;

    rec.wall_seconds = seconds_since(start);
    res.trace.iterations.push_back(rec);
    if (observer) observer(rec, res.rom, sets);
    if (converged) {
      res.trace.converged = true;
      if (variant.adaptive_sampling && config.remove_converged) {
        // Every remaining coarse point satisfies the tolerance and is retired.
        sets.coarse.clear();
      }
      break;
    }
  }

  if (use_deim) res.deim = deim;
  res.sets = std::move(sets);
  res.trace.total_seconds = seconds_since(start);
  return res;
}

}  // namespace

GreedyResult standard_pod_greedy(const ParametricFOM& fom, const ParameterList& training, const GreedyConfig& config,
                                 const GreedyObserver& observer) {
  return run_greedy(fom, TrainingSets(training, {}), config, {false, false, false}, observer);
}

GreedyResult pod_greedy_adaptive(const ParametricFOM& fom, const ParameterList& coarse, const ParameterList& fine,
                                 const GreedyConfig& config, const GreedyObserver& observer) {
  return run_greedy(fom, TrainingSets(coarse, fine), config, {true, false, false}, observer);
}

GreedyResult adaptive_pod_greedy_deim(const ParametricFOM& fom, const ParameterList& training,
                                      const GreedyConfig& config, const GreedyObserver& observer) {
  return run_greedy(fom, TrainingSets(training, {}), config, {false, true, true}, observer);
}

GreedyResult fully_adaptive(const ParametricFOM& fom, const ParameterList& coarse, const ParameterList& fine,
                            const GreedyConfig& config, const GreedyObserver& observer) {
  return run_greedy(fom, TrainingSets(coarse, fine), config, {true, true, true}, observer);
}

}  // namespace rbadapt
