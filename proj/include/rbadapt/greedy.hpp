#pragma once

#include <rbadapt/estimator.hpp>
#include <rbadapt/rbf.hpp>

#include <functional>
#include <optional>
#include <set>

namespace rbadapt {

// Coarse set (where the estimator runs) and fine set (where the surrogate runs).
// Points moved from fine to coarse are recorded in `consumed` and never return.
struct TrainingSets {
  ParameterList coarse;
  ParameterList fine;
  std::set<std::vector<double>> consumed;

  TrainingSets() = default;
  // Drops duplicates within each list and fine points that also appear in coarse.
  TrainingSets(ParameterList coarse, ParameterList fine);

  // Throws Error when the sets intersect or coarse holds a duplicate.
  void check_invariants() const;
};

enum class NAddMode { Fixed, Adaptive };

// Substitute rule for choosing how many RB/DEIM vectors to add or drop per iteration:
// delta_RB = clamp(ceil(log10(Delta_max / tol)), min_delta, max_delta), where the
// negative branch is taken only when tol <= Delta_max < removal_window * tol and the
// error grew since the previous iteration.
struct DeltaScheme {
  int min_delta = -1;
  int max_delta = 3;
  double removal_window = 10.0;
};

struct GreedyConfig {
  double tol = 1e-5;
  int max_iterations = 50;

  NAddMode n_add_mode = NAddMode::Adaptive;
  int n_add_fixed = 1;

  rbf::KernelKind kernel = rbf::KernelKind::InverseMultiquadric;
  bool loocv = true;
  double shape = 0.0;  // used when loocv is off; 0 picks the middle of the default bounds
  rbf::PolynomialTail tail = rbf::PolynomialTail::Linear;

  DeltaScheme delta;
  int initial_rb = 1;
  int initial_deim = 1;
  // Remove coarse points whose estimate falls below tol (adaptive sampling only).
  bool remove_converged = true;

  unsigned threads = 1;
};

struct IterationRecord {
  int iteration = 0;
  Parameter mu_star;         // parameter whose FOM solution enriched the basis
  double delta_max = 0.0;    // max estimate over the coarse set after enrichment
  Index card_coarse = 0;     // |coarse| on which delta_max was computed
  Index r = 0;
  Index l_deim = 0;
  Index n_add = 0;
  Index n_del = 0;
  double wall_seconds = 0.0;  // since the start of the run
};

struct GreedyTrace {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double total_seconds = 0.0;
};

struct PhaseTimings {
  double fom = 0.0;
  double basis = 0.0;  // POD, DEIM and projection
  double estimator = 0.0;
  double surrogate = 0.0;  // fit and fine-set evaluation, LOOCV included
  double loocv = 0.0;
};

struct GreedyResult {
  Basis basis;
  std::optional<DeimArtifacts> deim;
  ReducedModel rom;
  GreedyTrace trace;
  PhaseTimings timings;
  TrainingSets sets;  // final state
};

// Called after every iteration with the current record, reduced model and the
// training sets as updated for the next iteration.
using GreedyObserver = std::function<void(const IterationRecord&, const ReducedModel&, const TrainingSets&)>;

// max(1, floor(log10(floor(Delta_max / tol)))) when Delta_max >= tol, otherwise 0.
int compute_n_add(double delta_max, double tol);

struct BasisCounts {
  int rb = 0;
  int deim = 0;
};

// prev_delta_max <= 0 means there is no previous iteration.
BasisCounts adaptive_basis_counts(double delta_max, double prev_delta_max, double tol, bool nonlinear,
                                  const DeltaScheme& scheme = {});

struct SetUpdate {
  Index added = 0;
  Index removed = 0;
  bool fine_exhausted = false;
};

// Moves the n_add fine points with the largest surrogate values into coarse (ties by
// lexicographic parameter order), then removes coarse points with estimate < tol.
// `estimates` is aligned with sets.coarse on entry and is updated to stay aligned
// with the surviving original points; appended points carry NaN. If removal would
// empty the coarse set while some estimate is >= tol, the worst point is kept.
SetUpdate update_training_sets(TrainingSets& sets, std::vector<double>& estimates, const Vector& surrogate_on_fine,
                               double tol, Index n_add, bool remove);

GreedyResult standard_pod_greedy(const ParametricFOM& fom, const ParameterList& training, const GreedyConfig& config,
                                 const GreedyObserver& observer = {});

GreedyResult pod_greedy_adaptive(const ParametricFOM& fom, const ParameterList& coarse, const ParameterList& fine,
                                 const GreedyConfig& config, const GreedyObserver& observer = {});

GreedyResult adaptive_pod_greedy_deim(const ParametricFOM& fom, const ParameterList& training,
                                      const GreedyConfig& config, const GreedyObserver& observer = {});

GreedyResult fully_adaptive(const ParametricFOM& fom, const ParameterList& coarse, const ParameterList& fine,
                            const GreedyConfig& config, const GreedyObserver& observer = {});

// Surrogate of log10(estimates) over normalized coordinates, with the kernel/shape
// policy of the greedy loop (LOOCV when enabled and possible, fallbacks otherwise).
struct SurrogateFit {
  rbf::Surrogate<double> surrogate;
  double loocv_seconds = 0.0;
};
SurrogateFit fit_error_surrogate(const ParameterDomain& domain, const ParameterList& centers,
                                 const std::vector<double>& estimates, const GreedyConfig& config);

}  // namespace rbadapt
