#pragma once

#include <rbadapt/rom.hpp>

#include <functional>
#include <map>
#include <memory>
#include <shared_mutex>

namespace rbadapt {

struct ErrorEstimate {
  double value = 0.0;     // mean over steps of per_step
  Vector per_step;        // Delta^{k+1}(mu), k = 0..K-1
  double sigma_min_used = 0.0;
};

struct SigmaMinOptions {
  int max_iterations = 500;
  double tolerance = 1e-12;  // relative error bound on the largest eigenvalue of (M^T M)^{-1}
};

// Smallest singular value of a square sparse matrix from the Krylov space of inverse
// iteration on M^T M (Lanczos, full reorthogonalization), started from the normalized
// all-ones vector.
double sigma_min(const SparseMatrix& M, const SigmaMinOptions& options = {});

// Thread-safe per-parameter memo of sigma_min(E(mu)).
class SigmaMinCache {
 public:
  double get(const ParametricFOM& fom, const Parameter& mu);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::vector<double>, double> values_;
};

struct DualQuantities {
  Vector solution_norms;  // ||z^k||, k = 1..K
  Vector residual_norms;  // ||r_du^k||, k = 1..K
  double solution_norm = 0.0;  // max over steps
  double residual_norm = 0.0;  // max over steps
};

// Combines dual quantities and the inf-sup factor into the multiplier of ||r_pr||.
using PsiStrategy = std::function<double(const DualQuantities&, double sigma_min)>;

// (||z||_max + ||r_du||_max / sigma) / sigma
double default_psi(const DualQuantities& dual, double sigma);

// Offline/online split of the output error indicator for one reduced model.
// Construction precomputes QR factors of the residual blocks (cost grows with n);
// estimate() afterwards works in reduced dimensions except for the cached
// sigma_min and, for nonlinear models without DEIM, the lifted nonlinearity.
class ErrorEstimator {
 public:
  ErrorEstimator(const ParametricFOM& fom, const ReducedModel& rom, std::shared_ptr<SigmaMinCache> cache = nullptr,
                 PsiStrategy psi = default_psi);

  ErrorEstimate estimate(const Parameter& mu) const;

  // Per-step ||r_pr^{k+1}|| for a reduced trajectory.
  Vector residual_norms(const Parameter& mu, const Trajectory& reduced) const;
  DualQuantities dual(const Parameter& mu) const;

  const ReducedModel& rom() const { return *rom_; }

  // Number of estimate() calls made by this process.
  static std::uint64_t call_count();

 private:
  struct Block {
    std::vector<CoefficientFunction> coefficients;
    std::vector<Matrix> factors;  // R-factor column slices, one per affine term
    Matrix assemble(const Parameter& mu) const;
  };

  const ParametricFOM* fom_;
  std::shared_ptr<const ReducedModel> rom_;
  std::shared_ptr<SigmaMinCache> cache_;
  PsiStrategy psi_;

  bool direct_residual_ = false;  // nonlinear model without DEIM
  Block res_A_, res_B_, res_E_;
  Matrix res_F_;  // DEIM block
  Block dual_E_, dual_A_, dual_C_;
};

// Builds a one-off ErrorEstimator. Prefer reusing an ErrorEstimator for sweeps.
ErrorEstimate estimate_error(const ParametricFOM& fom, const ReducedModel& rom, const Parameter& mu);

Vector primal_residual(const ParametricFOM& fom, const ReducedModel& rom, const Parameter& mu,
                       const Trajectory& reduced);

DualQuantities dual_quantities(const ParametricFOM& fom, const Basis& basis, const Parameter& mu);

// (1/K) sum_{k=1}^{K} ||y^k - y_r^k||
double output_error(const Matrix& full_outputs, const Matrix& reduced_outputs);

struct TrueErrors {
  Vector epsilon;
  double max = 0.0;
};

// Solves the FOM at each parameter. Validation only.
TrueErrors true_error_metrics(const ParametricFOM& fom, const ReducedModel& rom, const ParameterList& test,
                              unsigned threads = 1);

// Cached FOM outputs over a test set, for repeated error checks across iterations.
std::vector<Matrix> reference_outputs(const ParametricFOM& fom, const ParameterList& test, unsigned threads = 1);
TrueErrors true_errors_against(const ReducedModel& rom, const ParameterList& test, const std::vector<Matrix>& reference,
                               unsigned threads = 1);

}  // namespace rbadapt
