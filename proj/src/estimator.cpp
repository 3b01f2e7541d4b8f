#include <rbadapt/estimator.hpp>
#include <rbadapt/parallel.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

namespace rbadapt {

namespace {

std::atomic<std::uint64_t> g_estimates{0};

// Upper-trapezoidal R of the thin QR of [blocks...], sliced back per block. For
// r = W a, ||r|| = ||R a|| without squaring, so small residuals keep their digits.
std::vector<Matrix> r_factor_slices(const std::vector<Matrix>& blocks) {
  Index n = 0, p = 0;
  for (const auto& b : blocks) {
    n = b.rows();
    p += b.cols();
  }
  Matrix W(n, p);
  Index col = 0;
  for (const auto& b : blocks) {
    W.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  const Index pr = std::min(n, p);
  Matrix R = Matrix::Zero(pr, p);
  if (p > 0 && n > 0) {
    Eigen::HouseholderQR<Matrix> qr(W);
    R = qr.matrixQR().topRows(pr).triangularView<Eigen::Upper>();
  }
  std::vector<Matrix> out;
  col = 0;
  for (const auto& b : blocks) {
    out.emplace_back(R.middleCols(col, b.cols()));
    col += b.cols();
  }
  return out;
}

using SparseLUType = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

}  // namespace

double sigma_min(const SparseMatrix& M, const SigmaMinOptions& options) {
  if (M.rows() != M.cols() || M.rows() == 0) throw StructuralError("sigma_min needs a nonempty square matrix");
  SparseLUType lu, lut;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw SingularOperatorError("singular operator in sigma_min");
  const SparseMatrix Mt = M.transpose();
  lut.compute(Mt);
  if (lut.info() != Eigen::Success) throw SingularOperatorError("singular operator in sigma_min");

  // Lanczos on B = (M^T M)^{-1} = M^{-1} M^{-T}; the largest Ritz value converges to
  // 1/sigma_min^2. Each step costs one solve with M and one with M^T, as in plain
  // inverse iteration, but clustered leading eigenvalues converge far faster.
  const Index n = M.rows();
  const int max_steps = static_cast<int>(std::min<Index>(options.max_iterations, n));
  Matrix Q(n, max_steps + 1);
  Q.col(0) = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  std::vector<double> alpha, beta;
  double theta = 0.0;
  double bound = std::numeric_limits<double>::infinity();
  for (int j = 0; j < max_steps; ++j) {
    Vector w = lu.solve(Vector(lut.solve(Q.col(j))));
    if (!w.allFinite()) throw SingularOperatorError("singular operator in sigma_min");
    alpha.push_back(Q.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    const double b = w.norm();

    const Index m = j + 1;
    Matrix T = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      T(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(T);
    theta = eig.eigenvalues()[m - 1];
    const double res = b * std::abs(eig.eigenvectors()(m - 1, m - 1));
    const double gap = m > 1 ? theta - eig.eigenvalues()[m - 2] : 0.0;
    bound = gap > 0.0 ? std::min(res, res * res / gap) : res;
    if (!(theta > 0.0)) throw SingularOperatorError("singular operator in sigma_min");
    if (bound <= options.tolerance * theta || b <= 1e-300 || m == n) return 1.0 / std::sqrt(theta);
    beta.push_back(b);
    Q.col(j + 1) = w / b;
  }
  throw Error("sigma_min: no convergence in " + std::to_string(max_steps) + " iterations (last estimate " +
              std::to_string(1.0 / std::sqrt(theta)) + ", eigenvalue error bound " + std::to_string(bound / theta) + ")");
}

double SigmaMinCache::get(const ParametricFOM& fom, const Parameter& mu) {
  std::vector<double> key(mu.data(), mu.data() + mu.size());
  {
    std::shared_lock lock(mutex_);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
  }
  const double value = sigma_min(fom.E.assemble(mu));
  std::unique_lock lock(mutex_);
  values_.emplace(std::move(key), value);
  return value;
}

std::size_t SigmaMinCache::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

double default_psi(const DualQuantities& dual, double sigma) {
  return (dual.solution_norm + dual.residual_norm / sigma) / sigma;
}

// ---------------------------------------------------------------------------

Matrix ErrorEstimator::Block::assemble(const Parameter& mu) const {
  Matrix out = Matrix::Zero(factors.front().rows(), factors.front().cols());
  for (std::size_t i = 0; i < factors.size(); ++i) out.noalias() += coefficients[i](mu) * factors[i];
  return out;
}

ErrorEstimator::ErrorEstimator(const ParametricFOM& fom, const ReducedModel& rom, std::shared_ptr<SigmaMinCache> cache,
                               PsiStrategy psi)
    : fom_(&fom),
      rom_(std::make_shared<const ReducedModel>(rom)),
      cache_(cache ? std::move(cache) : std::make_shared<SigmaMinCache>()),
      psi_(std::move(psi)) {
  const Matrix& V = rom.basis.V;
  if (V.rows() != fom.n()) throw StructuralError("estimator: basis does not match model dimension");
  direct_residual_ = !fom.is_linear() && !rom.uses_deim();

  if (!direct_residual_) {
    std::vector<Matrix> blocks;
    for (const auto& t : fom.A.terms()) blocks.emplace_back(t.matrix * V);
    for (const auto& t : fom.B.terms()) blocks.emplace_back(Matrix(t.matrix));
    for (const auto& t : fom.E.terms()) blocks.emplace_back(t.matrix * V);
    if (rom.uses_deim()) blocks.push_back(rom.deim->U);
    auto slices = r_factor_slices(blocks);
    std::size_t s = 0;
    for (const auto& t : fom.A.terms()) {
      res_A_.coefficients.push_back(t.coefficient);
      res_A_.factors.push_back(std::move(slices[s++]));
    }
    for (const auto& t : fom.B.terms()) {
      res_B_.coefficients.push_back(t.coefficient);
      res_B_.factors.push_back(std::move(slices[s++]));
    }
    for (const auto& t : fom.E.terms()) {
      res_E_.coefficients.push_back(t.coefficient);
      res_E_.factors.push_back(std::move(slices[s++]));
    }
    if (rom.uses_deim()) res_F_ = std::move(slices[s++]);
  }

  std::vector<Matrix> dual_blocks;
  for (const auto& t : fom.E.terms()) dual_blocks.emplace_back(SparseMatrix(t.matrix.transpose()) * V);
  for (const auto& t : fom.A.terms()) dual_blocks.emplace_back(SparseMatrix(t.matrix.transpose()) * V);
  for (const auto& t : fom.C.terms()) dual_blocks.emplace_back(Matrix(t.matrix.transpose()));
  auto dslices = r_factor_slices(dual_blocks);
  std::size_t s = 0;
  for (const auto& t : fom.E.terms()) {
    dual_E_.coefficients.push_back(t.coefficient);
    dual_E_.factors.push_back(std::move(dslices[s++]));
  }
  for (const auto& t : fom.A.terms()) {
    dual_A_.coefficients.push_back(t.coefficient);
    dual_A_.factors.push_back(std::move(dslices[s++]));
  }
  for (const auto& t : fom.C.terms()) {
    dual_C_.coefficients.push_back(t.coefficient);
    dual_C_.factors.push_back(std::move(dslices[s++]));
  }
}

Vector ErrorEstimator::residual_norms(const Parameter& mu, const Trajectory& reduced) const {
  const ReducedModel& rom = *rom_;
  const Index K = reduced.steps();
  Vector norms(K);

  if (direct_residual_) {
    const Matrix& V = rom.basis.V;
    const SparseMatrix E = fom_->E.assemble(mu);
    const SparseMatrix A = fom_->A.assemble(mu);
    const SparseMatrix B = fom_->B.assemble(mu);
    Vector prev = V * reduced.states.col(0);
    for (Index k = 0; k < K; ++k) {
      const Vector next = V * reduced.states.col(k + 1);
      Vector r = A * prev + B * rom.inputs.col(k) - E * next;
      r += fom_->f->evaluate(prev, mu);
      norms[k] = r.norm();
      prev = next;
    }
    return norms;
  }

  const Matrix MA = res_A_.assemble(mu);
  const Matrix MB = res_B_.assemble(mu);
  const Matrix ME = res_E_.assemble(mu);
  const bool deim = rom.uses_deim();
  Vector rho(MA.rows());
  for (Index k = 0; k < K; ++k) {
    rho.noalias() = MA * reduced.states.col(k);
    rho.noalias() += MB * rom.inputs.col(k);
    rho.noalias() -= ME * reduced.states.col(k + 1);
    if (deim) rho.noalias() += res_F_ * rom.deim_coordinates(reduced.states.col(k), mu);
    norms[k] = rho.norm();
  }
  return norms;
}

DualQuantities ErrorEstimator::dual(const Parameter& mu) const {
  const ReducedModel& rom = *rom_;
  const Index K = rom.steps();
  const Index r = rom.r();
  const Matrix Er = rom.E.assemble(mu);
  const Matrix Ar = rom.A.assemble(mu);
  const Matrix Cr = rom.C.assemble(mu);
  const Matrix DE = dual_E_.assemble(mu);
  const Matrix DA = dual_A_.assemble(mu);
  const Matrix DC = dual_C_.assemble(mu);

  DualQuantities out;
  out.solution_norms.resize(K);
  out.residual_norms.resize(K);
  if (r == 0) {
    out.solution_norms.setZero();
    out.residual_norms.setConstant(DC.norm());
    out.residual_norm = DC.norm();
    return out;
  }

  Eigen::PartialPivLU<Matrix> lu(Er.transpose());
  // Backward recurrence: E_r^T z^K = C_r^T, E_r^T z^k = A_r^T z^{k+1}.
  Matrix z = lu.solve(Cr.transpose());
  out.solution_norms[K - 1] = z.norm();
  out.residual_norms[K - 1] = (DC - DE * z).norm();
  for (Index k = K - 1; k >= 1; --k) {
    Matrix znext = z;
    z = lu.solve(Ar.transpose() * znext);
    out.solution_norms[k - 1] = z.norm();
    out.residual_norms[k - 1] = (DA * znext - DE * z).norm();
  }
  out.solution_norm = out.solution_norms.maxCoeff();
  out.residual_norm = out.residual_norms.maxCoeff();
  return out;
}

ErrorEstimate ErrorEstimator::estimate(const Parameter& mu) const {
  g_estimates.fetch_add(1, std::memory_order_relaxed);
  const Trajectory reduced = simulate_rom(*rom_, mu);
  const Vector res = residual_norms(mu, reduced);
  const DualQuantities d = dual(mu);
  const double sigma = cache_->get(*fom_, mu);
  const double psi = psi_(d, sigma);

  ErrorEstimate est;
  est.per_step = psi * res;
  est.value = est.per_step.size() > 0 ? est.per_step.mean() : 0.0;
  est.sigma_min_used = sigma;
  return est;
}

std::uint64_t ErrorEstimator::call_count() { return g_estimates.load(std::memory_order_relaxed); }

// ---------------------------------------------------------------------------

ErrorEstimate estimate_error(const ParametricFOM& fom, const ReducedModel& rom, const Parameter& mu) {
  return ErrorEstimator(fom, rom).estimate(mu);
}

Vector primal_residual(const ParametricFOM& fom, const ReducedModel& rom, const Parameter& mu,
                       const Trajectory& reduced) {
  return ErrorEstimator(fom, rom).residual_norms(mu, reduced);
}

DualQuantities dual_quantities(const ParametricFOM& fom, const Basis& basis, const Parameter& mu) {
  return ErrorEstimator(fom, galerkin_project(fom, basis)).dual(mu);
}

double output_error(const Matrix& full_outputs, const Matrix& reduced_outputs) {
  if (full_outputs.rows() != reduced_outputs.rows() || full_outputs.cols() != reduced_outputs.cols())
    throw StructuralError("output trajectories differ in shape");
  const Index K = full_outputs.cols() - 1;
  if (K < 1) return 0.0;
  double sum = 0.0;
  for (Index k = 1; k <= K; ++k) sum += (full_outputs.col(k) - reduced_outputs.col(k)).norm();
  return sum / static_cast<double>(K);
}

std::vector<Matrix> reference_outputs(const ParametricFOM& fom, const ParameterList& test, unsigned threads) {
  std::vector<Matrix> out(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) { out[i] = simulate(fom, test[i]).outputs; });
  return out;
}

TrueErrors true_errors_against(const ReducedModel& rom, const ParameterList& test, const std::vector<Matrix>& reference,
                               unsigned threads) {
  TrueErrors out;
  out.epsilon.resize(static_cast<Index>(test.size()));
  parallel_for(test.size(), threads, [&](std::size_t i) {
    out.epsilon[static_cast<Index>(i)] = output_error(reference[i], simulate_rom(rom, test[i]).outputs);
  });
  out.max = out.epsilon.size() > 0 ? out.epsilon.maxCoeff() : 0.0;
  return out;
}

TrueErrors true_error_metrics(const ParametricFOM& fom, const ReducedModel& rom, const ParameterList& test,
                              unsigned threads) {
  return true_errors_against(rom, test, reference_outputs(fom, test, threads), threads);
}

}  // namespace rbadapt
