#include <rbadapt/rom.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rbadapt {

namespace {

constexpr double kRankTol = 1e-14;

double largest_singular_value(const Matrix& X) {
  if (X.size() == 0) return 0.0;
  const Matrix G = X.cols() <= X.rows() ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

// Orthonormalizes the columns of W against V (two block Gram-Schmidt passes) and
// among themselves; returns only numerically independent directions.
Matrix orthonormal_complement(const Matrix& V, Matrix W) {
  for (int pass = 0; pass < 2; ++pass)
    if (V.cols() > 0) W.noalias() -= V * (V.transpose() * W);
  if (W.cols() == 0) return W;
  Eigen::ColPivHouseholderQR<Matrix> qr(W);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  Matrix Q = qr.householderQ() * Matrix::Identity(W.rows(), rank);
  if (V.cols() > 0) Q.noalias() -= V * (V.transpose() * Q);
  for (Index j = 0; j < Q.cols(); ++j) {
    for (Index i = 0; i < j; ++i) Q.col(j) -= Q.col(i).dot(Q.col(j)) * Q.col(i);
    Q.col(j).normalize();
  }
  return Q;
}

}  // namespace

double Basis::orthonormality_defect() const {
  if (V.cols() == 0) return 0.0;
  return (V.transpose() * V - Matrix::Identity(r(), r())).cwiseAbs().maxCoeff();
}

PodExtension pod_extend(const Basis& basis, const Matrix& X, Index delta) {
  PodExtension out;
  out.basis = basis;
  out.requested = delta < 0 ? -delta : delta;
  if (delta == 0) return out;

  if (delta < 0) {
    if (-delta >= basis.r())
      throw ConfigError("cannot remove " + std::to_string(-delta) + " vectors from a basis of dimension " +
                        std::to_string(basis.r()));
    out.basis.V.conservativeResize(Eigen::NoChange, basis.r() + delta);
    out.changed = -delta;
    return out;
  }

  if (basis.r() > 0 && X.rows() != basis.n())
    throw StructuralError("snapshot matrix has " + std::to_string(X.rows()) + " rows, basis has " +
                          std::to_string(basis.n()));
  const Matrix& V = basis.V;

  Matrix Xbar = X;
  for (int pass = 0; pass < 2; ++pass)
    if (V.cols() > 0) Xbar.noalias() -= V * (V.transpose() * Xbar);

  const double sigma_ref = largest_singular_value(X);
  if (!(sigma_ref > 0.0) || Xbar.cols() == 0) {
    if (out.basis.V.rows() == 0) out.basis.V.resize(X.rows(), 0);
    return out;
  }

  Eigen::BDCSVD<Matrix> svd(Xbar, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Index significant = 0;
  while (significant < s.size() && s[significant] > kRankTol * sigma_ref) ++significant;
  const Index take = std::min({delta, significant, X.rows() - V.cols()});

  Matrix fresh = orthonormal_complement(V, svd.matrixU().leftCols(take));
  Matrix Vnew(X.rows(), V.cols() + fresh.cols());
  if (V.cols() > 0) Vnew.leftCols(V.cols()) = V;
  Vnew.rightCols(fresh.cols()) = fresh;
  out.basis.V = std::move(Vnew);
  out.changed = fresh.cols();
  return out;
}

std::vector<Index> deim_select(const Matrix& U) {
  const Index l = U.cols();
  std::vector<Index> idx;
  if (l == 0) return idx;
  idx.reserve(static_cast<std::size_t>(l));

  auto argmax_abs = [](const Vector& v) {
    Index best = 0;
    double bv = std::abs(v[0]);
    for (Index i = 1; i < v.size(); ++i)
      if (std::abs(v[i]) > bv) {
        bv = std::abs(v[i]);
        best = i;
      }
    return best;
  };

  idx.push_back(argmax_abs(U.col(0)));
  for (Index j = 1; j < l; ++j) {
    Matrix PU(j, j);
    Vector rhs(j);
    for (Index a = 0; a < j; ++a) {
      PU.row(a) = U.row(idx[static_cast<std::size_t>(a)]).head(j);
      rhs[a] = U(idx[static_cast<std::size_t>(a)], j);
    }
    Eigen::FullPivLU<Matrix> lu(PU);
    if (lu.rank() < j) throw SingularOperatorError("DEIM interpolation matrix became singular at step " + std::to_string(j));
    const Vector c = lu.solve(rhs);
    const Vector res = U.col(j) - U.leftCols(j) * c;
    const Index p = argmax_abs(res);
    if (std::abs(res[p]) == 0.0)
      throw SingularOperatorError("DEIM residual vanished at step " + std::to_string(j));
    idx.push_back(p);
  }
  return idx;
}

DeimUpdate deim_update(const DeimArtifacts& artifacts, const Matrix& F_new, Index target) {
  if (target < 1) throw ConfigError("DEIM order must be positive");
  const Index n = F_new.rows() > 0 ? F_new.rows() : artifacts.snapshots.rows();
  if (artifacts.snapshots.cols() > 0 && artifacts.snapshots.rows() != F_new.rows())
    throw StructuralError("nonlinearity snapshots have inconsistent row counts");

  Matrix F(n, artifacts.snapshots.cols() + F_new.cols());
  if (artifacts.snapshots.cols() > 0) F.leftCols(artifacts.snapshots.cols()) = artifacts.snapshots;
  if (F_new.cols() > 0) F.rightCols(F_new.cols()) = F_new;

  DeimUpdate out;
  out.requested = target;
  if (F.cols() == 0) {
    out.artifacts.snapshots = F;
    out.artifacts.U.resize(n, 0);
    return out;
  }

  Eigen::BDCSVD<Matrix> svd(F, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Index rank = 0;
  while (rank < s.size() && s[rank] > kRankTol * s[0]) ++rank;
  const Index l = std::min(target, rank);

  out.achieved = l;
  out.artifacts.U = svd.matrixU().leftCols(l);
  out.artifacts.indices = deim_select(out.artifacts.U);
  // [U_k S_k] has the same left singular pairs as F, so it replaces the raw history.
  const Index keep = std::min(rank, kMaxStoredSnapshots);
  out.artifacts.snapshots = svd.matrixU().leftCols(keep) * s.head(keep).asDiagonal();
  return out;
}

Vector deim_reconstruct(const DeimArtifacts& artifacts, const Vector& f) {
  const Index l = artifacts.order();
  Matrix PU(l, l);
  Vector fp(l);
  for (Index a = 0; a < l; ++a) {
    PU.row(a) = artifacts.U.row(artifacts.indices[static_cast<std::size_t>(a)]);
    fp[a] = f[artifacts.indices[static_cast<std::size_t>(a)]];
  }
  return artifacts.U * PU.fullPivLu().solve(fp);
}

// ---------------------------------------------------------------------------

Vector ReducedOperator::theta(const Parameter& mu) const {
  Vector t(size());
  for (Index i = 0; i < size(); ++i) t[i] = coefficients[static_cast<std::size_t>(i)](mu);
  return t;
}

Matrix ReducedOperator::assemble(const Parameter& mu) const {
  Matrix out = Matrix::Zero(rows(), cols());
  for (std::size_t i = 0; i < terms.size(); ++i) out.noalias() += coefficients[i](mu) * terms[i];
  return out;
}

namespace {

ReducedOperator project_operator(const AffineOperator& op, const Matrix* left, const Matrix* right) {
  ReducedOperator red;
  for (const auto& t : op.terms()) {
    red.coefficients.push_back(t.coefficient);
    Matrix M;
    if (left && right)
      M = left->transpose() * (t.matrix * *right);
    else if (left)
      M = left->transpose() * t.matrix;
    else if (right)
      M = t.matrix * *right;
    else
      M = Matrix(t.matrix);
    red.terms.push_back(std::move(M));
  }
  return red;
}

}  // namespace

Vector ReducedModel::reduced_nonlinearity(const Vector& xr, const Parameter& mu) const {
  if (is_linear()) return Vector::Zero(r());
  if (uses_deim()) return deim_projector * sampled->evaluate(support_rows * xr, mu);
  return basis.V.transpose() * full_nonlinearity->evaluate(basis.V * xr, mu);
}

Vector ReducedModel::deim_coordinates(const Vector& xr, const Parameter& mu) const {
  return deim_coefficients * sampled->evaluate(support_rows * xr, mu);
}

ReducedModel galerkin_project(const ParametricFOM& fom, const Basis& basis, const std::optional<DeimArtifacts>& deim) {
  if (basis.n() != fom.n())
    throw StructuralError("basis has " + std::to_string(basis.n()) + " rows, model has n = " + std::to_string(fom.n()));
  const Matrix& V = basis.V;

  ReducedModel rom;
  rom.E = project_operator(fom.E, &V, &V);
  rom.A = project_operator(fom.A, &V, &V);
  rom.B = project_operator(fom.B, &V, nullptr);
  rom.C = project_operator(fom.C, nullptr, &V);
  rom.basis = basis;
  rom.x0 = V.transpose() * fom.x0;
  rom.inputs = fom.inputs;
  rom.full_nonlinearity = fom.f;

  if (fom.f && deim && !deim->empty()) {
    if (deim->U.rows() != fom.n()) throw StructuralError("DEIM basis does not match the model dimension");
    rom.deim = deim;
    const Index l = deim->order();
    Matrix PU(l, l);
    for (Index a = 0; a < l; ++a) PU.row(a) = deim->U.row(deim->indices[static_cast<std::size_t>(a)]);
    rom.deim_coefficients = PU.fullPivLu().inverse();
    rom.deim_projector = (V.transpose() * deim->U) * rom.deim_coefficients;
    rom.sampled = fom.f->sample(deim->indices);
    const auto& support = rom.sampled->support();
    rom.support_rows.resize(static_cast<Index>(support.size()), V.cols());
    for (std::size_t i = 0; i < support.size(); ++i) rom.support_rows.row(static_cast<Index>(i)) = V.row(support[i]);
  }
  return rom;
}

Trajectory simulate_rom(const ReducedModel& rom, const Parameter& mu) {
  const Index r = rom.r();
  const Index K = rom.steps();
  const Matrix Er = rom.E.assemble(mu);
  const Matrix Ar = rom.A.assemble(mu);
  const Matrix Br = rom.B.assemble(mu);
  const Matrix Cr = rom.C.assemble(mu);

  Eigen::PartialPivLU<Matrix> lu;
  if (r > 0) {
    lu.compute(Er);
    if (!(lu.rcond() > 1e-15)) throw SingularOperatorError("singular reduced operator E_r at mu = " + format_parameter(mu));
  }

  Trajectory traj;
  traj.states.resize(r, K + 1);
  traj.outputs.resize(Cr.rows(), K + 1);
  traj.states.col(0) = rom.x0;
  traj.outputs.col(0) = Cr * rom.x0;
  Vector rhs(r);
  for (Index k = 0; k < K; ++k) {
    if (r == 0) {
      traj.outputs.col(k + 1).setZero();
      continue;
    }
    rhs.noalias() = Ar * traj.states.col(k);
    rhs.noalias() += Br * rom.inputs.col(k);
    if (!rom.is_linear()) rhs += rom.reduced_nonlinearity(traj.states.col(k), mu);
    Vector next = lu.solve(rhs);
    if (!next.allFinite())
      throw DivergenceError("reduced model diverged at step " + std::to_string(k + 1) + " for mu = " + format_parameter(mu),
                            k + 1);
    traj.states.col(k + 1) = next;
    traj.outputs.col(k + 1) = Cr * next;
  }
  return traj;
}

}  // namespace rbadapt
