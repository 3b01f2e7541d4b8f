#pragma once

#include <rbadapt/fom.hpp>

#include <optional>

namespace rbadapt {

// Column-orthonormal reduced basis V (n x r).
struct Basis {
  Matrix V;

  Basis() = default;
  explicit Basis(Index n) : V(n, 0) {}
  explicit Basis(Matrix v) : V(std::move(v)) {}

  Index n() const { return V.rows(); }
  Index r() const { return V.cols(); }
  bool empty() const { return V.cols() == 0; }
  // max |V^T V - I|
  double orthonormality_defect() const;
};

struct PodExtension {
  Basis basis;
  Index requested = 0;  // |delta|
  Index changed = 0;    // columns actually appended (delta > 0) or removed (delta < 0)

  Index shortfall() const { return requested - changed; }
};

// delta > 0: appends the leading delta POD modes of the projection defect X - V V^T X,
//            skipping modes with singular value below 1e-14 sigma_1(X) (reported as shortfall).
// delta < 0: drops the trailing |delta| columns; requires |delta| < r.
// delta = 0: returns the basis unchanged.
PodExtension pod_extend(const Basis& basis, const Matrix& X, Index delta);

// Pairwise distinct interpolation rows selected greedily from the columns of U.
std::vector<Index> deim_select(const Matrix& U);

struct DeimArtifacts {
  Matrix U;                    // n x l orthonormal nonlinearity basis
  std::vector<Index> indices;  // l selected rows
  Matrix snapshots;            // accumulated snapshots, stored compressed as U_k Sigma_k

  Index order() const { return U.cols(); }
  bool empty() const { return U.cols() == 0; }
};

struct DeimUpdate {
  DeimArtifacts artifacts;
  Index requested = 0;
  Index achieved = 0;  // less than requested when the snapshot rank is insufficient

  bool clamped() const { return achieved < requested; }
};

inline constexpr Index kMaxStoredSnapshots = 2000;

// Appends F_new to the snapshot history, recomputes its SVD and reselects target
// DEIM vectors/indices (clamped to the numerical rank).
DeimUpdate deim_update(const DeimArtifacts& artifacts, const Matrix& F_new, Index target);

// Interpolated reconstruction U (P^T U)^{-1} P^T f.
Vector deim_reconstruct(const DeimArtifacts& artifacts, const Vector& f);

// Term-wise projected affine operator; shares the FOM coefficient functions.
struct ReducedOperator {
  std::vector<CoefficientFunction> coefficients;
  std::vector<Matrix> terms;

  Index size() const { return static_cast<Index>(terms.size()); }
  Index rows() const { return terms.empty() ? 0 : terms.front().rows(); }
  Index cols() const { return terms.empty() ? 0 : terms.front().cols(); }
  Vector theta(const Parameter& mu) const;
  Matrix assemble(const Parameter& mu) const;
};

struct ReducedModel {
  ReducedOperator E, A, B, C;
  Basis basis;
  std::optional<DeimArtifacts> deim;
  Vector x0;      // V^T x0
  Matrix inputs;  // q x K

  // Nonlinear part. With DEIM, f_r(x) = deim_projector * sampled(V_support x);
  // without DEIM the full nonlinearity is lifted, f_r(x) = V^T f(V x).
  std::shared_ptr<const Nonlinearity> full_nonlinearity;
  std::shared_ptr<const SampledNonlinearity> sampled;
  Matrix deim_coefficients;  // (P^T U)^{-1}, l x l
  Matrix deim_projector;     // V^T U (P^T U)^{-1}, r x l
  Matrix support_rows;       // V restricted to sampled->support(), |S| x r

  Index r() const { return basis.r(); }
  Index steps() const { return inputs.cols(); }
  bool is_linear() const { return full_nonlinearity == nullptr; }
  bool uses_deim() const { return deim.has_value() && !deim->empty() && !is_linear(); }

  // f_r(x_r; mu); zero for linear models.
  Vector reduced_nonlinearity(const Vector& xr, const Parameter& mu) const;
  // DEIM coefficients c with f(V x_r) ~ U c. Requires uses_deim().
  Vector deim_coordinates(const Vector& xr, const Parameter& mu) const;
};

ReducedModel galerkin_project(const ParametricFOM& fom, const Basis& basis,
                              const std::optional<DeimArtifacts>& deim = std::nullopt);

// Reduced trajectory: states are r-vectors, outputs m-vectors.
Trajectory simulate_rom(const ReducedModel& rom, const Parameter& mu);

}  // namespace rbadapt
