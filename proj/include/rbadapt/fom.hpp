#pragma once

#include <rbadapt/types.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rbadapt {

using CoefficientFunction = std::function<double(const Parameter&)>;

struct AffineTerm {
  CoefficientFunction coefficient;
  SparseMatrix matrix;
};

// Operator of the form sum_i theta_i(mu) M_i with parameter-independent M_i.
class AffineOperator {
 public:
  AffineOperator() = default;
  // Throws StructuralError when the term matrices disagree in shape or the list is empty.
  explicit AffineOperator(std::vector<AffineTerm> terms);

  static AffineOperator constant(SparseMatrix matrix);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return static_cast<Index>(terms_.size()); }
  bool empty() const { return terms_.empty(); }

  const AffineTerm& term(Index i) const { return terms_[static_cast<std::size_t>(i)]; }
  const std::vector<AffineTerm>& terms() const { return terms_; }

  Vector coefficients(const Parameter& mu) const;
  SparseMatrix assemble(const Parameter& mu) const;

 private:
  std::vector<AffineTerm> terms_;
  Index rows_ = 0;
  Index cols_ = 0;
};

inline SparseMatrix assemble(const AffineOperator& op, const Parameter& mu) { return op.assemble(mu); }

// Nonlinearity restricted to a fixed set of output rows. Evaluation needs only the
// state entries listed in support(), which is what keeps DEIM online cost free of n.
class SampledNonlinearity {
 public:
  virtual ~SampledNonlinearity() = default;
  // Sorted, unique global state indices required by the sampled rows.
  virtual const std::vector<Index>& support() const = 0;
  // x_support holds the state at support() (same order); returns one value per sampled row.
  virtual Vector evaluate(const Vector& x_support, const Parameter& mu) const = 0;
};

class Nonlinearity {
 public:
  virtual ~Nonlinearity() = default;
  virtual Vector evaluate(const Vector& x, const Parameter& mu) const = 0;
  virtual std::shared_ptr<const SampledNonlinearity> sample(std::span<const Index> rows) const = 0;
};

// f(x) = scale * x .* (D x), the explicit convection term of Burgers-type models.
class ConvectiveNonlinearity final : public Nonlinearity {
 public:
  ConvectiveNonlinearity(SparseMatrix derivative, double scale);

  Vector evaluate(const Vector& x, const Parameter& mu) const override;
  std::shared_ptr<const SampledNonlinearity> sample(std::span<const Index> rows) const override;

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& derivative() const { return derivative_; }
  double scale() const { return scale_; }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> derivative_;
  double scale_;
};

enum class AxisScale { Linear, Log };

// Axis-aligned box. Log axes are sampled and normalized in log10 coordinates.
struct ParameterDomain {
  Vector lower;
  Vector upper;
  std::vector<AxisScale> scales;
  std::vector<std::string> names;

  Index dimension() const { return lower.size(); }
  bool contains(const Parameter& mu, double rel_tol = 1e-12) const;
  // Maps mu onto the unit box, axis by axis, honouring log scaling.
  Parameter normalize(const Parameter& mu) const;
  Parameter denormalize(const Parameter& unit) const;
  void validate() const;
};

struct Trajectory {
  Matrix states;   // n x (K+1), column k is x^k
  Matrix outputs;  // m x (K+1), column k is y^k

  Index steps() const { return states.cols() - 1; }
};

// E(mu) x^{k+1} = A(mu) x^k + f(x^k; mu) + B(mu) u^k,  y^{k+1} = C(mu) x^{k+1}.
struct ParametricFOM {
  std::string name;
  AffineOperator E;
  AffineOperator A;
  AffineOperator B;
  AffineOperator C;
  std::shared_ptr<const Nonlinearity> f;  // null for linear models
  Vector time_grid;                       // K+1 strictly increasing instants
  Matrix inputs;                          // q x K, column k is u^k
  ParameterDomain domain;
  Vector x0;

  Index n() const { return E.rows(); }
  Index steps() const { return time_grid.size() - 1; }
  Index input_dim() const { return B.cols(); }
  Index output_dim() const { return C.rows(); }
  bool is_linear() const { return f == nullptr; }

  // Throws StructuralError / ConfigError on inconsistent shapes or domain.
  void validate() const;
};

Trajectory simulate(const ParametricFOM& fom, const Parameter& mu);

// Columns f(x^1), ..., f(x^K) of a computed trajectory; empty for linear models.
Matrix nonlinearity_snapshots(const ParametricFOM& fom, const Trajectory& traj, const Parameter& mu);

// Number of full-order simulations run by this process so far.
std::uint64_t fom_solve_count();

}  // namespace rbadapt
