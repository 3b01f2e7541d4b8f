#include <rbadapt/fom.hpp>

#include <Eigen/SparseLU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace rbadapt {

namespace {

std::atomic<std::uint64_t> g_fom_solves{0};

}  // namespace

std::string format_parameter(const Parameter& mu) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Index i = 0; i < mu.size(); ++i) {
    if (i > 0) os << ", ";
    os << mu[i];
  }
  os << ")";
  return os.str();
}

AffineOperator::AffineOperator(std::vector<AffineTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw StructuralError("affine operator needs at least one term");
  rows_ = terms_.front().matrix.rows();
  cols_ = terms_.front().matrix.cols();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (t.matrix.rows() != rows_ || t.matrix.cols() != cols_) {
      std::ostringstream os;
      os << "affine term " << i << " is " << t.matrix.rows() << "x" << t.matrix.cols() << ", expected "
         << rows_ << "x" << cols_;
      throw StructuralError(os.str());
    }
    if (!t.coefficient) throw StructuralError("affine term without coefficient function");
  }
}

AffineOperator AffineOperator::constant(SparseMatrix matrix) {
  return AffineOperator({AffineTerm{[](const Parameter&) { return 1.0; }, std::move(matrix)}});
}

Vector AffineOperator::coefficients(const Parameter& mu) const {
  Vector theta(size());
  for (Index i = 0; i < size(); ++i) theta[i] = term(i).coefficient(mu);
  return theta;
}

SparseMatrix AffineOperator::assemble(const Parameter& mu) const {
  SparseMatrix out(rows_, cols_);
  for (const auto& t : terms_) out += t.coefficient(mu) * t.matrix;
  out.makeCompressed();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

class SampledConvective final : public SampledNonlinearity {
 public:
  SampledConvective(SparseMatrix local_derivative, std::vector<Index> self_pos, std::vector<Index> support,
                    double scale)
      : local_derivative_(std::move(local_derivative)),
        self_pos_(std::move(self_pos)),
        support_(std::move(support)),
        scale_(scale) {}

  const std::vector<Index>& support() const override { return support_; }

  Vector evaluate(const Vector& x_support, const Parameter&) const override {
    Vector dx = local_derivative_ * x_support;
    Vector out(dx.size());
    for (Index i = 0; i < dx.size(); ++i) out[i] = scale_ * x_support[self_pos_[static_cast<std::size_t>(i)]] * dx[i];
    return out;
  }

 private:
  SparseMatrix local_derivative_;  // rows x |support|
  std::vector<Index> self_pos_;    // position of each sampled row inside support
  std::vector<Index> support_;
  double scale_;
};

}  // namespace

ConvectiveNonlinearity::ConvectiveNonlinearity(SparseMatrix derivative, double scale)
    : derivative_(std::move(derivative)), scale_(scale) {
  if (derivative_.rows() != derivative_.cols()) throw StructuralError("convective derivative must be square");
}

Vector ConvectiveNonlinearity::evaluate(const Vector& x, const Parameter&) const {
  return scale_ * x.cwiseProduct(derivative_ * x);
}

std::shared_ptr<const SampledNonlinearity> ConvectiveNonlinearity::sample(std::span<const Index> rows) const {
  std::vector<Index> support;
  for (Index r : rows) {
    support.push_back(r);
    for (decltype(derivative_)::InnerIterator it(derivative_, r); it; ++it) support.push_back(it.col());
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  auto position = [&](Index global) {
    return static_cast<Index>(std::lower_bound(support.begin(), support.end(), global) - support.begin());
  };

  std::vector<Triplet> trips;
  std::vector<Index> self_pos;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    self_pos.push_back(position(rows[i]));
    for (decltype(derivative_)::InnerIterator it(derivative_, rows[i]); it; ++it)
      trips.emplace_back(static_cast<Index>(i), position(it.col()), it.value());
  }
  SparseMatrix local(static_cast<Index>(rows.size()), static_cast<Index>(support.size()));
  local.setFromTriplets(trips.begin(), trips.end());
  return std::make_shared<SampledConvective>(std::move(local), std::move(self_pos), std::move(support), scale_);
}

// ---------------------------------------------------------------------------

bool ParameterDomain::contains(const Parameter& mu, double rel_tol) const {
  if (mu.size() != dimension()) return false;
  for (Index i = 0; i < dimension(); ++i) {
    const double slack = rel_tol * std::max(std::abs(lower[i]), std::abs(upper[i]));
    if (mu[i] < lower[i] - slack || mu[i] > upper[i] + slack) return false;
  }
  return true;
}

Parameter ParameterDomain::normalize(const Parameter& mu) const {
  Parameter u(dimension());
  for (Index i = 0; i < dimension(); ++i) {
    if (scales[static_cast<std::size_t>(i)] == AxisScale::Log)
      u[i] = (std::log10(mu[i]) - std::log10(lower[i])) / (std::log10(upper[i]) - std::log10(lower[i]));
    else
      u[i] = (mu[i] - lower[i]) / (upper[i] - lower[i]);
  }
  return u;
}

Parameter ParameterDomain::denormalize(const Parameter& unit) const {
  Parameter mu(dimension());
  for (Index i = 0; i < dimension(); ++i) {
    if (scales[static_cast<std::size_t>(i)] == AxisScale::Log) {
      const double lo = std::log10(lower[i]);
      const double hi = std::log10(upper[i]);
      mu[i] = std::pow(10.0, lo + unit[i] * (hi - lo));
    } else {
      mu[i] = lower[i] + unit[i] * (upper[i] - lower[i]);
    }
  }
  return mu;
}

void ParameterDomain::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw ConfigError("parameter domain bounds must be nonempty and of equal length");
  if (static_cast<Index>(scales.size()) != dimension()) throw ConfigError("parameter domain scale list has wrong length");
  for (Index i = 0; i < dimension(); ++i) {
    if (!(lower[i] < upper[i])) throw ConfigError("degenerate parameter domain on axis " + std::to_string(i));
    if (scales[static_cast<std::size_t>(i)] == AxisScale::Log && lower[i] <= 0)
      throw ConfigError("log-scaled axis " + std::to_string(i) + " must have positive bounds");
  }
}

void ParametricFOM::validate() const {
  if (E.empty() || A.empty() || B.empty() || C.empty()) throw StructuralError(name + ": missing affine operator");
  const Index nn = E.rows();
  if (E.cols() != nn || A.rows() != nn || A.cols() != nn) throw StructuralError(name + ": E and A must be n x n");
  if (B.rows() != nn) throw StructuralError(name + ": B must have n rows");
  if (C.cols() != nn) throw StructuralError(name + ": C must have n columns");
  if (x0.size() != nn) throw StructuralError(name + ": initial state has wrong length");
  if (time_grid.size() < 2) throw ConfigError(name + ": time grid needs at least two instants");
  for (Index k = 0; k + 1 < time_grid.size(); ++k)
    if (!(time_grid[k] < time_grid[k + 1])) throw ConfigError(name + ": time grid must be strictly increasing");
  if (inputs.rows() != B.cols() || inputs.cols() != steps())
    throw StructuralError(name + ": input signal must be q x K");
  domain.validate();
}

// ---------------------------------------------------------------------------

Trajectory simulate(const ParametricFOM& fom, const Parameter& mu) {
  g_fom_solves.fetch_add(1, std::memory_order_relaxed);
  if (mu.size() != fom.domain.dimension())
    throw StructuralError("parameter " + format_parameter(mu) + " has wrong dimension for " + fom.name);

  const SparseMatrix E = fom.E.assemble(mu);
  const SparseMatrix A = fom.A.assemble(mu);
  const SparseMatrix B = fom.B.assemble(mu);
  const SparseMatrix C = fom.C.assemble(mu);

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(E);
  if (lu.info() != Eigen::Success) throw SingularOperatorError("singular operator E at mu = " + format_parameter(mu));

  const Index K = fom.steps();
  Trajectory traj;
  traj.states.resize(fom.n(), K + 1);
  traj.outputs.resize(fom.output_dim(), K + 1);
  traj.states.col(0) = fom.x0;
  traj.outputs.col(0) = C * fom.x0;

  Vector rhs(fom.n());
  for (Index k = 0; k < K; ++k) {
    rhs.noalias() = A * traj.states.col(k);
    rhs.noalias() += B * fom.inputs.col(k);
    if (fom.f) rhs += fom.f->evaluate(traj.states.col(k), mu);
    Vector next = lu.solve(rhs);
    if (!next.allFinite())
      throw DivergenceError("divergence at step " + std::to_string(k + 1) + " for mu = " + format_parameter(mu), k + 1);
    traj.states.col(k + 1) = next;
    traj.outputs.col(k + 1) = C * next;
  }
  return traj;
}

Matrix nonlinearity_snapshots(const ParametricFOM& fom, const Trajectory& traj, const Parameter& mu) {
  if (!fom.f) return Matrix(fom.n(), 0);
  const Index K = traj.steps();
  Matrix F(fom.n(), K);
  for (Index k = 1; k <= K; ++k) F.col(k - 1) = fom.f->evaluate(traj.states.col(k), mu);
  return F;
}

std::uint64_t fom_solve_count() { return g_fom_solves.load(std::memory_order_relaxed); }

}  // namespace rbadapt
