#pragma once

// Radial basis function interpolation with optional linear polynomial tail,
// log-space fitting and leave-one-out selection of the kernel shape parameter.
// Centers and query batches are stored column-wise (d x count).

#include <rbadapt/types.hpp>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace rbadapt::rbf {

enum class KernelKind { Gaussian, ThinPlateSpline, Multiquadric, InverseMultiquadric };

inline bool has_shape(KernelKind kind) { return kind != KernelKind::ThinPlateSpline; }

inline std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::ThinPlateSpline: return "tps";
    case KernelKind::Multiquadric: return "mq";
    case KernelKind::InverseMultiquadric: return "imq";
  }
  return "?";
}

inline KernelKind kernel_from_string(const std::string& name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "tps" || name == "thin-plate-spline") return KernelKind::ThinPlateSpline;
  if (name == "mq" || name == "multiquadric") return KernelKind::Multiquadric;
  if (name == "imq" || name == "inverse-multiquadric") return KernelKind::InverseMultiquadric;
  throw ConfigError("unknown kernel '" + name + "'");
}

template <typename Scalar = double>
struct Kernel {
  KernelKind kind = KernelKind::InverseMultiquadric;
  Scalar shape = Scalar(1);  // ignored for thin-plate splines
};

template <typename Scalar>
Scalar kernel_eval(const Kernel<Scalar>& k, Scalar r) {
  using std::exp;
  using std::log;
  using std::sqrt;
  switch (k.kind) {
    case KernelKind::Gaussian: return exp(-k.shape * k.shape * r * r);
    case KernelKind::ThinPlateSpline: return r > Scalar(0) ? r * r * log(r) : Scalar(0);
    case KernelKind::Multiquadric: return sqrt(r * r + k.shape * k.shape);
    case KernelKind::InverseMultiquadric: return Scalar(1) / sqrt(r * r + k.shape * k.shape);
  }
  return Scalar(0);
}

// None: pure kernel expansion. Linear: the d monomials mu_j. Affine: constant plus mu_j.
enum class PolynomialTail { None, Linear, Affine };

class CoincidentCentersError : public Error {
 public:
  CoincidentCentersError(const std::string& what, Index first, Index second)
      : Error(what), first_(first), second_(second) {}
  Index first() const { return first_; }
  Index second() const { return second_; }

 private:
  Index first_, second_;
};

class IllConditionedError : public Error {
 public:
  using Error::Error;
};

class LoocvError : public Error {
 public:
  LoocvError(const std::string& what, double best_shape) : Error(what), best_shape_(best_shape) {}
  double best_shape() const { return best_shape_; }

 private:
  double best_shape_;
};

template <typename Scalar = double>
struct Surrogate {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MatrixType centers;  // d x l
  Kernel<Scalar> kernel;
  VectorType c;
  VectorType lambda;
  std::vector<int> monomials;  // -1 is the constant, j >= 0 is mu_j
  std::vector<int> dropped;    // requested monomials removed for rank deficiency
  bool log_space = false;

  Index dimension() const { return centers.rows(); }
  Index size() const { return centers.cols(); }
};

namespace detail {

template <typename Scalar>
Scalar monomial(int m, const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& mu) {
  return m < 0 ? Scalar(1) : mu[m];
}

template <typename Scalar>
std::vector<int> requested_monomials(PolynomialTail tail, Index d) {
  std::vector<int> m;
  if (tail == PolynomialTail::Affine) m.push_back(-1);
  if (tail != PolynomialTail::None)
    for (Index j = 0; j < d; ++j) m.push_back(static_cast<int>(j));
  return m;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> polynomial_block(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers, const std::vector<int>& monomials) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> P(centers.cols(), static_cast<Index>(monomials.size()));
  for (Index i = 0; i < centers.cols(); ++i)
    for (std::size_t j = 0; j < monomials.size(); ++j)
      P(i, static_cast<Index>(j)) = monomial<Scalar>(monomials[j], centers.col(i));
  return P;
}

}  // namespace detail

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_matrix(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers, const Kernel<Scalar>& kernel) {
  const Index l = centers.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> R(l, l);
  for (Index j = 0; j < l; ++j) {
    R(j, j) = kernel_eval(kernel, Scalar(0));
    for (Index i = j + 1; i < l; ++i) {
      const Scalar v = kernel_eval(kernel, Scalar((centers.col(i) - centers.col(j)).norm()));
      R(i, j) = v;
      R(j, i) = v;
    }
  }
  return R;
}

// Throws CoincidentCentersError when two centers are closer than 1e-12 times the
// diameter of the center cloud.
template <typename Scalar>
void check_distinct(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers) {
  const Index l = centers.cols();
  Scalar diam = 0;
  for (Index i = 0; i < l; ++i)
    for (Index j = i + 1; j < l; ++j) diam = std::max(diam, Scalar((centers.col(i) - centers.col(j)).norm()));
  const Scalar tol = Scalar(1e-12) * std::max(diam, Scalar(1e-300));
  for (Index i = 0; i < l; ++i)
    for (Index j = i + 1; j < l; ++j)
      if ((centers.col(i) - centers.col(j)).norm() <= tol) {
        std::ostringstream os;
        os << "coincident centers " << i << " and " << j;
        throw CoincidentCentersError(os.str(), i, j);
      }
}

// Full (l+M) x (l+M) interpolation matrix [[R, P], [P^T, 0]] for the given monomials.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> system_matrix(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers, const Kernel<Scalar>& kernel,
    const std::vector<int>& monomials) {
  const Index l = centers.cols();
  const Index M = static_cast<Index>(monomials.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> S =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(l + M, l + M);
  S.topLeftCorner(l, l) = kernel_matrix(centers, kernel);
  if (M > 0) {
    const auto P = detail::polynomial_block<Scalar>(centers, monomials);
    S.topRightCorner(l, M) = P;
    S.bottomLeftCorner(M, l) = P.transpose();
  }
  return S;
}

template <typename Scalar, typename Derived>
Scalar evaluate(const Surrogate<Scalar>& s, const Eigen::MatrixBase<Derived>& mu) {
  Scalar v = 0;
  for (Index i = 0; i < s.size(); ++i) v += s.c[i] * kernel_eval(s.kernel, Scalar((mu - s.centers.col(i)).norm()));
  for (std::size_t j = 0; j < s.monomials.size(); ++j)
    v += s.lambda[static_cast<Index>(j)] * detail::monomial<Scalar>(s.monomials[j], mu);
  using std::pow;
  return s.log_space ? pow(Scalar(10), v) : v;
}

// Column-wise batch evaluation; one kernel row per query point.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_batch(
    const Surrogate<Scalar>& s, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(points.cols());
  for (Index p = 0; p < points.cols(); ++p) out[p] = evaluate(s, points.col(p));
  return out;
}

// Solves the (saddle-point) interpolation system. Rank-deficient polynomial columns
// are dropped and listed in Surrogate::dropped. Throws IllConditionedError when the
// interpolation condition fails at 1e-6 relative after solving.
template <typename Scalar>
Surrogate<Scalar> fit(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values, const Kernel<Scalar>& kernel,
                      PolynomialTail tail = PolynomialTail::Linear) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index l = centers.cols();
  if (l == 0) throw ConfigError("rbf fit needs at least one center");
  if (values.size() != l) throw StructuralError("rbf fit: one value per center required");
  if (!values.allFinite()) throw ConfigError("rbf fit: values must be finite");
  if (has_shape(kernel.kind) && !(kernel.shape > Scalar(0))) throw ConfigError("rbf fit: shape parameter must be positive");
  check_distinct(centers);

  Surrogate<Scalar> s;
  s.centers = centers;
  s.kernel = kernel;

  std::vector<int> wanted = detail::requested_monomials<Scalar>(tail, centers.rows());
  if (!wanted.empty()) {
    const MatrixType P = detail::polynomial_block<Scalar>(centers, wanted);
    Eigen::ColPivHouseholderQR<MatrixType> qr(P);
    qr.setThreshold(Scalar(1e-10));
    std::vector<int> keep;
    for (Index k = 0; k < qr.rank(); ++k) keep.push_back(static_cast<int>(qr.colsPermutation().indices()[k]));
    std::sort(keep.begin(), keep.end());
    for (std::size_t j = 0; j < wanted.size(); ++j) {
      if (std::find(keep.begin(), keep.end(), static_cast<int>(j)) != keep.end())
        s.monomials.push_back(wanted[j]);
      else
        s.dropped.push_back(wanted[j]);
    }
    if (l < static_cast<Index>(s.monomials.size()) + 1)
      throw ConfigError("rbf fit: polynomial tail of size " + std::to_string(s.monomials.size()) + " needs at least " +
                        std::to_string(s.monomials.size() + 1) + " centers");
  }

  const Index M = static_cast<Index>(s.monomials.size());
  const MatrixType S = system_matrix(centers, kernel, s.monomials);
  VectorType rhs = VectorType::Zero(l + M);
  rhs.head(l) = values;

  VectorType x;
  bool solved = false;
  if (M == 0 && (kernel.kind == KernelKind::Gaussian || kernel.kind == KernelKind::InverseMultiquadric)) {
    Eigen::LLT<MatrixType> llt(S);
    if (llt.info() == Eigen::Success) {
      x = llt.solve(rhs);
      x += llt.solve(VectorType(rhs - S * x));
      solved = x.allFinite();
    }
  }
  if (!solved) {
    Eigen::PartialPivLU<MatrixType> lu(S);
    x = lu.solve(rhs);
    x += lu.solve(VectorType(rhs - S * x));
  }
  s.c = x.head(l);
  s.lambda = x.tail(M);

  const Scalar scale = std::max(values.cwiseAbs().maxCoeff(), Scalar(1e-300));
  const VectorType back = S.topRows(l) * x;
  if (!x.allFinite() || (back - values).cwiseAbs().maxCoeff() > Scalar(1e-6) * scale)
    throw IllConditionedError("ill-conditioned kernel matrix; try a different shape parameter");
  return s;
}

// Fits log10 of strictly positive data; evaluation returns the anti-logarithm.
template <typename Scalar>
Surrogate<Scalar> fit_log(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values, const Kernel<Scalar>& kernel,
                          PolynomialTail tail = PolynomialTail::Linear) {
  if ((values.array() <= Scalar(0)).any() || !values.allFinite())
    throw ConfigError("fit_log: values must be finite and strictly positive");
  Surrogate<Scalar> s = fit<Scalar>(centers, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(values.array().log10()), kernel, tail);
  s.log_space = true;
  return s;
}

// Leave-one-out errors e_i = v_i - s^{(i)}(mu_i) by explicit deletion and refit.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> loocv_errors_naive(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values, const Kernel<Scalar>& kernel,
    PolynomialTail tail = PolynomialTail::None) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index l = centers.cols();
  VectorType e(l);
  for (Index i = 0; i < l; ++i) {
    MatrixType sub(centers.rows(), l - 1);
    VectorType vals(l - 1);
    for (Index j = 0, k = 0; j < l; ++j) {
      if (j == i) continue;
      sub.col(k) = centers.col(j);
      vals[k++] = values[j];
    }
    const Surrogate<Scalar> s = fit<Scalar>(sub, vals, kernel, tail);
    e[i] = values[i] - evaluate(s, centers.col(i));
  }
  return e;
}

// Rippa's closed form e_i = c_i / (S^{-1})_{ii}, with S the full interpolation matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> loocv_errors(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers,
                                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values,
                                                      const Kernel<Scalar>& kernel,
                                                      PolynomialTail tail = PolynomialTail::None) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Surrogate<Scalar> s = fit<Scalar>(centers, values, kernel, tail);
  const Index l = centers.cols();
  const MatrixType S = system_matrix(centers, kernel, s.monomials);
  Eigen::PartialPivLU<MatrixType> lu(S);
  MatrixType inv = lu.inverse();
  VectorType e(l);
  for (Index i = 0; i < l; ++i) e[i] = s.c[i] / inv(i, i);
  return e;
}

// Median nearest-neighbour distance of the centers.
template <typename Scalar>
Scalar fill_distance(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers) {
  const Index l = centers.cols();
  if (l < 2) return Scalar(1);
  std::vector<Scalar> nn(static_cast<std::size_t>(l), std::numeric_limits<Scalar>::infinity());
  for (Index i = 0; i < l; ++i)
    for (Index j = 0; j < l; ++j)
      if (i != j) nn[static_cast<std::size_t>(i)] = std::min(nn[static_cast<std::size_t>(i)], Scalar((centers.col(i) - centers.col(j)).norm()));
  std::sort(nn.begin(), nn.end());
  const std::size_t mid = nn.size() / 2;
  return nn.size() % 2 ? nn[mid] : Scalar(0.5) * (nn[mid - 1] + nn[mid]);
}

// Gaussian shape is an inverse length: [0.1/h, 10/h]. MQ/IMQ shapes are lengths: [0.1 h, 10 h].
template <typename Scalar>
std::pair<Scalar, Scalar> default_shape_bounds(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers,
                                               KernelKind kind) {
  const Scalar h = fill_distance(centers);
  if (kind == KernelKind::Gaussian) return {Scalar(0.1) / h, Scalar(10) / h};
  return {Scalar(0.1) * h, Scalar(10) * h};
}

template <typename Scalar = double>
struct ShapeSelection {
  Scalar shape = 0;
  Scalar error_norm = 0;
  int evaluations = 0;
};

// Minimizes ||e(shape)||_2 over [lo, hi]: a 24-point bracketing scan (12 log-spaced,
// 12 linearly spaced) followed by golden-section refinement in log(shape) around the
// best scan point; at most 80 objective evaluations, relative interval tolerance 1e-3.
template <typename Scalar>
ShapeSelection<Scalar> loocv_select_shape(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& centers,
                                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values, KernelKind kind,
                                          std::pair<Scalar, Scalar> bounds,
                                          PolynomialTail tail = PolynomialTail::None) {
  using std::exp;
  using std::log;
  using std::sqrt;
  if (!has_shape(kind)) throw ConfigError("thin-plate spline kernel has no shape parameter");
  if (centers.cols() < 3) throw ConfigError("LOOCV needs at least three centers");
  const auto [lo, hi] = bounds;
  if (!(Scalar(0) < lo && lo < hi)) throw ConfigError("LOOCV shape bounds must satisfy 0 < lo < hi");

  constexpr int kScan = 12;
  constexpr int kBudget = 80;
  constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  ShapeSelection<Scalar> best{lo, kInf, 0};
  auto objective = [&](Scalar shape) {
    ++best.evaluations;
    Scalar value = kInf;
    try {
      const auto e = loocv_errors<Scalar>(centers, values, Kernel<Scalar>{kind, shape}, tail);
      if (e.allFinite()) value = e.norm();
    } catch (const Error&) {
    }
    if (value < best.error_norm) {
      best.error_norm = value;
      best.shape = shape;
    }
    return value;
  };

  std::vector<Scalar> grid;
  for (int i = 0; i < kScan; ++i) {
    const Scalar t = Scalar(i) / Scalar(kScan - 1);
    grid.push_back(exp(log(lo) + t * (log(hi) - log(lo))));
    grid.push_back(lo + t * (hi - lo));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<Scalar> f;
  for (Scalar g : grid) f.push_back(objective(g));

  const auto ibest = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
  if (std::isfinite(f[ibest])) {
    Scalar a = log(grid[ibest > 0 ? ibest - 1 : 0]);
    Scalar b = log(grid[std::min(ibest + 1, grid.size() - 1)]);
    const Scalar ratio = (sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
    Scalar x1 = b - ratio * (b - a);
    Scalar x2 = a + ratio * (b - a);
    Scalar f1 = objective(exp(x1));
    Scalar f2 = objective(exp(x2));
    while (best.evaluations < kBudget && (exp(b) - exp(a)) > Scalar(1e-3) * exp(b)) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - ratio * (b - a);
        f1 = objective(exp(x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + ratio * (b - a);
        f2 = objective(exp(x2));
      }
    }
  }
  if (!std::isfinite(best.error_norm))
    throw LoocvError("LOOCV: every candidate shape parameter was ill-conditioned", static_cast<double>(best.shape));
  return best;
}

}  // namespace rbadapt::rbf
