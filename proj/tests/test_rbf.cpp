#include <doctest.h>

#include "support.hpp"

#include <rbadapt/rbf.hpp>

#include <chrono>

using namespace rbadapt;
using namespace rbadapt::rbf;

namespace {

Matrix random_centers(SplitMix64& rng, Index d, Index l) {
  Matrix c(d, l);
  for (Index j = 0; j < l; ++j)
    for (Index i = 0; i < d; ++i) c(i, j) = rng.uniform();
  return c;
}

// Rejection sampling with a minimum separation of 0.3 l^{-1/d}.
Matrix separated_centers(SplitMix64& rng, Index d, Index l) {
  const double sep = 0.3 * std::pow(static_cast<double>(l), -1.0 / static_cast<double>(d));
  Matrix c(d, l);
  Index k = 0;
  while (k < l) {
    Vector p(d);
    for (Index i = 0; i < d; ++i) p[i] = rng.uniform();
    bool ok = true;
    for (Index j = 0; j < k && ok; ++j) ok = (c.col(j) - p).norm() >= sep;
    if (ok) c.col(k++) = p;
  }
  return c;
}

Vector random_values(SplitMix64& rng, Index l) {
  Vector v(l);
  for (Index i = 0; i < l; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
  return v;
}

double max_rel_interp_error(const Surrogate<double>& s, const Vector& values) {
  double worst = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    const double v = evaluate(s, Vector(s.centers.col(i)));
    worst = std::max(worst, std::abs(v - values[i]) / std::max(std::abs(values[i]), 1e-300));
  }
  return worst;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(kernel_eval(Kernel<double>{KernelKind::Gaussian, 3.7}, 0.0) == 1.0);
  CHECK(kernel_eval(Kernel<double>{KernelKind::ThinPlateSpline, 1.0}, 1.0) == 0.0);
  CHECK(kernel_eval(Kernel<double>{KernelKind::ThinPlateSpline, 1.0}, 0.0) == 0.0);
  CHECK(kernel_eval(Kernel<double>{KernelKind::InverseMultiquadric, 2.0}, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kernel_eval(Kernel<double>{KernelKind::Multiquadric, 3.0}, 4.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(kernel_eval(Kernel<double>{KernelKind::Gaussian, 2.0}, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_eval(Kernel<float>{KernelKind::InverseMultiquadric, 2.0f}, 0.0f) == doctest::Approx(0.5));
}

TEST_CASE("single center reproduces its value") {
  Matrix c(2, 1);
  c << 0.3, 0.7;
  Vector v(1);
  v << 4.25;
  const auto s = fit<double>(c, v, Kernel<double>{KernelKind::Gaussian, 1.5}, PolynomialTail::None);
  CHECK(s.c[0] == doctest::Approx(4.25).epsilon(1e-15));
}

TEST_CASE("two Gaussian centers match the hand-inverted 2x2 system") {
  const double sigma = 1.3, r = 0.4, a = 2.0, b = -1.0;
  Matrix c(1, 2);
  c << 0.1, 0.1 + r;
  Vector v(2);
  v << a, b;
  const auto s = fit<double>(c, v, Kernel<double>{KernelKind::Gaussian, sigma}, PolynomialTail::None);
  const double g = std::exp(-sigma * sigma * r * r);
  const double det = 1.0 - g * g;
  CHECK(s.c[0] == doctest::Approx((a - g * b) / det).epsilon(1e-13));
  CHECK(s.c[1] == doctest::Approx((b - g * a) / det).epsilon(1e-13));
}

TEST_CASE("TPS with linear tail on five 2-D centers") {
  Matrix c(2, 5);
  c << 0, 1, 0, 1, 0.4, 0, 0, 1, 1, 0.6;
  Vector v(5);
  v << 1, -2, 0.5, 3, 0.25;
  const auto s = fit<double>(c, v, Kernel<double>{KernelKind::ThinPlateSpline, 1.0}, PolynomialTail::Linear);
  CHECK(s.monomials.size() == 2);
  CHECK(max_rel_interp_error(s, v) <= 1e-8);
  const Matrix S = system_matrix(c, s.kernel, s.monomials);
  Vector x(7), rhs = Vector::Zero(7);
  x << s.c, s.lambda;
  rhs.head(5) = v;
  CHECK((S * x - rhs).norm() <= 1e-10 * rhs.norm());
  for (Index j = 0; j < 2; ++j) CHECK(std::abs(c.row(j).dot(s.c)) <= 1e-8 * s.c.norm());
}

TEST_CASE("interpolation exactness and side conditions over random center sets") {
  SplitMix64 rng(11);
  const KernelKind kinds[] = {KernelKind::Gaussian, KernelKind::ThinPlateSpline, KernelKind::Multiquadric,
                              KernelKind::InverseMultiquadric};
  const PolynomialTail tails[] = {PolynomialTail::None, PolynomialTail::Linear, PolynomialTail::Affine};
  double worst = 0.0, worst_side = 0.0;
  int fits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.uniform() * 3.0) % 3;
    const Index l = 5 + static_cast<Index>(rng.uniform() * 46.0) % 46;
    const Matrix c = separated_centers(rng, d, l);
    const Vector v = random_values(rng, l);
    const double h = fill_distance(c);
    for (KernelKind kind : kinds) {
      // Shapes well inside the stable range so conditioning does not dominate.
      const double shape = kind == KernelKind::Gaussian ? 1.0 / h : h;
      for (PolynomialTail tail : tails) {
        if (kind == KernelKind::ThinPlateSpline && tail == PolynomialTail::None) continue;
        const auto s = fit<double>(c, v, Kernel<double>{kind, shape}, tail);
        worst = std::max(worst, max_rel_interp_error(s, v));
        for (std::size_t j = 0; j < s.monomials.size(); ++j) {
          double side = 0.0;
          for (Index i = 0; i < l; ++i) side += s.c[i] * (s.monomials[j] < 0 ? 1.0 : c(s.monomials[j], i));
          worst_side = std::max(worst_side, std::abs(side) / s.c.norm());
        }
        ++fits;
      }
    }
  }
  CHECK(fits == 1100);
  CHECK(worst <= 1e-8);
  CHECK(worst_side <= 1e-8);
}

TEST_CASE("Gaussian and IMQ kernel matrices are symmetric positive definite") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + trial % 3;
    const Index l = 2 + trial % 49;
    const Matrix c = random_centers(rng, d, l);
    const double h = fill_distance(c);
    for (const Kernel<double>& k :
         {Kernel<double>{KernelKind::Gaussian, 1.0 / (2.0 * h)}, Kernel<double>{KernelKind::InverseMultiquadric, 2.0 * h}}) {
      const Matrix R = kernel_matrix(c, k);
      CHECK((R - R.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::LLT<Matrix>(R).info() == Eigen::Success);
    }
  }
}

TEST_CASE("evaluation is translation invariant") {
  SplitMix64 rng(3);
  const Matrix c = random_centers(rng, 2, 12);
  const Vector v = random_values(rng, 12);
  Vector shift(2);
  shift << 3.5, -1.25;
  const Kernel<double> k{KernelKind::Multiquadric, 0.3};
  const auto s0 = fit<double>(c, v, k, PolynomialTail::None);
  const auto s1 = fit<double>(Matrix(c.colwise() + shift), v, k, PolynomialTail::None);
  for (int q = 0; q < 20; ++q) {
    Vector mu(2);
    mu << rng.uniform(), rng.uniform();
    const double a = evaluate(s0, mu), b = evaluate(s1, Vector(mu + shift));
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("constant data is reproduced at every center") {
  SplitMix64 rng(9);
  const Matrix c = random_centers(rng, 3, 20);
  const Vector v = Vector::Constant(20, 7.0);
  const auto s = fit<double>(c, v, Kernel<double>{KernelKind::InverseMultiquadric, 0.5}, PolynomialTail::Linear);
  CHECK(max_rel_interp_error(s, v) <= 1e-8);
}

TEST_CASE("coincident centers are rejected and named") {
  Matrix c(2, 4);
  c << 0, 1, 0.5, 1, 0, 0, 0.5, 0;
  Vector v = Vector::Ones(4);
  try {
    fit<double>(c, v, Kernel<double>{KernelKind::Gaussian, 1.0}, PolynomialTail::None);
    FAIL("expected CoincidentCentersError");
  } catch (const CoincidentCentersError& e) {
    CHECK(e.first() == 1);
    CHECK(e.second() == 3);
    CHECK(std::string(e.what()).find("coincident centers") != std::string::npos);
  }
}

TEST_CASE("degenerate polynomial columns are dropped") {
  Vector v(4);
  v << 1, 2, 0.5, -1;
  const Kernel<double> tps{KernelKind::ThinPlateSpline, 1.0};

  // Linear tail: a coordinate that is zero on every center gives a zero column.
  Matrix c0(2, 4);
  c0 << 0, 0.3, 0.6, 1, 0, 0, 0, 0;
  const auto s0 = fit<double>(c0, v, tps, PolynomialTail::Linear);
  REQUIRE(s0.monomials.size() == 1);
  CHECK(s0.monomials[0] == 0);
  REQUIRE(s0.dropped.size() == 1);
  CHECK(s0.dropped[0] == 1);
  CHECK(max_rel_interp_error(s0, v) <= 1e-8);

  // Affine tail: a shared nonzero coordinate duplicates the constant.
  Matrix c1(2, 4);
  c1 << 0, 0.3, 0.6, 1, 0.5, 0.5, 0.5, 0.5;
  const auto s1 = fit<double>(c1, v, tps, PolynomialTail::Affine);
  CHECK(s1.monomials.size() == 2);
  CHECK(s1.dropped.size() == 1);
  CHECK(max_rel_interp_error(s1, v) <= 1e-8);
}

TEST_CASE("invalid fits") {
  Matrix c(1, 3);
  c << 0, 0.5, 1;
  Vector v(3);
  v << 1, 2, 3;
  CHECK_THROWS_AS(fit<double>(c, v, Kernel<double>{KernelKind::Gaussian, 0.0}), ConfigError);
  CHECK_THROWS_AS(fit<double>(c, Vector(Vector::Ones(2)), Kernel<double>{KernelKind::Gaussian, 1.0}), StructuralError);
  Vector bad = v;
  bad[1] = std::nan("");
  CHECK_THROWS_AS(fit<double>(c, bad, Kernel<double>{KernelKind::Gaussian, 1.0}), ConfigError);
  // A nearly flat Gaussian on many close centers loses the interpolation condition.
  Matrix dense(1, 40);
  for (Index i = 0; i < 40; ++i) dense(0, i) = 0.001 * static_cast<double>(i);
  Vector vals(40);
  for (Index i = 0; i < 40; ++i) vals[i] = std::sin(static_cast<double>(i));
  CHECK_THROWS_AS(fit<double>(dense, vals, Kernel<double>{KernelKind::Gaussian, 1e-3}, PolynomialTail::None),
                  IllConditionedError);
}

TEST_CASE("fit_log") {
  SplitMix64 rng(21);
  const Matrix c = random_centers(rng, 2, 15);
  const Kernel<double> k{KernelKind::InverseMultiquadric, 0.3};

  const auto flat = fit_log<double>(c, Vector(Vector::Constant(15, 1e-4)), k);
  CHECK(flat.log_space);
  for (Index i = 0; i < 15; ++i) CHECK(std::abs(evaluate(flat, Vector(c.col(i))) - 1e-4) <= 1e-8 * 1e-4);

  Vector wide(15);
  for (Index i = 0; i < 15; ++i) wide[i] = std::pow(10.0, -8.0 + 7.0 * static_cast<double>(i) / 14.0);
  const auto s = fit_log<double>(c, wide, k);
  CHECK(max_rel_interp_error(s, wide) <= 1e-8);
  for (int q = 0; q < 1000; ++q) {
    Vector mu(2);
    mu << 3.0 * rng.uniform() - 1.0, 3.0 * rng.uniform() - 1.0;
    CHECK(evaluate(s, mu) > 0.0);
  }

  Vector neg = wide;
  neg[4] = 0.0;
  CHECK_THROWS_AS(fit_log<double>(c, neg, k), ConfigError);
}

TEST_CASE("log transform tames a Burgers-like error field") {
  // Estimates from early greedy iterations range over several decades along q.
  Matrix c(1, 12);
  Vector delta(12);
  for (Index i = 0; i < 12; ++i) {
    const double q = 0.001 + 0.999 * static_cast<double>(i) / 11.0;
    c(0, i) = q;
    delta[i] = 1e-1 * std::pow(1e-7, q);
  }
  const Kernel<double> k{KernelKind::InverseMultiquadric, 0.2};
  const auto s = fit_log<double>(c, delta, k);
  CHECK(max_rel_interp_error(s, delta) <= 1e-8);
  // Between centers the log fit stays within the local decade; the raw fit can go negative.
  for (Index i = 0; i + 1 < 12; ++i) {
    const Vector mid = Vector::Constant(1, 0.5 * (c(0, i) + c(0, i + 1)));
    const double v = evaluate(s, mid);
    CHECK(v > 0.0);
    CHECK(v <= 10.0 * std::max(delta[i], delta[i + 1]));
  }
}

TEST_CASE("Rippa shortcut agrees with explicit deletion") {
  SplitMix64 rng(42);
  Matrix c(1, 10);
  Vector v(10);
  for (Index i = 0; i < 10; ++i) {
    c(0, i) = 10.0 * rng.uniform();
    v[i] = std::sin(c(0, i));
  }
  const Kernel<double> k{KernelKind::Gaussian, 1.0};
  const Vector fast = loocv_errors<double>(c, v, k);
  const Vector slow = loocv_errors_naive<double>(c, v, k);
  for (Index i = 0; i < 10; ++i) CHECK(std::abs(fast[i] - slow[i]) <= 1e-10 * std::max(std::abs(slow[i]), 1e-300));

  // Also with a linear tail, where the saddle inverse is used.
  const Kernel<double> imq{KernelKind::InverseMultiquadric, 2.0};
  const Vector ft = loocv_errors<double>(c, v, imq, PolynomialTail::Linear);
  const Vector st = loocv_errors_naive<double>(c, v, imq, PolynomialTail::Linear);
  CHECK((ft - st).norm() <= 1e-9 * st.norm());
}

TEST_CASE("symmetric data gives a symmetric LOOCV error vector") {
  Matrix c(1, 7);
  Vector v(7);
  for (Index i = 0; i < 7; ++i) {
    c(0, i) = static_cast<double>(i) / 6.0;
    v[i] = std::cos(3.0 * (c(0, i) - 0.5));
  }
  const Vector e = loocv_errors<double>(c, v, Kernel<double>{KernelKind::Gaussian, 2.0});
  for (Index i = 0; i < 7; ++i) CHECK(std::abs(e[i] - e[6 - i]) <= 1e-12 * e.cwiseAbs().maxCoeff());
}

TEST_CASE("LOOCV shape selection beats a 100-point grid") {
  Matrix c(1, 3);
  c << 0, 0.5, 1;
  Vector v(3);
  v << 0, 0.25, 1;
  for (KernelKind kind : {KernelKind::Gaussian, KernelKind::InverseMultiquadric, KernelKind::Multiquadric}) {
    const std::pair<double, double> bounds{0.1, 10.0};
    const auto sel = loocv_select_shape<double>(c, v, kind, bounds);
    CHECK(sel.shape >= bounds.first);
    CHECK(sel.shape <= bounds.second);
    CHECK(sel.evaluations <= 80);
    double grid_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
      const double sigma = bounds.first + (bounds.second - bounds.first) * i / 99.0;
      try {
        grid_best = std::min(grid_best, loocv_errors<double>(c, v, Kernel<double>{kind, sigma}).norm());
      } catch (const Error&) {
      }
    }
    CHECK(sel.error_norm <= grid_best * (1.0 + 1e-9));
  }
}

TEST_CASE("LOOCV argument checks") {
  Matrix c(1, 3);
  c << 0, 0.5, 1;
  Vector v(3);
  v << 0, 1, 0;
  CHECK_THROWS_AS(loocv_select_shape<double>(c, v, KernelKind::ThinPlateSpline, {0.1, 1.0}), ConfigError);
  CHECK_THROWS_AS(loocv_select_shape<double>(Matrix(c.leftCols(2)), Vector(v.head(2)), KernelKind::Gaussian, {0.1, 1.0}),
                  ConfigError);
  CHECK_THROWS_AS(loocv_select_shape<double>(c, v, KernelKind::Gaussian, {1.0, 0.5}), ConfigError);
}

TEST_CASE("default shape bounds scale with the fill distance") {
  Matrix c(1, 5);
  c << 0, 0.1, 0.2, 0.3, 0.4;
  const auto g = default_shape_bounds(c, KernelKind::Gaussian);
  CHECK(g.first == doctest::Approx(1.0));
  CHECK(g.second == doctest::Approx(100.0));
  const auto m = default_shape_bounds(c, KernelKind::InverseMultiquadric);
  CHECK(m.first == doctest::Approx(0.01));
  CHECK(m.second == doctest::Approx(1.0));
}

TEST_CASE("batch evaluation cost grows linearly with the number of points") {
  SplitMix64 rng(77);
  const Matrix c = random_centers(rng, 2, 30);
  const auto s = fit<double>(c, random_values(rng, 30), Kernel<double>{KernelKind::InverseMultiquadric, 0.3});
  auto seconds = [&](Index n) {
    const Matrix pts = random_centers(rng, 2, n);
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const Vector out = evaluate_batch(s, pts);
      const auto t1 = std::chrono::steady_clock::now();
      CHECK(out.size() == n);
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t100 = seconds(100), t1000 = seconds(1000), t10000 = seconds(10000);
  // log-log slope between 1e3 and 1e4 points; generous band for timer noise.
  const double slope = std::log10(t10000 / t1000);
  CHECK(slope > 0.7);
  CHECK(slope < 1.3);
  CHECK(t10000 > t100);
}

TEST_CASE("single precision instantiation") {
  Eigen::MatrixXf c(1, 4);
  c << 0, 0.3, 0.6, 1;
  Eigen::VectorXf v(4);
  v << 1, 2, 0, -1;
  const auto s = fit<float>(c, v, Kernel<float>{KernelKind::InverseMultiquadric, 0.5f}, PolynomialTail::None);
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(evaluate(s, Eigen::VectorXf(c.col(i))) - v[i]) <= 1e-3f);
}
