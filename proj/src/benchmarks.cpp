#include <rbadapt/benchmarks.hpp>
#include <rbadapt/matrix_market.hpp>

#include <cmath>

namespace rbadapt {

namespace {

SparseMatrix identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

Vector uniform_grid(double T, Index K) {
  Vector t(K + 1);
  for (Index k = 0; k <= K; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(K);
  return t;
}

ParameterDomain linear_domain(std::initializer_list<double> lo, std::initializer_list<double> hi,
                              std::vector<std::string> names) {
  ParameterDomain d;
  d.lower = Eigen::Map<const Vector>(lo.begin(), static_cast<Index>(lo.size()));
  d.upper = Eigen::Map<const Vector>(hi.begin(), static_cast<Index>(hi.size()));
  d.scales.assign(lo.size(), AxisScale::Linear);
  d.names = std::move(names);
  return d;
}

ParameterDomain burgers_domain() { return linear_domain({0.001}, {1.0}, {"q"}); }
ParameterDomain convdiff_domain() { return linear_domain({0.001, 0.5}, {1.0, 5.0}, {"q1", "q2"}); }
ParameterDomain thermal_domain() {
  ParameterDomain d = linear_domain({1.0, 1.0, 1.0}, {1e8, 1e8, 1e8}, {"h_top", "h_bottom", "h_side"});
  d.scales.assign(3, AxisScale::Log);
  return d;
}

}  // namespace

ParametricFOM build_burgers(Index n, Index K, ConvectionStencil stencil) {
  if (n < 3) throw ConfigError("burgers: grid size must be at least 3");
  if (K < 1) throw ConfigError("burgers: step count must be positive");
  const double h = 1.0 / static_cast<double>(n);
  const double T = 2.0;
  const double dt = T / static_cast<double>(K);

  // Nodes w_j = (j+1) h; v(0) = 0 is eliminated, v_w(1) = 0 uses the mirror ghost v_{n+1} = v_{n-1}.
  std::vector<Triplet> d2, d1;
  for (Index j = 0; j < n; ++j) {
    if (j == n - 1) {
      d2.emplace_back(j, j - 1, 2.0 / (h * h));
      d2.emplace_back(j, j, -2.0 / (h * h));
      continue;
    }
    if (j > 0) d2.emplace_back(j, j - 1, 1.0 / (h * h));
    d2.emplace_back(j, j, -2.0 / (h * h));
    d2.emplace_back(j, j + 1, 1.0 / (h * h));
  }
  for (Index j = 0; j < n; ++j) {
    if (stencil == ConvectionStencil::Upwind) {
      // v >= 0 throughout (nonnegative source, zero inflow), so the upwind side is j-1.
      d1.emplace_back(j, j, 1.0 / h);
      if (j > 0) d1.emplace_back(j, j - 1, -1.0 / h);
    } else if (j < n - 1) {
      if (j > 0) d1.emplace_back(j, j - 1, -0.5 / h);
      d1.emplace_back(j, j + 1, 0.5 / h);
    }
  }
  SparseMatrix D2(n, n), D1(n, n);
  D2.setFromTriplets(d2.begin(), d2.end());
  D1.setFromTriplets(d1.begin(), d1.end());

  ParametricFOM fom;
  fom.name = "burgers";
  fom.E = AffineOperator({{[](const Parameter&) { return 1.0; }, identity(n)},
                          {[](const Parameter& mu) { return mu[0]; }, SparseMatrix(-dt * D2)}});
  fom.A = AffineOperator::constant(identity(n));
  fom.f = std::make_shared<ConvectiveNonlinearity>(D1, -dt);

  SparseMatrix B(n, 1);
  for (Index j = 0; j < n; ++j) B.insert(j, 0) = dt;
  fom.B = AffineOperator::constant(B);

  SparseMatrix C(1, n);
  C.insert(0, n - 1) = 1.0;
  fom.C = AffineOperator::constant(C);

  fom.time_grid = uniform_grid(T, K);
  fom.inputs = Matrix::Ones(1, K);
  fom.domain = burgers_domain();
  fom.x0 = Vector::Zero(n);
  fom.validate();
  return fom;
}

ParametricFOM build_convdiff(Index n, Index K) {
  if (n < 3) throw ConfigError("convdiff: grid size must be at least 3");
  if (K < 1) throw ConfigError("convdiff: step count must be positive");
  const double h = 1.0 / static_cast<double>(n + 1);
  const double T = 1.0;
  const double dt = T / static_cast<double>(K);

  // Interior nodes w_j = (j+1) h with v = 0 at both ends. The q2 v_w term transports
  // towards w = 0, so its upwind stencil is the forward difference.
  std::vector<Triplet> d2, d1;
  for (Index j = 0; j < n; ++j) {
    if (j > 0) d2.emplace_back(j, j - 1, 1.0 / (h * h));
    d2.emplace_back(j, j, -2.0 / (h * h));
    if (j + 1 < n) {
      d2.emplace_back(j, j + 1, 1.0 / (h * h));
      d1.emplace_back(j, j + 1, 1.0 / h);
    }
    d1.emplace_back(j, j, -1.0 / h);
  }
  SparseMatrix D2(n, n), D1(n, n);
  D2.setFromTriplets(d2.begin(), d2.end());
  D1.setFromTriplets(d1.begin(), d1.end());

  ParametricFOM fom;
  fom.name = "convdiff";
  fom.E = AffineOperator({{[](const Parameter&) { return 1.0; }, identity(n)},
                          {[](const Parameter& mu) { return mu[0]; }, SparseMatrix(-dt * D2)},
                          {[](const Parameter& mu) { return mu[1]; }, SparseMatrix(-dt * D1)}});
  fom.A = AffineOperator::constant(identity(n));

  SparseMatrix B(n, 1);
  for (Index j = 0; j < n; ++j) B.insert(j, 0) = -dt;
  fom.B = AffineOperator({{[](const Parameter& mu) { return mu[1]; }, B}});

  std::vector<Index> window;
  for (Index j = 0; j < n; ++j) {
    const double w = static_cast<double>(j + 1) * h;
    if (w >= 0.495 - 1e-12 && w <= 0.505 + 1e-12) window.push_back(j);
  }
  if (window.empty()) throw ConfigError("convdiff: grid too coarse, no node inside the output window");
  SparseMatrix C(1, n);
  for (Index j : window) C.insert(0, j) = 1.0 / static_cast<double>(window.size());
  fom.C = AffineOperator::constant(C);

  fom.x0.resize(n);
  for (Index j = 0; j < n; ++j) fom.x0[j] = static_cast<double>(j + 1) * h <= 0.5 ? 1.0 : 0.0;

  fom.time_grid = uniform_grid(T, K);
  fom.inputs = Matrix::Ones(1, K);
  fom.domain = convdiff_domain();
  fom.validate();
  return fom;
}

ThermalMatrices read_thermal_matrices(const std::filesystem::path& directory, const ThermalFiles& files) {
  ThermalMatrices m;
  m.E = read_matrix_market(directory / files.E);
  m.A0 = read_matrix_market(directory / files.A0);
  m.A1 = read_matrix_market(directory / files.A1);
  m.A2 = read_matrix_market(directory / files.A2);
  m.A3 = read_matrix_market(directory / files.A3);
  m.B = read_matrix_market(directory / files.B);
  m.C = read_matrix_market(directory / files.C);

  const Index n = m.E.rows();
  auto square = [n](const SparseMatrix& M, const std::string& what) {
    if (M.rows() != n || M.cols() != n)
      throw StructuralError("thermal: " + what + " is " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()) +
                            ", expected " + std::to_string(n) + "x" + std::to_string(n));
  };
  square(m.E, files.E);
  square(m.A0, files.A0);
  square(m.A1, files.A1);
  square(m.A2, files.A2);
  square(m.A3, files.A3);
  if (m.B.rows() != n) throw StructuralError("thermal: " + files.B + " must have " + std::to_string(n) + " rows");
  if (m.C.cols() != n || m.C.rows() < 1)
    throw StructuralError("thermal: " + files.C + " must have " + std::to_string(n) + " columns");
  return m;
}

AffineOperator thermal_stiffness(const ThermalMatrices& m) {
  return AffineOperator({{[](const Parameter&) { return 1.0; }, m.A0},
                         {[](const Parameter& mu) { return -mu[0]; }, m.A1},
                         {[](const Parameter& mu) { return -mu[1]; }, m.A2},
                         {[](const Parameter& mu) { return -mu[2]; }, m.A3}});
}

ParametricFOM build_thermal(const ThermalMatrices& m, Index K, double T) {
  if (K < 1 || !(T > 0)) throw ConfigError("thermal: need K >= 1 and T > 0");
  const double dt = T / static_cast<double>(K);
  const Index n = m.E.rows();

  ParametricFOM fom;
  fom.name = "thermal";
  fom.E = AffineOperator({{[](const Parameter&) { return 1.0; }, SparseMatrix(m.E - dt * m.A0)},
                          {[](const Parameter& mu) { return mu[0]; }, SparseMatrix(dt * m.A1)},
                          {[](const Parameter& mu) { return mu[1]; }, SparseMatrix(dt * m.A2)},
                          {[](const Parameter& mu) { return mu[2]; }, SparseMatrix(dt * m.A3)}});
  fom.A = AffineOperator::constant(m.E);
  fom.B = AffineOperator::constant(SparseMatrix(dt * m.B));
  fom.C = AffineOperator::constant(SparseMatrix(m.C.topRows(1)));
  fom.time_grid = uniform_grid(T, K);
  fom.inputs = Matrix::Ones(m.B.cols(), K);
  fom.domain = thermal_domain();
  fom.x0 = Vector::Zero(n);
  fom.validate();
  return fom;
}

ParametricFOM load_thermal(const std::filesystem::path& directory, const ThermalFiles& files, Index K, double T) {
  return build_thermal(read_thermal_matrices(directory, files), K, T);
}

std::vector<ModelInfo> available_models() {
  return {
      {"burgers", "1-D viscous Burgers, nonlinear, semi-implicit Euler", burgers_domain(), 500, 1000},
      {"convdiff", "1-D convection-diffusion, linear, implicit Euler", convdiff_domain(), 800, 100},
      {"thermal", "microthruster heat transfer from Matrix Market files, implicit Euler", thermal_domain(), 4257,
       100},
  };
}

}  // namespace rbadapt
