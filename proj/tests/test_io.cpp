#include <doctest.h>

#include "support.hpp"

#include <rbadapt/config.hpp>
#include <rbadapt/csv.hpp>
#include <rbadapt/matrix_market.hpp>

#include <fstream>
#include <sstream>

using namespace rbadapt;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

long mm_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_matrix_market(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::string config_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_config(in, "exp.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

TEST_CASE("Matrix Market general and symmetric") {
  std::istringstream a("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2.5\n");
  const SparseMatrix A = read_matrix_market(a);
  CHECK(A.rows() == 1);
  CHECK(A.coeff(0, 0) == 2.5);

  std::istringstream s("%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 1\n2 1 3\n");
  const SparseMatrix S = read_matrix_market(s);
  CHECK(S.coeff(0, 1) == 3.0);
  CHECK(S.coeff(1, 0) == 3.0);
  CHECK(S.nonZeros() == 3);

  std::istringstream arr("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
  const SparseMatrix D = read_matrix_market(arr);
  CHECK(D.coeff(1, 0) == 2.0);
  CHECK(D.coeff(0, 1) == 3.0);

  std::istringstream i("%%MatrixMarket matrix coordinate integer general\n2 3 1\n2 3 -7\n");
  const SparseMatrix I = read_matrix_market(i);
  CHECK(I.cols() == 3);
  CHECK(I.coeff(1, 2) == -7.0);
}

TEST_CASE("Matrix Market round trip is bitwise") {
  SplitMix64 rng(8);
  std::vector<Triplet> t;
  for (int k = 0; k < 60; ++k)
    t.emplace_back(static_cast<Index>(rng.below(20)), static_cast<Index>(rng.below(20)),
                   (rng.uniform() - 0.5) * std::pow(10.0, 8.0 * rng.uniform() - 4.0));
  SparseMatrix M(20, 20);
  M.setFromTriplets(t.begin(), t.end());
  const auto dir = testing::scratch_dir("mm");
  write_matrix_market(M, dir / "m.mtx");
  const SparseMatrix R = read_matrix_market(dir / "m.mtx");
  CHECK(R.rows() == 20);
  CHECK(R.nonZeros() == M.nonZeros());
  CHECK((Matrix(R) - Matrix(M)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Matrix Market errors carry line numbers") {
  CHECK(mm_error_line("") == 1);
  CHECK(mm_error_line("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1\n") == 1);
  CHECK(mm_error_line("%%MatrixMarket matrix coordinate real general\n% c\n2 2\n") == 3);
  CHECK(mm_error_line("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 1\n") == 4);
  CHECK(mm_error_line("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n") == 5);
  CHECK(mm_error_line("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n") == 3);
  CHECK(mm_error_line("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1\n") == 2);
  CHECK_THROWS_AS(read_matrix_market(std::filesystem::path("/nonexistent/x.mtx")), IoError);
}

TEST_CASE("format_real round-trips") {
  SplitMix64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, 40.0 * rng.uniform() - 20.0);
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(std::stod(format_real(0.1)) == 0.1);
  CHECK(format_real(0.0) == "0");
}

TEST_CASE("trace CSV schema") {
  GreedyTrace trace;
  const std::string empty = trace_csv(trace, 2);
  CHECK(lines_of(empty).size() == 1);
  CHECK(lines_of(empty)[0] == "iteration,mu_star_1,mu_star_2,delta_max,card_coarse,r,l_deim,n_add,n_del,wall_seconds");
  CHECK(empty.back() == '\n');

  IterationRecord rec;
  rec.iteration = 1;
  rec.mu_star = Parameter::Constant(2, 0.25);
  rec.delta_max = 1.0 / 3.0;
  rec.card_coarse = 10;
  rec.r = 4;
  rec.l_deim = 2;
  rec.n_add = 3;
  rec.n_del = 1;
  rec.wall_seconds = 1.23456;
  trace.iterations.push_back(rec);
  const auto one = lines_of(trace_csv(trace, 2));
  REQUIRE(one.size() == 2);
  CHECK(one[1] == "1,0.25,0.25," + format_real(1.0 / 3.0) + ",10,4,2,3,1,1.235");
  CHECK(lines_of(trace_csv(trace, 2, {}, false))[1] == "1,0.25,0.25," + format_real(1.0 / 3.0) + ",10,4,2,3,1,0.000");

  const auto with_meta = lines_of(trace_csv(trace, 2, {{"config", "abc"}, {"seed_coarse", "7"}}));
  REQUIRE(with_meta.size() == 3);
  CHECK(with_meta[0] == "# config=abc seed_coarse=7");

  const auto dir = testing::scratch_dir("trace");
  write_trace_csv(trace, 2, dir / "trace.csv", {{"config", "abc"}});
  const CsvTable t = read_csv(dir / "trace.csv");
  CHECK(t.meta.size() == 1);
  CHECK(t.meta[0].second == "abc");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][3] == 1.0 / 3.0);
}

TEST_CASE("error CSV round trip") {
  SplitMix64 rng(4);
  ParameterList params;
  Vector eps(25);
  for (int i = 0; i < 25; ++i) {
    Parameter mu(2);
    mu << rng.uniform(), 1e8 * rng.uniform();
    params.push_back(mu);
    eps[i] = std::pow(10.0, -12.0 * rng.uniform());
  }
  const auto dir = testing::scratch_dir("err");
  write_error_csv(params, eps, dir / "e.csv", {{"seed_test", "200"}});
  const auto text = slurp(dir / "e.csv");
  const auto ls = lines_of(text);
  CHECK(ls[0] == "# seed_test=200");
  CHECK(ls[1] == "index,param_1,param_2,epsilon");
  CHECK(ls.size() == 27);
  CHECK(text.back() == '\n');
  const ErrorTable back = read_error_csv(dir / "e.csv");
  REQUIRE(back.params.size() == 25);
  CHECK((back.epsilon - eps).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 25; ++i) CHECK(back.params[i] == params[i]);
}

TEST_CASE("CSV reader errors") {
  const auto dir = testing::scratch_dir("csvbad");
  {
    std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3,x\n";
  }
  try {
    read_csv(dir / "bad.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  {
    std::ofstream(dir / "short.csv") << "a,b\n1\n";
  }
  CHECK_THROWS_AS(read_csv(dir / "short.csv"), ParseError);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("atomic writes replace the file") {
  const auto dir = testing::scratch_dir("atomic");
  write_file_atomic(dir / "f.txt", "first\n");
  write_file_atomic(dir / "f.txt", "second\n");
  CHECK(slurp(dir / "f.txt") == "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  // Missing parents are created; a regular file in the way is an error.
  write_file_atomic(dir / "sub" / "g.txt", "x");
  CHECK(slurp(dir / "sub" / "g.txt") == "x");
  CHECK_THROWS_AS(write_file_atomic(dir / "f.txt" / "g.txt", "x"), IoError);
}

TEST_CASE("parameter sets") {
  ParameterDomain unit;
  unit.lower = Vector::Zero(1);
  unit.upper = Vector::Ones(1);
  unit.scales = {AxisScale::Linear};
  unit.names = {"x"};
  SamplingSpec eq{SamplingMode::Equidistant, 0, 0, {3}};
  const ParameterList e = generate_parameter_set(unit, eq);
  REQUIRE(e.size() == 3);
  CHECK(e[0][0] == 0.0);
  CHECK(e[1][0] == 0.5);
  CHECK(e[2][0] == 1.0);

  ParameterDomain wide;
  wide.lower = Vector::Ones(1);
  wide.upper = Vector::Constant(1, 1e8);
  wide.scales = {AxisScale::Linear};
  wide.names = {"h"};
  SamplingSpec lg{SamplingMode::LogEquidistant, 0, 0, {3}};
  const ParameterList l = generate_parameter_set(wide, lg);
  REQUIRE(l.size() == 3);
  CHECK(l[0][0] == doctest::Approx(1.0));
  CHECK(l[1][0] == doctest::Approx(1e4));
  CHECK(l[2][0] == doctest::Approx(1e8));
  CHECK_THROWS_AS(generate_parameter_set(unit, lg), ConfigError);

  const ParametricFOM cd = build_convdiff(19, 10);
  SamplingSpec grid{SamplingMode::Equidistant, 0, 0, {2, 3}};
  const ParameterList g = generate_parameter_set(cd.domain, grid);
  REQUIRE(g.size() == 6);
  // Last axis fastest.
  CHECK(g[0][0] == g[2][0]);
  CHECK(g[0][1] == cd.domain.lower[1]);
  CHECK(g[2][1] == cd.domain.upper[1]);
  CHECK(g[3][0] == cd.domain.upper[0]);

  SamplingSpec rnd{SamplingMode::Random, 112, 300, {}};
  const ParameterList r1 = generate_parameter_set(cd.domain, rnd);
  const ParameterList r2 = generate_parameter_set(cd.domain, rnd);
  CHECK(r1 == r2);
  rnd.seed = 113;
  CHECK(generate_parameter_set(cd.domain, rnd) != r1);
  for (const auto& mu : r1) CHECK(cd.domain.contains(mu));

  SamplingSpec bad{SamplingMode::Random, 1, 0, {}};
  CHECK_THROWS_AS(generate_parameter_set(cd.domain, bad), ConfigError);
}

TEST_CASE("log axes and permuted log sampling") {
  ParameterDomain th;
  th.lower = Vector::Ones(3);
  th.upper = Vector::Constant(3, 1e8);
  th.scales.assign(3, AxisScale::Log);
  th.names = {"a", "b", "c"};
  SamplingSpec rnd{SamplingMode::Random, 5, 2000, {}};
  const ParameterList r = generate_parameter_set(th, rnd);
  double below_1e4 = 0.0;
  for (const auto& mu : r) {
    CHECK(th.contains(mu));
    below_1e4 += mu[0] < 1e4 ? 1.0 : 0.0;
  }
  // Log-uniform puts half of the draws below the geometric midpoint.
  CHECK(below_1e4 / 2000.0 == doctest::Approx(0.5).epsilon(0.1));

  SamplingSpec pl{SamplingMode::PermutedLog, 9, 10, {}};
  const ParameterList p = generate_parameter_set(th, pl);
  REQUIRE(p.size() == 10);
  for (Index axis = 0; axis < 3; ++axis) {
    std::vector<double> vals;
    for (const auto& mu : p) vals.push_back(mu[axis]);
    std::sort(vals.begin(), vals.end());
    for (int i = 1; i <= 10; ++i) CHECK(vals[i - 1] == doctest::Approx(std::pow(10.0, i * 8.0 / 10.0)));
  }
  bool shuffled = false;
  for (std::size_t i = 0; i < p.size(); ++i) shuffled = shuffled || p[i][0] != p[i][1] || p[i][1] != p[i][2];
  CHECK(shuffled);
}

TEST_CASE("SplitMix64 reference stream") {
  // First outputs for seed 0 of the published reference implementation.
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFULL);
  CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(g.next() == 0x06C45D188009454FULL);
  SplitMix64 b(1);
  for (int i = 0; i < 10000; ++i) CHECK(b.below(7) < 7);
}

TEST_CASE("config parsing") {
  std::istringstream in(R"(# experiment
[run]
name = demo

[model]
name = convdiff
n = 99
K = 20

[greedy]
algorithm = adaptive-sampling
tol = 1e-4   # inline comment
n_add = 2
kernel = gaussian
loocv = false
shape = 1.5
tail = affine

[coarse]
mode = random
count = 7
seed = 18446744073709551615

[fine]
mode = equidistant
per_axis = 4, 5

[test]
mode = log_equidistant
per_axis = 3

[output]
directory = results
wall_time = false
)");
  const ExperimentConfig c = parse_config(in, "demo.ini");
  CHECK(c.name == "demo");
  CHECK(c.model == "convdiff");
  CHECK(c.n == 99);
  CHECK(c.K == 20);
  CHECK(c.algorithm == Algorithm::AdaptiveSampling);
  CHECK(c.greedy.tol == 1e-4);
  CHECK(c.greedy.n_add_mode == NAddMode::Fixed);
  CHECK(c.greedy.n_add_fixed == 2);
  CHECK(c.greedy.kernel == rbf::KernelKind::Gaussian);
  CHECK(!c.greedy.loocv);
  CHECK(c.greedy.shape == 1.5);
  CHECK(c.greedy.tail == rbf::PolynomialTail::Affine);
  CHECK(c.coarse.count == 7);
  CHECK(c.coarse.seed == 18446744073709551615ULL);
  CHECK(c.fine.mode == SamplingMode::Equidistant);
  CHECK(c.fine.per_axis == std::vector<Index>{4, 5});
  CHECK(c.test.mode == SamplingMode::LogEquidistant);
  CHECK(c.output_dir == "results");
  CHECK(!c.record_wall_time);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config errors name file and line") {
  CHECK(config_error("[run]\nname = x\n[bogus]\n").rfind("exp.ini:3:", 0) == 0);
  CHECK(config_error("[greedy]\ntol = abc\n").rfind("exp.ini:2:", 0) == 0);
  CHECK(config_error("[greedy]\n\nfoo = 1\n").rfind("exp.ini:3:", 0) == 0);
  CHECK(config_error("name = x\n").rfind("exp.ini:1:", 0) == 0);
  CHECK(config_error("[model]\nname\n").rfind("exp.ini:2:", 0) == 0);
  CHECK(config_error("[greedy]\nkernel = cubic\n").rfind("exp.ini:2:", 0) == 0);
  CHECK(config_error("[coarse]\nseed = -1\n").rfind("exp.ini:2:", 0) == 0);
  CHECK(config_error("[run\n").rfind("exp.ini:1:", 0) == 0);
  CHECK_THROWS_AS(load_config("/nonexistent/exp.ini"), ConfigError);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.greedy.tol = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ExperimentConfig t;
  t.model = "thermal";
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.model_path = testing::scratch_dir("no_matrices");
  try {
    t.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("E.mtx") != std::string::npos);
  }
  ExperimentConfig m;
  m.model = "heat";
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("config hash is FNV-1a over the canonical text") {
  ExperimentConfig a;
  CHECK(a.hash() == fnv1a(a.canonical()));
  CHECK(a.hash_hex().size() == 16);
  ExperimentConfig b = a;
  CHECK(b.hash() == a.hash());
  b.greedy.tol = 2e-5;
  CHECK(b.hash() != a.hash());
  ExperimentConfig c = a;
  c.test.seed = 999;
  CHECK(c.hash() != a.hash());
  CHECK(a.canonical().find("coarse.seed=") != std::string::npos);
}

TEST_CASE("shipped configs load and validate") {
  for (const char* name : {"burgers_adaptive.ini", "burgers_fixed.ini", "convdiff_adaptive.ini", "convdiff_fixed.ini",
                           "convdiff_fixed225.ini"}) {
    CAPTURE(name);
    const ExperimentConfig c = load_config(std::filesystem::path(RBADAPT_CONFIGS) / name);
    CHECK_NOTHROW(c.validate());
  }
}
