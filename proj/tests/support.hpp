#pragma once

#include <rbadapt/benchmarks.hpp>
#include <rbadapt/sampling.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

namespace testing {

using namespace rbadapt;

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

// Fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("rbadapt_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

inline SparseMatrix sparse_from(const Matrix& m) { return m.sparseView(); }

// Small thermal-type model: E SPD, A0 a negative definite stencil and A_i >= 0
// scaled so that h_i A_i stays O(1) up to h = 1e8.
inline ThermalMatrices synthetic_thermal(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto rnd = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = rng.uniform() - 0.5;
    return m;
  };
  ThermalMatrices t;
  Matrix G = rnd(n, n);
  t.E = sparse_from(Matrix::Identity(n, n) + 0.1 * G * G.transpose() / static_cast<double>(n));
  // Tridiagonal Laplacian-like stiffness.
  Matrix L = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    L(i, i) = -2.0;
    if (i > 0) L(i, i - 1) = 1.0;
    if (i + 1 < n) L(i, i + 1) = 1.0;
  }
  t.A0 = sparse_from(L);
  auto boundary = [&](Index i) {
    Matrix m = Matrix::Zero(n, n);
    m(i, i) = 1e-8;
    return sparse_from(m);
  };
  t.A1 = boundary(0);
  t.A2 = boundary(n - 1);
  t.A3 = boundary(n / 2);
  Matrix B = Matrix::Zero(n, 1);
  B(n / 3, 0) = 1.0;
  t.B = sparse_from(B);
  Matrix C = Matrix::Zero(2, n);
  C(0, n / 4) = 1.0;
  C(1, n - 2) = 1.0;
  t.C = sparse_from(C);
  return t;
}

}  // namespace testing
