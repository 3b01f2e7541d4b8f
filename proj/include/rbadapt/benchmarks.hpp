#pragma once

#include <rbadapt/fom.hpp>

#include <filesystem>
#include <string>

namespace rbadapt {

enum class ConvectionStencil { Upwind, Central };

// 1-D viscous Burgers on [0,1] x [0,2], viscosity q in [0.001, 1], unit source,
// v(0,t) = 0 and v_w(1,t) = 0, output v(1,t). Diffusion implicit, convection explicit.
// n counts the unknown nodes w_i = i/n, i = 1..n. The explicit convection step limits
// dt: at n = 500 and q = 0.001 the central stencil diverges for K <= 500.
ParametricFOM build_burgers(Index n = 500, Index K = 1000, ConvectionStencil stencil = ConvectionStencil::Central);

// 1-D convection-diffusion v_t = q1 v_ww + q2 v_w - q2 on [0,1] x [0,1],
// (q1, q2) in [0.001, 1] x [0.5, 5], homogeneous Dirichlet, step initial state,
// output is the mean over nodes inside [0.495, 0.505]. Fully implicit.
ParametricFOM build_convdiff(Index n = 800, Index K = 100);

struct ThermalFiles {
  std::string E = "E.mtx";
  std::string A0 = "A.mtx";
  std::string A1 = "A1.mtx";
  std::string A2 = "A2.mtx";
  std::string A3 = "A3.mtx";
  std::string B = "B.mtx";
  std::string C = "C.mtx";
};

struct ThermalMatrices {
  SparseMatrix E, A0, A1, A2, A3, B, C;
};

// Reads the thermal model matrices and checks their shapes.
ThermalMatrices read_thermal_matrices(const std::filesystem::path& directory, const ThermalFiles& files = {});

// A(h) = A0 - sum_i h_i A_i.
AffineOperator thermal_stiffness(const ThermalMatrices& m);

// E x' = A(h) x + B u with film coefficients h in [1, 1e8]^3 (log axes), discretized
// by implicit Euler: (E - dt A(h)) x^{k+1} = E x^k + dt B u^k. u = 1, x0 = 0,
// output is the first row of C.
ParametricFOM build_thermal(const ThermalMatrices& m, Index K = 100, double T = 100.0);

ParametricFOM load_thermal(const std::filesystem::path& directory, const ThermalFiles& files = {}, Index K = 100,
                           double T = 100.0);

struct ModelInfo {
  std::string name;
  std::string description;
  ParameterDomain domain;
  Index default_n;
  Index default_K;
};

std::vector<ModelInfo> available_models();

}  // namespace rbadapt
