#pragma once

#include <array>
#include <string>

#include "dts/boundary.hpp"
#include "dts/gridfn.hpp"
#include "dts/ode.hpp"

namespace dts::transformop {

using gridfn::SampledFunction;
using gridfn::SampledPair;
using gridfn::TriangularKernel;
using ode::DiracSystem;

struct RSolution {
  TriangularKernel R;
  double residual = 0;
  int iterations = 0;
};

// Kernel R of the transformation operators (row-marching fixed point).
RSolution solve_R(const DiracSystem& sys, int N, int max_iter = 200, double tol = 1e-10);
// Substitution residual of both R equations, X_{inf,1} norm.
double R_residual(const DiracSystem& sys, const TriangularKernel& R);

// P^+/- = diag(P1, P2), argument x - t.
struct PSolution {
  SampledPair plus, minus;
  double residual_plus = 0, residual_minus = 0;
};
PSolution solve_P(const TriangularKernel& R, const DiracSystem& sys, int N, double tol = 1e-10);
// max_x of the residual of the P system for the given sign.
double P_residual(const TriangularKernel& R, const DiracSystem& sys, const SampledPair& P, int sign);

std::array<TriangularKernel, 2> assemble_K(const TriangularKernel& R, const SampledPair& Pplus,
                                           const SampledPair& Pminus, int N);
// max_x |K(x,0) B^{-1} (1, sign)^T|
double boundary_residual(const TriangularKernel& K, const DiracSystem& sys, int sign);

struct KernelSet {
  TriangularKernel R;
  SampledPair Pplus, Pminus;
  TriangularKernel Kplus, Kminus;
  double residual_R = 0, residual_Pplus = 0, residual_Pminus = 0;
  double boundary_plus = 0, boundary_minus = 0;
  const TriangularKernel& K(int sign) const { return sign > 0 ? Kplus : Kminus; }
};
KernelSet build_kernels(const DiracSystem& sys, int N, int max_iter = 200, double tol = 1e-10);

// e_(x) = e0(x) + int_0^x K(x,t) e0(t) dt, e0 = (e^{i b1 l t}, sign e^{i b2 l t}).
SampledPair reconstruct_e(const TriangularKernel& K, int sign, double b1, double b2, cplx lambda);

// by_k[k-1](x,t)(j-1, l-1) = K_{jl,k}(x,t) = (K+_{jl} + (-1)^{l+k} K-_{jl}) / 2
struct ComboKernels {
  std::array<TriangularKernel, 2> by_k;
  const cplx& operator()(int j, int l, int k, int i, int m) const { return by_k[k - 1](i, m)(j - 1, l - 1); }
};
ComboKernels combos(const TriangularKernel& Kplus, const TriangularKernel& Kminus);

// phi_jk(x_i) from the combination kernels.
std::vector<Mat2> phi_from_combos(const ComboKernels& C, double b1, double b2, cplx lambda);

// Delta_0 + int g1 e^{i b1 l t} + int g2 e^{i b2 l t} with g_l built from the trace rows K_{jl,k}(1, .)
class DetEvaluator {
 public:
  DetEvaluator(const boundary::BoundaryConditions& bc, const ComboKernels& C, double b1, double b2);
  cplx operator()(cplx lambda) const;
  const SampledFunction& g(int l) const { return g_[l - 1]; }

 private:
  boundary::Minors J_;
  double b1_, b2_;
  std::array<SampledFunction, 2> g_;
};
cplx det_via_kernels(const boundary::BoundaryConditions& bc, const ComboKernels& C, double b1, double b2,
                     cplx lambda);

struct KernelDeviation {
  double dev_Xinf = 0, dev_X1 = 0, dev_Q = 0;
};
KernelDeviation kernel_deviation_norms(const DiracSystem& Q, const DiracSystem& Qt, gridfn::PNorm p, int N);
KernelDeviation kernel_deviation_norms(const KernelSet& K, const KernelSet& Kt, const DiracSystem& Q,
                                       const DiracSystem& Qt, gridfn::PNorm p);

// Header: uint64 N, uint64 count of complex values; then row-major (x_i, t_j <= x_i, r, c)
// complex doubles (re, im), little-endian.
void dump_kernel(const std::string& path, const TriangularKernel& K);
TriangularKernel load_kernel(const std::string& path);

}  // namespace dts::transformop
