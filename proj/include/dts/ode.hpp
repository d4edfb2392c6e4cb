#pragma once

#include <vector>

#include "dts/boundary.hpp"
#include "dts/gridfn.hpp"

namespace dts::ode {

using gridfn::SampledFunction;
using gridfn::SampledPair;

// -i B^{-1} y' + Q y = lambda y,  B = diag(b1, b2),  Q = [[0, Q12], [Q21, 0]].
struct DiracSystem {
  double b1 = -1, b2 = 1;
  SampledFunction Q12, Q21;

  DiracSystem(double b1, double b2, SampledFunction Q12, SampledFunction Q21);
  static DiracSystem free(double b1, double b2, int N);

  double b(int k) const { return k == 1 ? b1 : b2; }
  double a(int k) const { return 1.0 / b(k); }
  // gamma_k = b_j / b_k,  alpha_k = b_j / (b_j - b_k),  j = 3 - k
  double gamma(int k) const { return b(3 - k) / b(k); }
  double alpha(int k) const { return b(3 - k) / (b(3 - k) - b(k)); }
  const SampledFunction& Q(int j, int k) const;
  int N() const { return Q12.N(); }
  bool Q12_zero() const { return Q12.is_zero(); }
  // L^p norm of (Q12, Q21)
  double norm(gridfn::PNorm p) const { return gridfn::lp_norm(SampledPair{Q12, Q21}, p); }
  DiracSystem resampled(int N) const;
};

DiracSystem operator-(const DiracSystem& a, const DiracSystem& b);

struct FundamentalMatrix {
  cplx lambda;
  std::vector<Mat2> values;  // at x_i = i/N
  int N() const { return static_cast<int>(values.size()) - 1; }
  const Mat2& at(int i) const { return values.at(i); }
  const Mat2& end() const { return values.back(); }
  // columns as vector functions
  SampledPair column(int k) const;
};

FundamentalMatrix fundamental_matrix(const DiracSystem& sys, cplx lambda, int N);
// Phi(1, lambda) only.
Mat2 fundamental_end(const DiracSystem& sys, cplx lambda, int N);

// Solution with e(0) = (1, sign)^T, sign = +1 or -1.
SampledPair e_pm(const DiracSystem& sys, cplx lambda, int sign, int N);

// det [U_j(Phi_k)] = det(A[:, 0:2] + A[:, 2:4] Phi(1)).
cplx char_det_from_end(const boundary::BoundaryConditions& bc, const Mat2& Phi1);
cplx char_det_direct(const DiracSystem& sys, const boundary::BoundaryConditions& bc, cplx lambda, int N);

}  // namespace dts::ode
