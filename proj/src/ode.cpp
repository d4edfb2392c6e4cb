#include "dts/ode.hpp"

#include <cmath>
#include <stdexcept>

namespace dts::ode {

DiracSystem::DiracSystem(double b1_, double b2_, SampledFunction q12, SampledFunction q21)
    : b1(b1_), b2(b2_), Q12(std::move(q12)), Q21(std::move(q21)) {
  if (!(b1 < 0 && b2 > 0)) throw std::invalid_argument("DiracSystem: need b1 < 0 < b2");
  if (Q12.N() != Q21.N()) Q12 = Q12.resampled(Q21.N());
}

DiracSystem DiracSystem::free(double b1, double b2, int N) {
  return DiracSystem(b1, b2, SampledFunction::zero(N), SampledFunction::zero(N));
}

const SampledFunction& DiracSystem::Q(int j, int k) const {
  if (j == 1 && k == 2) return Q12;
  if (j == 2 && k == 1) return Q21;
  throw std::invalid_argument("Q has only off-diagonal entries");
}

DiracSystem DiracSystem::resampled(int N) const {
  return DiracSystem(b1, b2, Q12.resampled(N), Q21.resampled(N));
}

DiracSystem operator-(const DiracSystem& a, const DiracSystem& b) {
  const int N = std::max(a.N(), b.N());
  return DiracSystem(a.b1, a.b2, a.Q12.resampled(N) - b.Q12.resampled(N), a.Q21.resampled(N) - b.Q21.resampled(N));
}

SampledPair FundamentalMatrix::column(int k) const {
  std::vector<cplx> u(values.size()), v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    u[i] = values[i](0, k);
    v[i] = values[i](1, k);
  }
  return {SampledFunction(std::move(u)), SampledFunction(std::move(v))};
}

namespace {

// Interaction picture: Phi = diag(e^{i b1 lambda x}, e^{i b2 lambda x}) W,
// W' = -i [[0, b1 Q12 e^{i k x}], [b2 Q21 e^{-i k x}, 0]] W,  k = (b2 - b1) lambda.
template <class Sink>
void integrate(const DiracSystem& sys, cplx lambda, int N, Sink&& sink) {
  if (N < 2) throw std::invalid_argument("fundamental_matrix: need N >= 2");
  const double h = 1.0 / N;
  const cplx kap = (sys.b2 - sys.b1) * lambda;
  const bool q12 = !sys.Q12.is_zero(), q21 = !sys.Q21.is_zero();
  // off-diagonal coefficients at half-grid points x = s h / 2
  std::vector<cplx> u(2 * N + 1), l(2 * N + 1);
  for (int s = 0; s <= 2 * N; ++s) {
    double x = 0.5 * h * s;
    cplx e = std::exp(I * kap * x);
    u[s] = q12 ? -I * sys.b1 * sys.Q12(x) * e : cplx{};
    l[s] = q21 ? -I * sys.b2 * sys.Q21(x) / e : cplx{};
  }
  auto F = [&](int s, const Mat2& W) {
    Mat2 r;
    r.row(0) = u[s] * W.row(1);
    r.row(1) = l[s] * W.row(0);
    return r;
  };
  Mat2 W = Mat2::Identity();
  auto emit = [&](int i) {
    double x = i * h;
    Mat2 P = W;
    P.row(0) *= std::exp(I * sys.b1 * lambda * x);
    P.row(1) *= std::exp(I * sys.b2 * lambda * x);
    sink(i, P);
  };
  emit(0);
  for (int n = 0; n < N; ++n) {
    Mat2 k1 = F(2 * n, W);
    Mat2 k2 = F(2 * n + 1, W + 0.5 * h * k1);
    Mat2 k3 = F(2 * n + 1, W + 0.5 * h * k2);
    Mat2 k4 = F(2 * n + 2, W + h * k3);
    W += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    emit(n + 1);
  }
}

}  // namespace

FundamentalMatrix fundamental_matrix(const DiracSystem& sys, cplx lambda, int N) {
  FundamentalMatrix F{lambda, std::vector<Mat2>(N + 1)};
  integrate(sys, lambda, N, [&](int i, const Mat2& P) { F.values[i] = P; });
  return F;
}

Mat2 fundamental_end(const DiracSystem& sys, cplx lambda, int N) {
  Mat2 out;
  integrate(sys, lambda, N, [&](int i, const Mat2& P) {
    if (i == N) out = P;
  });
  return out;
}

SampledPair e_pm(const DiracSystem& sys, cplx lambda, int sign, int N) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("e_pm: sign must be +1 or -1");
  std::vector<cplx> u(N + 1), v(N + 1);
  integrate(sys, lambda, N, [&](int i, const Mat2& P) {
    Vec2 e = P * Vec2(1.0, double(sign));
    u[i] = e(0);
    v[i] = e(1);
  });
  return {SampledFunction(std::move(u)), SampledFunction(std::move(v))};
}

cplx char_det_from_end(const boundary::BoundaryConditions& bc, const Mat2& Phi1) {
  Mat2 C = bc.A.leftCols<2>() + bc.A.rightCols<2>() * Phi1;
  return C.determinant();
}

cplx char_det_direct(const DiracSystem& sys, const boundary::BoundaryConditions& bc, cplx lambda, int N) {
  return char_det_from_end(bc, fundamental_end(sys, lambda, N));
}

}  // namespace dts::ode
