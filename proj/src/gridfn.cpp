#include "dts/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dts::gridfn {

PNorm::PNorm(double p_) : p(p_) {
  if (!(p_ >= 1.0)) throw std::invalid_argument("invalid exponent: p must lie in [1, inf]");
}

double PNorm::conj() const {
  if (is_inf()) return 1.0;
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

// ---------------------------------------------------------------- SampledFunction

SampledFunction::SampledFunction(std::vector<cplx> samples) : v_(std::move(samples)) {
  if (v_.size() < 3) throw std::invalid_argument("SampledFunction needs N >= 2");
}

SampledFunction SampledFunction::from(const std::function<cplx(double)>& f, int N) {
  if (N < 2) throw std::invalid_argument("SampledFunction needs N >= 2");
  std::vector<cplx> v(N + 1);
  for (int i = 0; i <= N; ++i) v[i] = f(static_cast<double>(i) / N);
  return SampledFunction(std::move(v));
}

cplx SampledFunction::operator()(double x) const {
  const int n = N();
  double s = std::clamp(x, 0.0, 1.0) * n;
  double r = std::round(s);
  if (std::abs(s - r) < 1e-9) return v_[static_cast<int>(r)];
  int i = std::min(static_cast<int>(s), n - 1);
  double f = s - i;
  return v_[i] * (1.0 - f) + v_[i + 1] * f;
}

SampledFunction SampledFunction::resampled(int N) const {
  if (N == this->N()) return *this;
  return from([this](double x) { return (*this)(x); }, N);
}

SampledFunction SampledFunction::operator+(const SampledFunction& o) const {
  if (o.N() != N()) throw std::invalid_argument("grid mismatch");
  auto r = *this;
  for (std::size_t i = 0; i < v_.size(); ++i) r.v_[i] += o.v_[i];
  return r;
}

SampledFunction SampledFunction::operator-(const SampledFunction& o) const {
  if (o.N() != N()) throw std::invalid_argument("grid mismatch");
  auto r = *this;
  for (std::size_t i = 0; i < v_.size(); ++i) r.v_[i] -= o.v_[i];
  return r;
}

SampledFunction SampledFunction::operator*(cplx s) const {
  auto r = *this;
  for (auto& z : r.v_) z *= s;
  return r;
}

bool SampledFunction::is_zero() const {
  return std::all_of(v_.begin(), v_.end(), [](const cplx& z) { return z == cplx{}; });
}

// ---------------------------------------------------------------- TriangularKernel

TriangularKernel::TriangularKernel(int N) : N_(N) {
  if (N < 1) throw std::invalid_argument("TriangularKernel needs N >= 1");
  d_.assign(idx(N, N) + 1, Mat2::Zero());
}

TriangularKernel TriangularKernel::from(const std::function<Mat2(double, double)>& f, int N) {
  TriangularKernel K(N);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) K(i, j) = f(static_cast<double>(i) / N, static_cast<double>(j) / N);
  return K;
}

TriangularKernel TriangularKernel::scalar(const std::function<cplx(double, double)>& f, int N, int r,
                                          int c) {
  TriangularKernel K(N);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) K(i, j)(r, c) = f(static_cast<double>(i) / N, static_cast<double>(j) / N);
  return K;
}

const Mat2& TriangularKernel::at(int i, int j) const {
  if (i < 0 || i > N_ || j < 0 || j > i)
    throw std::out_of_range("kernel lookup outside Omega: (" + std::to_string(i) + "," + std::to_string(j) + ")");
  return d_[idx(i, j)];
}

Mat2& TriangularKernel::at(int i, int j) {
  if (i < 0 || i > N_ || j < 0 || j > i)
    throw std::out_of_range("kernel lookup outside Omega: (" + std::to_string(i) + "," + std::to_string(j) + ")");
  return d_[idx(i, j)];
}

Mat2 TriangularKernel::eval(double x, double t) const {
  if (t > x + 1e-12 || x < -1e-12 || x > 1 + 1e-12 || t < -1e-12)
    throw std::out_of_range("kernel evaluation outside Omega");
  x = std::clamp(x, 0.0, 1.0);
  t = std::clamp(t, 0.0, x);
  double s = x * N_, u = t * N_;
  int i = std::min(static_cast<int>(s), N_ - 1);
  int j = std::min(static_cast<int>(u), i);
  double fx = s - i, ft = u - j;
  const auto& K = *this;
  if (j < i) {
    return (1 - fx) * (1 - ft) * K(i, j) + fx * (1 - ft) * K(i + 1, j) + (1 - fx) * ft * K(i, j + 1) +
           fx * ft * K(i + 1, j + 1);
  }
  // lower half of the diagonal cell: (i,i), (i+1,i), (i+1,i+1)
  ft = std::min(ft, fx);
  return K(i, i) + fx * (K(i + 1, i) - K(i, i)) + ft * (K(i + 1, i + 1) - K(i + 1, i));
}

TriangularKernel TriangularKernel::operator+(const TriangularKernel& o) const {
  if (o.N_ != N_) throw std::invalid_argument("grid mismatch");
  auto r = *this;
  for (std::size_t k = 0; k < d_.size(); ++k) r.d_[k] += o.d_[k];
  return r;
}

TriangularKernel TriangularKernel::operator-(const TriangularKernel& o) const {
  if (o.N_ != N_) throw std::invalid_argument("grid mismatch");
  auto r = *this;
  for (std::size_t k = 0; k < d_.size(); ++k) r.d_[k] -= o.d_[k];
  return r;
}

TriangularKernel TriangularKernel::operator*(cplx s) const {
  auto r = *this;
  for (auto& m : r.d_) m *= s;
  return r;
}

SampledFunction TriangularKernel::entry_row(int i, int r, int c) const {
  std::vector<cplx> v(N_ + 1);
  for (int j = 0; j <= i; ++j) v[j] = (*this)(i, j)(r, c);
  return SampledFunction(std::move(v));
}

// ---------------------------------------------------------------- norms

double trapz(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
  return s * h;
}

cplx trapz(const std::vector<cplx>& y, double h) {
  if (y.size() < 2) return 0.0;
  cplx s = 0.5 * (y.front() + y.back());
  for (std::size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
  return s * h;
}

double lp_norm(const SampledFunction& f, PNorm p) {
  if (p.is_inf()) {
    double m = 0;
    for (const auto& z : f.samples()) m = std::max(m, std::abs(z));
    return m;
  }
  std::vector<double> y(f.samples().size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = std::pow(std::abs(f.samples()[k]), p.p);
  return std::pow(trapz(y, f.h()), 1.0 / p.p);
}

double lp_norm(const SampledPair& f, PNorm p) {
  double a = lp_norm(f[0], p), b = lp_norm(f[1], p);
  if (p.is_inf()) return std::max(a, b);
  return std::pow(std::pow(a, p.p) + std::pow(b, p.p), 1.0 / p.p);
}

double sup_norm(const SampledPair& f) { return lp_norm(f, PNorm::infinity()); }

namespace {
double lp2(cplx u, cplx v, PNorm p) {
  if (p.is_inf()) return std::max(std::abs(u), std::abs(v));
  if (p.p == 1.0) return std::abs(u) + std::abs(v);
  if (p.p == 2.0) return std::hypot(std::abs(u), std::abs(v));
  return std::pow(std::pow(std::abs(u), p.p) + std::pow(std::abs(v), p.p), 1.0 / p.p);
}
}  // namespace

double mat_norm_1_to_p(const Mat2& A, PNorm p) {
  return std::max(lp2(A(0, 0), A(1, 0), p), lp2(A(0, 1), A(1, 1), p));
}

double mat_norm_pconj_to_inf(const Mat2& A, PNorm p) {
  return std::max(lp2(A(0, 0), A(0, 1), p), lp2(A(1, 0), A(1, 1), p));
}

double x_norm(const TriangularKernel& K, XFamily family, PNorm p) {
  const int N = K.N();
  const double h = K.h();
  if (p.is_inf()) {
    double m = 0;
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= i; ++j) m = std::max(m, mat_norm_1_to_p(K(i, j), p));
    return m;
  }
  double best = 0;
  std::vector<double> y;
  if (family == XFamily::one) {
    for (int j = 0; j <= N; ++j) {
      y.clear();
      for (int i = j; i <= N; ++i) y.push_back(std::pow(mat_norm_1_to_p(K(i, j), p), p.p));
      best = std::max(best, trapz(y, h));
    }
  } else {
    for (int i = 0; i <= N; ++i) {
      y.clear();
      for (int j = 0; j <= i; ++j) y.push_back(std::pow(mat_norm_pconj_to_inf(K(i, j), p), p.p));
      best = std::max(best, trapz(y, h));
    }
  }
  return std::pow(best, 1.0 / p.p);
}

TriangularKernel compose_kernels(const TriangularKernel& N1, const TriangularKernel& N2) {
  if (N1.N() != N2.N()) throw std::invalid_argument("compose_kernels: grid mismatch");
  const int N = N1.N();
  const double h = N1.h();
  TriangularKernel R(N);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j < i; ++j) {
      Mat2 s = 0.5 * (N1(i, j) * N2(j, j) + N1(i, i) * N2(i, j));
      for (int m = j + 1; m < i; ++m) s.noalias() += N1(i, m) * N2(m, j);
      R(i, j) = h * s;
    }
  return R;
}

SampledPair volterra_apply(const TriangularKernel& K, const SampledPair& f) {
  const int N = K.N();
  if (f[0].N() != N || f[1].N() != N) throw std::invalid_argument("volterra_apply: grid mismatch");
  const double h = K.h();
  std::vector<cplx> u(N + 1), v(N + 1);
  for (int i = 1; i <= N; ++i) {
    Vec2 s = Vec2::Zero();
    for (int j = 0; j <= i; ++j) {
      double w = (j == 0 || j == i) ? 0.5 * h : h;
      s += w * (K(i, j) * Vec2(f[0][j], f[1][j]));
    }
    u[i] = s(0);
    v[i] = s(1);
  }
  return {SampledFunction(std::move(u)), SampledFunction(std::move(v))};
}

namespace {

// Product induced by volterra_apply: matches trapezoid composition away from the
// diagonal and the t = 0 column.
TriangularKernel operator_product(const TriangularKernel& A, const TriangularKernel& B) {
  const int N = A.N();
  const double h = A.h();
  TriangularKernel R(N);
  for (int i = 1; i <= N; ++i) {
    Mat2 s = 0.5 * A(i, i) * B(i, 0);
    for (int m = 1; m < i; ++m) s.noalias() += A(i, m) * B(m, 0);
    R(i, 0) = h * s;
    for (int j = 1; j < i; ++j) {
      Mat2 t = 0.5 * (A(i, j) * B(j, j) + A(i, i) * B(i, j));
      for (int m = j + 1; m < i; ++m) t.noalias() += A(i, m) * B(m, j);
      R(i, j) = h * t;
    }
    R(i, i) = 0.5 * h * A(i, i) * B(i, i);
  }
  return R;
}

}  // namespace

double resolvent_residual(const TriangularKernel& N, const TriangularKernel& S) {
  return x_norm(N + S + operator_product(N, S), XFamily::infinity, PNorm(1.0));
}

Resolvent resolvent_kernel(const TriangularKernel& N, int max_iter, double tol) {
  TriangularKernel S = N * -1.0;
  double res = 0;
  for (int k = 1; k <= max_iter; ++k) {
    TriangularKernel P = operator_product(N, S);
    res = x_norm(N + S + P, XFamily::infinity, PNorm(1.0));
    if (res < tol) return {S, res, k};
    S = (N + P) * -1.0;
  }
  throw IterationLimit("resolvent_kernel: no convergence, residual " + std::to_string(res), res);
}

// ---------------------------------------------------------------- ExpQuadrature

ExpQuadrature::ExpQuadrature(int N, cplx omega) : h_(1.0 / N), E_(N + 1) {
  const cplx z = I * omega * h_;
  if (std::abs(z) < 0.5) {
    // series for int_0^1 e^{zs} ds and int_0^1 s e^{zs} ds
    cplx s0 = 0, s1 = 0, term = 1.0;
    for (int n = 0; n < 30; ++n) {
      s0 += term / double(n + 1);
      s1 += term / double(n + 2);
      term *= z / double(n + 1);
    }
    B_ = s1;
    A_ = s0 - s1;
  } else {
    cplx ez = std::exp(z);
    cplx s0 = (ez - 1.0) / z;
    B_ = ez / z - (ez - 1.0) / (z * z);
    A_ = s0 - B_;
  }
  for (int m = 0; m <= N; ++m) E_[m] = std::exp(I * omega * (m * h_));
}

cplx ExpQuadrature::integrate(const cplx* f, int n) const {
  cplx s = 0;
  for (int m = 0; m < n; ++m) s += E_[m] * (f[m] * A_ + f[m + 1] * B_);
  return s * h_;
}

}  // namespace dts::gridfn
