#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace dts {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace dts

namespace dts::gridfn {

// Exponent p in [1, inf]. Construction rejects p < 1.
struct PNorm {
  double p = 2.0;
  PNorm() = default;
  PNorm(double p_);
  static PNorm infinity() { return PNorm(kInf); }
  bool is_inf() const { return p == kInf; }
  // 1/p + 1/p' = 1
  double conj() const;
};

// Complex samples on the uniform grid x_i = i/N, i = 0..N.
class SampledFunction {
 public:
  SampledFunction() = default;
  explicit SampledFunction(std::vector<cplx> samples);
  static SampledFunction from(const std::function<cplx(double)>& f, int N);
  static SampledFunction zero(int N) { return SampledFunction(std::vector<cplx>(N + 1)); }

  int N() const { return static_cast<int>(v_.size()) - 1; }
  double h() const { return 1.0 / N(); }
  double node(int i) const { return static_cast<double>(i) / N(); }
  const cplx& operator[](int i) const { return v_[i]; }
  cplx& operator[](int i) { return v_[i]; }
  const std::vector<cplx>& samples() const { return v_; }

  // Linear interpolation; exact at nodes. x is clamped to [0,1].
  cplx operator()(double x) const;
  SampledFunction resampled(int N) const;

  SampledFunction operator+(const SampledFunction& o) const;
  SampledFunction operator-(const SampledFunction& o) const;
  SampledFunction operator*(cplx s) const;
  bool is_zero() const;

 private:
  std::vector<cplx> v_;
};

// Vector-valued (C^2) function on the grid.
using SampledPair = std::array<SampledFunction, 2>;

// 2x2 complex matrices on the triangular lattice {(x_i, t_j): 0 <= j <= i <= N}.
class TriangularKernel {
 public:
  TriangularKernel() = default;
  explicit TriangularKernel(int N);
  static TriangularKernel from(const std::function<Mat2(double, double)>& f, int N);
  // Scalar function placed in entry (r, c), zeros elsewhere.
  static TriangularKernel scalar(const std::function<cplx(double, double)>& f, int N, int r = 0,
                                 int c = 0);

  int N() const { return N_; }
  double h() const { return 1.0 / N_; }
  // Throws std::out_of_range outside the triangle.
  const Mat2& at(int i, int j) const;
  Mat2& at(int i, int j);
  // Unchecked access for inner loops.
  const Mat2& operator()(int i, int j) const { return d_[idx(i, j)]; }
  Mat2& operator()(int i, int j) { return d_[idx(i, j)]; }

  // Piecewise-linear interpolation inside Omega. Throws if t > x (beyond rounding).
  Mat2 eval(double x, double t) const;

  TriangularKernel operator+(const TriangularKernel& o) const;
  TriangularKernel operator-(const TriangularKernel& o) const;
  TriangularKernel operator*(cplx s) const;
  SampledFunction entry_row(int i, int r, int c) const;  // t -> K_rc(x_i, t), length i+1 padded with zeros to N+1

 private:
  static std::size_t idx(int i, int j) { return static_cast<std::size_t>(i) * (i + 1) / 2 + j; }
  int N_ = 0;
  std::vector<Mat2> d_;
};

enum class XFamily { one, infinity };

double trapz(const std::vector<double>& y, double h);
cplx trapz(const std::vector<cplx>& y, double h);

double lp_norm(const SampledFunction& f, PNorm p);
// (||f1||_p^p + ||f2||_p^p)^{1/p}; max for p = inf.
double lp_norm(const SampledPair& f, PNorm p);
double sup_norm(const SampledPair& f);

// |A|_{1->p}: largest column l^p norm.  |A|_{p'->inf}: largest row l^p norm.
double mat_norm_1_to_p(const Mat2& A, PNorm p);
double mat_norm_pconj_to_inf(const Mat2& A, PNorm p);

double x_norm(const TriangularKernel& K, XFamily family, PNorm p);

TriangularKernel compose_kernels(const TriangularKernel& N1, const TriangularKernel& N2);

// (N f)(x_i) = sum_j w_ij N(x_i,t_j) f(t_j), trapezoid weights on [0, x_i].
SampledPair volterra_apply(const TriangularKernel& K, const SampledPair& f);

struct IterationLimit : std::runtime_error {
  double residual;
  IterationLimit(const std::string& what, double r) : std::runtime_error(what), residual(r) {}
};

struct Resolvent {
  TriangularKernel S;
  double residual = 0.0;
  int iterations = 0;
};

// S with N + S + N(*)S = 0, where (*) is the product induced by volterra_apply.
Resolvent resolvent_kernel(const TriangularKernel& N, int max_iter = 200, double tol = 1e-10);

// Residual N + S + N(*)S measured in X_{inf,1}.
double resolvent_residual(const TriangularKernel& N, const TriangularKernel& S);

// Exact integral of the piecewise-linear interpolant of f against e^{i w t} on [0, n h].
// One instance per (N, w); reuse across rows.
class ExpQuadrature {
 public:
  ExpQuadrature(int N, cplx omega);
  // f has at least n+1 values at t_m = m h.
  cplx integrate(const cplx* f, int n) const;
  cplx integrate(const SampledFunction& f) const { return integrate(f.samples().data(), f.N()); }

 private:
  double h_;
  cplx A_, B_;
  std::vector<cplx> E_;
};

}  // namespace dts::gridfn
