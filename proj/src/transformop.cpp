#include "dts/transformop.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace dts::transformop {

using gridfn::ExpQuadrature;
using gridfn::PNorm;
using gridfn::XFamily;

namespace {

// Everything the R equations need at one node (i, c): for each k,
//   R_kk = S_kk + w_kk R_jk,   R_jk = S_jk + w_jk R_kk.
class RStencil {
 public:
  RStencil(const DiracSystem& sys, int N) : sys_(sys), N_(N), h_(1.0 / N) {
    q12_.resize(N + 1);
    q21_.resize(N + 1);
    for (int m = 0; m <= N; ++m) {
      q12_[m] = sys.Q12(m * h_);
      q21_[m] = sys.Q21(m * h_);
    }
  }

  struct Terms {
    cplx Skk, wkk, Sjk, wjk;
  };

  Terms terms(const TriangularKernel& R, int i, int c, int k) const {
    const int j = 3 - k;
    const int kk = k - 1, jj = j - 1;
    const auto& qkj = (k == 1) ? q12_ : q21_;
    const auto& qjk = (k == 1) ? q21_ : q12_;
    const double ak = sys_.a(k), aj = sys_.a(j);
    Terms T{0, 0, 0, 0};

    if (c > 0) {
      const cplx pref = -I / ak;
      cplx s = 0.5 * qkj[i - c] * R(i - c, 0)(jj, kk);
      for (int m = i - c + 1; m < i; ++m) s += qkj[m] * R(m, m - i + c)(jj, kk);
      T.Skk = pref * h_ * s;
      T.wkk = pref * h_ * 0.5 * qkj[i];
    }

    const double xi = i * h_, tc = c * h_;
    const double alk = sys_.alpha(k), alj = 1.0 - alk, gk = sys_.gamma(k);
    const double xi0 = alk * xi + alj * tc;
    const cplx expl = I / (ak - aj) * sys_.Q(j, k)(xi0);
    if (c == i) {
      T.Sjk = expl;
      return T;
    }
    int m0 = static_cast<int>(std::ceil(xi0 / h_ - 1e-9));
    m0 = std::min(m0, i);
    const double L0 = std::max(0.0, m0 * h_ - xi0);
    cplx s = 0;
    if (L0 > 0) s += 0.5 * L0 * sys_.Q(j, k)(xi0) * diag(R, xi0, kk);
    cplx wi = 0;
    if (m0 == i) {
      wi = 0.5 * L0;
    } else {
      s += 0.5 * L0 * qjk[m0] * row_interp(R, m0, gk * (m0 * h_ - xi) + tc, kk);
      s += 0.5 * h_ * qjk[m0] * row_interp(R, m0, gk * (m0 * h_ - xi) + tc, kk);
      for (int m = m0 + 1; m < i; ++m) s += h_ * qjk[m] * row_interp(R, m, gk * (m * h_ - xi) + tc, kk);
      wi = 0.5 * h_;
    }
    const cplx pj = -I / aj;
    T.Sjk = expl + pj * s;
    T.wjk = pj * wi * qjk[i];
    return T;
  }

 private:
  // R_kk(m h, tau), tau in [0, m h], linear in tau along row m
  cplx row_interp(const TriangularKernel& R, int m, double tau, int kk) const {
    double u = std::clamp(tau / h_, 0.0, double(m));
    int c0 = std::min(static_cast<int>(u), m);
    if (c0 == m) return R(m, m)(kk, kk);
    double f = u - c0;
    return (1 - f) * R(m, c0)(kk, kk) + f * R(m, c0 + 1)(kk, kk);
  }
  // R_kk(xi, xi), linear along the diagonal
  cplx diag(const TriangularKernel& R, double xi, int kk) const {
    double s = std::clamp(xi / h_, 0.0, double(N_));
    int m = std::min(static_cast<int>(s), N_ - 1);
    double f = s - m;
    return (1 - f) * R(m, m)(kk, kk) + f * R(m + 1, m + 1)(kk, kk);
  }

  const DiracSystem& sys_;
  int N_;
  double h_;
  std::vector<cplx> q12_, q21_;
};

std::vector<double> trap_weights(int n, double h) {
  std::vector<double> w(n + 1, h);
  w[0] = w[n] = 0.5 * h;
  if (n == 0) w[0] = 0;
  return w;
}

}  // namespace

double R_residual(const DiracSystem& sys, const TriangularKernel& R) {
  const int N = R.N();
  RStencil st(sys, N);
  TriangularKernel E(N);
  for (int i = 0; i <= N; ++i)
    for (int c = 0; c <= i; ++c)
      for (int k = 1; k <= 2; ++k) {
        const int j = 3 - k;
        auto T = st.terms(R, i, c, k);
        const cplx rkk = R(i, c)(k - 1, k - 1), rjk = R(i, c)(j - 1, k - 1);
        E(i, c)(k - 1, k - 1) = rkk - (T.Skk + T.wkk * rjk);
        E(i, c)(j - 1, k - 1) = rjk - (T.Sjk + T.wjk * rkk);
      }
  return gridfn::x_norm(E, XFamily::infinity, PNorm(1.0));
}

RSolution solve_R(const DiracSystem& sys, int N, int max_iter, double tol) {
  if (N < 8) throw std::invalid_argument("solve_R: need N >= 8");
  RStencil st(sys, N);
  TriangularKernel R(N);
  // first explicit term as the starting point
  for (int i = 0; i <= N; ++i)
    for (int c = 0; c <= i; ++c)
      for (int k = 1; k <= 2; ++k) {
        const int j = 3 - k;
        double xi0 = sys.alpha(k) * i / double(N) + (1 - sys.alpha(k)) * c / double(N);
        R(i, c)(j - 1, k - 1) = I / (sys.a(k) - sys.a(j)) * sys.Q(j, k)(xi0);
      }
  double res = 0;
  for (int it = 1; it <= max_iter; ++it) {
    // causal sweep: row by row, diagonal node first
    for (int i = 0; i <= N; ++i)
      for (int c = i; c >= 0; --c)
        for (int k = 1; k <= 2; ++k) {
          const int j = 3 - k;
          auto T = st.terms(R, i, c, k);
          cplx rkk = (T.Skk + T.wkk * T.Sjk) / (1.0 - T.wkk * T.wjk);
          R(i, c)(k - 1, k - 1) = rkk;
          R(i, c)(j - 1, k - 1) = T.Sjk + T.wjk * rkk;
        }
    res = R_residual(sys, R);
    if (res < tol) return {R, res, it};
  }
  throw gridfn::IterationLimit("solve_R: residual " + std::to_string(res) + " above tolerance", res);
}

double P_residual(const TriangularKernel& R, const DiracSystem& sys, const SampledPair& P, int s) {
  const int N = R.N();
  const double h = R.h(), a1 = sys.a(1), a2 = sys.a(2);
  double worst = 0;
  for (int i = 0; i <= N; ++i) {
    auto w = trap_weights(i, h);
    cplx e1 = a1 * P[0][i] + double(s) * a2 * R(i, 0)(0, 1);
    cplx e2 = double(s) * a2 * P[1][i] + a1 * R(i, 0)(1, 0);
    for (int m = 0; m <= i; ++m) {
      e1 += w[m] * (a1 * R(i, m)(0, 0) * P[0][m] + double(s) * a2 * R(i, m)(0, 1) * P[1][m]);
      e2 += w[m] * (a1 * R(i, m)(1, 0) * P[0][m] + double(s) * a2 * R(i, m)(1, 1) * P[1][m]);
    }
    worst = std::max({worst, std::abs(e1), std::abs(e2)});
  }
  return worst;
}

PSolution solve_P(const TriangularKernel& R, const DiracSystem& sys, int N, double tol) {
  if (R.N() != N) throw std::invalid_argument("solve_P: grid mismatch");
  const double h = R.h(), a1 = sys.a(1), a2 = sys.a(2);
  PSolution out;
  for (int s : {1, -1}) {
    std::vector<cplx> p1(N + 1), p2(N + 1);
    const double sd = s;
    for (int i = 0; i <= N; ++i) {
      auto w = trap_weights(i, h);
      cplx r1 = -sd * a2 * R(i, 0)(0, 1), r2 = -a1 * R(i, 0)(1, 0);
      for (int m = 0; m < i; ++m) {
        r1 -= w[m] * (a1 * R(i, m)(0, 0) * p1[m] + sd * a2 * R(i, m)(0, 1) * p2[m]);
        r2 -= w[m] * (a1 * R(i, m)(1, 0) * p1[m] + sd * a2 * R(i, m)(1, 1) * p2[m]);
      }
      Mat2 M;
      M << a1 + w[i] * a1 * R(i, i)(0, 0), w[i] * sd * a2 * R(i, i)(0, 1), w[i] * a1 * R(i, i)(1, 0),
          sd * a2 + w[i] * sd * a2 * R(i, i)(1, 1);
      Vec2 x = M.partialPivLu().solve(Vec2(r1, r2));
      p1[i] = x(0);
      p2[i] = x(1);
    }
    SampledPair P{SampledFunction(std::move(p1)), SampledFunction(std::move(p2))};
    double res = P_residual(R, sys, P, s);
    if (res > tol) throw gridfn::IterationLimit("solve_P: residual " + std::to_string(res), res);
    (s > 0 ? out.plus : out.minus) = P;
    (s > 0 ? out.residual_plus : out.residual_minus) = res;
  }
  return out;
}

std::array<TriangularKernel, 2> assemble_K(const TriangularKernel& R, const SampledPair& Pp,
                                           const SampledPair& Pm, int N) {
  if (R.N() != N || Pp[0].N() != N || Pm[0].N() != N) throw std::invalid_argument("assemble_K: grid mismatch");
  const double h = R.h();
  std::array<TriangularKernel, 2> K{TriangularKernel(N), TriangularKernel(N)};
  for (int sgn = 0; sgn < 2; ++sgn) {
    const SampledPair& P = sgn == 0 ? Pp : Pm;
    auto Pd = [&](int n) {
      Mat2 D = Mat2::Zero();
      D(0, 0) = P[0][n];
      D(1, 1) = P[1][n];
      return D;
    };
    for (int i = 0; i <= N; ++i)
      for (int c = 0; c <= i; ++c) {
        Mat2 s = Mat2::Zero();
        if (i > c) {
          s = 0.5 * (R(i, c) * Pd(0) + R(i, i) * Pd(i - c));
          for (int m = c + 1; m < i; ++m) s.noalias() += R(i, m) * Pd(m - c);
          s *= h;
        }
        K[sgn](i, c) = R(i, c) + Pd(i - c) + s;
      }
  }
  return K;
}

double boundary_residual(const TriangularKernel& K, const DiracSystem& sys, int sign) {
  double worst = 0;
  Vec2 v(sys.a(1), double(sign) * sys.a(2));
  for (int i = 0; i <= K.N(); ++i) worst = std::max(worst, (K(i, 0) * v).cwiseAbs().maxCoeff());
  return worst;
}

KernelSet build_kernels(const DiracSystem& sys, int N, int max_iter, double tol) {
  KernelSet ks;
  auto r = solve_R(sys, N, max_iter, tol);
  ks.R = std::move(r.R);
  ks.residual_R = r.residual;
  auto p = solve_P(ks.R, sys, N, tol);
  ks.Pplus = p.plus;
  ks.Pminus = p.minus;
  ks.residual_Pplus = p.residual_plus;
  ks.residual_Pminus = p.residual_minus;
  auto K = assemble_K(ks.R, ks.Pplus, ks.Pminus, N);
  ks.Kplus = std::move(K[0]);
  ks.Kminus = std::move(K[1]);
  ks.boundary_plus = boundary_residual(ks.Kplus, sys, 1);
  ks.boundary_minus = boundary_residual(ks.Kminus, sys, -1);
  return ks;
}

SampledPair reconstruct_e(const TriangularKernel& K, int sign, double b1, double b2, cplx lambda) {
  const int N = K.N();
  ExpQuadrature E1(N, b1 * lambda), E2(N, b2 * lambda);
  std::vector<cplx> u(N + 1), v(N + 1), buf(N + 1);
  const double sd = sign;
  for (int i = 0; i <= N; ++i) {
    const double x = double(i) / N;
    cplx acc[2] = {std::exp(I * b1 * lambda * x), sd * std::exp(I * b2 * lambda * x)};
    for (int r = 0; r < 2; ++r) {
      for (int m = 0; m <= i; ++m) buf[m] = K(i, m)(r, 0);
      acc[r] += E1.integrate(buf.data(), i);
      for (int m = 0; m <= i; ++m) buf[m] = K(i, m)(r, 1);
      acc[r] += sd * E2.integrate(buf.data(), i);
    }
    u[i] = acc[0];
    v[i] = acc[1];
  }
  return {SampledFunction(std::move(u)), SampledFunction(std::move(v))};
}

ComboKernels combos(const TriangularKernel& Kp, const TriangularKernel& Km) {
  const int N = Kp.N();
  if (Km.N() != N) throw std::invalid_argument("combos: grid mismatch");
  ComboKernels C{{TriangularKernel(N), TriangularKernel(N)}};
  for (int k = 1; k <= 2; ++k)
    for (int i = 0; i <= N; ++i)
      for (int m = 0; m <= i; ++m)
        for (int j = 1; j <= 2; ++j)
          for (int l = 1; l <= 2; ++l) {
            double sg = ((l + k) % 2 == 0) ? 1.0 : -1.0;
            C.by_k[k - 1](i, m)(j - 1, l - 1) = 0.5 * (Kp(i, m)(j - 1, l - 1) + sg * Km(i, m)(j - 1, l - 1));
          }
  return C;
}

std::vector<Mat2> phi_from_combos(const ComboKernels& C, double b1, double b2, cplx lambda) {
  const int N = C.by_k[0].N();
  ExpQuadrature E[2] = {ExpQuadrature(N, b1 * lambda), ExpQuadrature(N, b2 * lambda)};
  const double bb[2] = {b1, b2};
  std::vector<Mat2> out(N + 1);
  std::vector<cplx> buf(N + 1);
  for (int i = 0; i <= N; ++i) {
    const double x = double(i) / N;
    Mat2 P = Mat2::Zero();
    for (int k = 1; k <= 2; ++k) {
      for (int j = 1; j <= 2; ++j) {
        cplx s = (j == k) ? std::exp(I * bb[k - 1] * lambda * x) : cplx{};
        for (int l = 1; l <= 2; ++l) {
          for (int m = 0; m <= i; ++m) buf[m] = C(j, l, k, i, m);
          s += E[l - 1].integrate(buf.data(), i);
        }
        P(j - 1, k - 1) = s;
      }
    }
    out[i] = P;
  }
  return out;
}

DetEvaluator::DetEvaluator(const boundary::BoundaryConditions& bc, const ComboKernels& C, double b1, double b2)
    : J_(boundary::minors(bc)), b1_(b1), b2_(b2) {
  const int N = C.by_k[0].N();
  for (int l = 1; l <= 2; ++l) {
    std::vector<cplx> g(N + 1);
    for (int m = 0; m <= N; ++m)
      g[m] = J_(3, 2) * C(1, l, 1, N, m) + J_(4, 2) * C(2, l, 1, N, m) + J_(1, 3) * C(1, l, 2, N, m) +
             J_(1, 4) * C(2, l, 2, N, m);
    g_[l - 1] = SampledFunction(std::move(g));
  }
}

cplx DetEvaluator::operator()(cplx l) const {
  const int N = g_[0].N();
  cplx d0 = J_(1, 2) + J_(3, 4) * std::exp(I * (b1_ + b2_) * l) + J_(3, 2) * std::exp(I * b1_ * l) +
            J_(1, 4) * std::exp(I * b2_ * l);
  return d0 + ExpQuadrature(N, b1_ * l).integrate(g_[0]) + ExpQuadrature(N, b2_ * l).integrate(g_[1]);
}

cplx det_via_kernels(const boundary::BoundaryConditions& bc, const ComboKernels& C, double b1, double b2,
                     cplx lambda) {
  return DetEvaluator(bc, C, b1, b2)(lambda);
}

KernelDeviation kernel_deviation_norms(const KernelSet& K, const KernelSet& Kt, const DiracSystem& Q,
                                       const DiracSystem& Qt, PNorm p) {
  KernelDeviation d;
  for (int s : {1, -1}) {
    TriangularKernel D = K.K(s) - Kt.K(s);
    d.dev_Xinf = std::max(d.dev_Xinf, gridfn::x_norm(D, XFamily::infinity, p));
    d.dev_X1 = std::max(d.dev_X1, gridfn::x_norm(D, XFamily::one, p));
  }
  d.dev_Q = (Q - Qt).norm(p);
  return d;
}

KernelDeviation kernel_deviation_norms(const DiracSystem& Q, const DiracSystem& Qt, PNorm p, int N) {
  return kernel_deviation_norms(build_kernels(Q, N), build_kernels(Qt, N), Q, Qt, p);
}

namespace {
template <class T>
void put_le(std::ofstream& out, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}
template <class T>
T get_le(std::ifstream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!in) throw std::runtime_error("kernel file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
}  // namespace

void dump_kernel(const std::string& path, const TriangularKernel& K) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::uint64_t N = K.N();
  const std::uint64_t count = (N + 1) * (N + 2) / 2 * 4;
  put_le(out, N);
  put_le(out, count);
  for (int i = 0; i <= K.N(); ++i)
    for (int j = 0; j <= i; ++j)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          put_le(out, K(i, j)(r, c).real());
          put_le(out, K(i, j)(r, c).imag());
        }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TriangularKernel load_kernel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto N = get_le<std::uint64_t>(in);
  auto count = get_le<std::uint64_t>(in);
  if (N < 1 || count != (N + 1) * (N + 2) / 2 * 4) throw std::runtime_error("bad kernel header");
  TriangularKernel K(static_cast<int>(N));
  for (int i = 0; i <= K.N(); ++i)
    for (int j = 0; j <= i; ++j)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
          double re = get_le<double>(in), im = get_le<double>(in);
          K(i, j)(r, c) = {re, im};
        }
  return K;
}

}  // namespace dts::transformop
