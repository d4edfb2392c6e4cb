#include <doctest.h>

#include <cmath>
#include <random>

#include "dts/gridfn.hpp"

using namespace dts;
using namespace dts::gridfn;

namespace {
TriangularKernel random_kernel(std::mt19937_64& rng, int N, double scale = 1.0) {
  std::normal_distribution<double> g;
  // smooth random kernel: low-order polynomial entries
  Mat2 c[3];
  for (auto& m : c)
    for (int k = 0; k < 4; ++k) m(k / 2, k % 2) = cplx(g(rng), g(rng)) * scale;
  return TriangularKernel::from([&](double x, double t) -> Mat2 { return c[0] + c[1] * x + c[2] * (t * x); }, N);
}
SampledPair random_pair(std::mt19937_64& rng, int N) {
  std::normal_distribution<double> g;
  cplx a(g(rng), g(rng)), b(g(rng), g(rng)), c(g(rng), g(rng));
  return {SampledFunction::from([&](double x) { return a + b * std::cos(3 * x); }, N),
          SampledFunction::from([&](double x) { return c * x * x - b; }, N)};
}
}  // namespace

TEST_CASE("pnorm rejects p below one") {
  CHECK_THROWS_AS(PNorm(0.5), std::invalid_argument);
  CHECK(PNorm(2).conj() == doctest::Approx(2));
  CHECK(PNorm(1).conj() == kInf);
  CHECK(PNorm::infinity().conj() == doctest::Approx(1));
}

TEST_CASE("sampled function basics") {
  CHECK_THROWS(SampledFunction(std::vector<cplx>{1.0}));
  auto f = SampledFunction::from([](double x) { return cplx(std::sin(7 * x), x); }, 37);
  CHECK(f.samples().size() == 38);
  for (int i = 0; i <= 37; ++i) CHECK(f(f.node(i)) == f[i]);
  // linear between nodes
  cplx mid = f(0.5 * (f.node(3) + f.node(4)));
  CHECK(std::abs(mid - 0.5 * (f[3] + f[4])) < 1e-14);
}

TEST_CASE("triangular kernel lookup outside the triangle throws") {
  TriangularKernel K(8);
  CHECK_NOTHROW(K.at(3, 3));
  CHECK_THROWS_AS(K.at(3, 4), std::out_of_range);
  CHECK_THROWS_AS(K.at(9, 0), std::out_of_range);
  CHECK_THROWS(K.eval(0.2, 0.5));
}

TEST_CASE("lp_norm examples") {
  auto one = SampledFunction::from([](double) { return cplx(1); }, 64);
  auto x = SampledFunction::from([](double t) { return cplx(t); }, 64);
  CHECK(lp_norm(one, PNorm(2)) == doctest::Approx(1).epsilon(1e-14));
  CHECK(lp_norm(x, PNorm(1)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lp_norm(x, PNorm::infinity()) == doctest::Approx(1));
}

TEST_CASE("lp_norm against a fine grid") {
  auto f = [](double x) { return cplx(std::cos(5 * x), std::exp(x)); };
  // sup |(|f|^2)''| is about 60 here
  double coarse = lp_norm(SampledFunction::from(f, 64), PNorm(2));
  double fine = lp_norm(SampledFunction::from(f, 4096), PNorm(2));
  CHECK(std::abs(std::pow(coarse, 2) - std::pow(fine, 2)) <= 10.0 / (64.0 * 64.0) * 60);
}

TEST_CASE("lp_norm homogeneity") {
  std::mt19937_64 rng(3);
  auto f = random_pair(rng, 50)[0];
  cplx s(-2.5, 1.25);
  for (double p : {1.0, 1.5, 2.0, 3.0})
    CHECK(lp_norm(f * s, PNorm(p)) == doctest::Approx(std::abs(s) * lp_norm(f, PNorm(p))).epsilon(1e-13));
}

TEST_CASE("x_norm examples") {
  int N = 64;
  CHECK(x_norm(TriangularKernel(N), XFamily::infinity, PNorm(1)) == 0);
  auto one = TriangularKernel::scalar([](double, double) { return cplx(1); }, N, 1, 0);
  CHECK(x_norm(one, XFamily::infinity, PNorm(1)) == doctest::Approx(1).epsilon(1e-14));
  auto xk = TriangularKernel::scalar([](double x, double) { return cplx(x); }, N, 0, 1);
  CHECK(x_norm(xk, XFamily::one, PNorm(1)) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("matrix norms in closed form") {
  Mat2 A;
  A << 3, cplx(0, 4), 1, 0;
  CHECK(mat_norm_1_to_p(A, PNorm(2)) == doctest::Approx(4));  // columns (3,1), (4i,0)
  CHECK(mat_norm_1_to_p(A, PNorm(1)) == doctest::Approx(4));
  CHECK(mat_norm_pconj_to_inf(A, PNorm(2)) == doctest::Approx(5));
  CHECK(mat_norm_pconj_to_inf(A, PNorm::infinity()) == doctest::Approx(4));
}

TEST_CASE("compose_kernels examples") {
  int N = 32;
  auto one = TriangularKernel::scalar([](double, double) { return cplx(1); }, N);
  auto zero = TriangularKernel(N);
  auto Z = compose_kernels(zero, one);
  CHECK(x_norm(Z, XFamily::infinity, PNorm(1)) == 0);
  auto C = compose_kernels(one, one);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) CHECK(std::abs(C(i, j)(0, 0) - cplx(double(i - j) / N)) < 1e-13);
}

TEST_CASE("compose_kernels converges at second order") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  double a = g(rng), b = g(rng);
  auto k1 = [&](double x, double t) { return cplx(std::sin(a * x + t), 0.3 * x * t); };
  auto k2 = [&](double x, double t) { return cplx(std::cos(b * t) + x, 0); };
  auto exact = [&](int Nf) {
    return compose_kernels(TriangularKernel::scalar(k1, Nf), TriangularKernel::scalar(k2, Nf));
  };
  int N = 16;
  auto C = exact(N);
  auto F = exact(8 * N);
  double err = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) err = std::max(err, std::abs(C(i, j)(0, 0) - F(8 * i, 8 * j)(0, 0)));
  CHECK(err < 3.0 / (N * N));
  auto C2 = exact(2 * N);
  double err2 = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) err2 = std::max(err2, std::abs(C2(2 * i, 2 * j)(0, 0) - F(8 * i, 8 * j)(0, 0)));
  CHECK(err / err2 > 3.0);
}

TEST_CASE("x_norm is submultiplicative under composition") {
  std::mt19937_64 rng(11);
  int N = 40;
  for (int trial = 0; trial < 5; ++trial) {
    auto A = random_kernel(rng, N), B = random_kernel(rng, N);
    for (auto fam : {XFamily::one, XFamily::infinity})
      for (double p : {1.0, 2.0}) {
        double lhs = x_norm(compose_kernels(A, B), fam, PNorm(p));
        CHECK(lhs <= x_norm(A, fam, PNorm(p)) * x_norm(B, fam, PNorm(p)) * (1 + 5.0 / N));
      }
  }
}

TEST_CASE("resolvent of zero and of a constant kernel") {
  int N = 64;
  auto R0 = resolvent_kernel(TriangularKernel(N));
  CHECK(x_norm(R0.S, XFamily::infinity, PNorm(1)) == 0);

  auto one = TriangularKernel::scalar([](double, double) { return cplx(1); }, N);
  auto R = resolvent_kernel(one);
  CHECK(R.residual < 1e-10);
  // interior nodes are second order; the diagonal and t = 0 column carry the h/2 trapezoid end weight
  double inner = 0, edge = 0;
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= i; ++j) {
      double e = std::abs(R.S(i, j)(0, 0) + std::exp(-double(i - j) / N));
      (j == 0 || j == i ? edge : inner) = std::max(j == 0 || j == i ? edge : inner, e);
    }
  CHECK(inner < 0.5 / (N * N));
  CHECK(edge < 1.0 / N);
}

TEST_CASE("resolvent inverts I + N on random functions") {
  std::mt19937_64 rng(17);
  int N = 48;
  const double tol = 1e-10;
  for (int trial = 0; trial < 3; ++trial) {
    auto K = random_kernel(rng, N, 0.7);
    auto R = resolvent_kernel(K, 200, tol);
    for (int k = 0; k < 5; ++k) {
      auto f = random_pair(rng, N);
      auto Sf = volterra_apply(R.S, f);
      SampledPair u{f[0] + Sf[0], f[1] + Sf[1]};
      auto Nu = volterra_apply(K, u);
      SampledPair back{u[0] + Nu[0], u[1] + Nu[1]};
      double e = sup_norm({back[0] - f[0], back[1] - f[1]});
      CHECK(e <= 10 * tol * std::max(1.0, sup_norm(f)));
    }
  }
}

TEST_CASE("resolvent involution") {
  std::mt19937_64 rng(23);
  int N = 32;
  auto K = random_kernel(rng, N, 0.5);
  auto S = resolvent_kernel(K).S;
  auto back = resolvent_kernel(S).S;
  CHECK(x_norm(back - K, XFamily::infinity, PNorm(1)) <= 10 * 1e-10);
}

TEST_CASE("resolvent reports the iteration limit") {
  int N = 32;
  auto big = TriangularKernel::scalar([](double, double) { return cplx(40); }, N);
  CHECK_THROWS_AS(resolvent_kernel(big, 3, 1e-12), IterationLimit);
}

TEST_CASE("exponential quadrature is exact for linear data") {
  int N = 20;
  cplx w(7.5, 0.4);
  ExpQuadrature q(N, w);
  auto f = SampledFunction::from([](double t) { return cplx(2 - t, 1); }, N);
  // int_0^1 (2 - t + i) e^{i w t} dt
  cplx iw = I * w, e = std::exp(iw);
  cplx exact = (2.0 + I) * (e - 1.0) / iw - (e / iw - (e - 1.0) / (iw * iw));
  CHECK(std::abs(q.integrate(f) - exact) < 1e-12);
}
