#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dts/potential.hpp"
#include "dts/spectrum.hpp"
#include "dts/transformop.hpp"

using namespace dts;
using namespace dts::spectrum;
using boundary::BoundaryConditions;
using boundary::Canonical;
constexpr double pi = std::numbers::pi;

namespace {
ode::DiracSystem smooth(double b1, double b2, int N, unsigned seed, double norm) {
  std::mt19937_64 rng(seed);
  auto Q = potential::random_smooth_pair(rng, N, 1.0, norm);
  return ode::DiracSystem(b1, b2, Q[0], Q[1]);
}
}  // namespace

TEST_CASE("antiperiodic Dirac zeros are double") {
  auto z = zeros_delta0({1, 0, 0, 1}, -1, 1, 6);
  REQUIRE(z.size() == 13);
  // pairs (pi + 2 pi m) x 2, n = 0 is the first with Re >= 0
  for (const auto& e : z) {
    int m = static_cast<int>(std::floor(e.n / 2.0));
    CHECK(std::abs(e.lambda - cplx(pi + 2 * pi * m)) < 1e-12);
    CHECK(e.multiplicity == 2);
  }
}

TEST_CASE("quasi-periodic progressions") {
  Canonical c{2, 0, 0, 1};
  auto z = zeros_delta0(c, -1, 1, 10);
  int real_line = 0, shifted = 0;
  for (const auto& e : z) {
    CHECK(std::abs(boundary::delta0(c, -1, 1, e.lambda)) < 1e-12);
    if (std::abs(e.lambda.imag()) < 1e-12) {
      ++real_line;
      CHECK(std::abs(std::remainder(e.lambda.real() - pi, 2 * pi)) < 1e-12);
    } else {
      ++shifted;
      CHECK(e.lambda.imag() == doctest::Approx(-std::log(2.0)));
    }
    CHECK(e.multiplicity == 1);
  }
  CHECK(real_line + shifted == 21);
  CHECK(std::abs(real_line - shifted) <= 1);
  for (std::size_t k = 1; k < z.size(); ++k) CHECK(z[k].lambda.real() >= z[k - 1].lambda.real());
}

TEST_CASE("separated data give pi n") {
  auto z = zeros_delta0({0, 1, 1, 0}, -1, 1, 8);
  for (const auto& e : z) CHECK(std::abs(e.lambda - cplx(pi * e.n)) < 1e-12);
}

TEST_CASE("rational ratio polynomial lifting") {
  Canonical c{{0.3, 0.2}, 1.5, {-0.4, 0.1}, {0.8, -0.2}};
  auto z = zeros_delta0(c, -2, 3, 15);
  REQUIRE(z.size() == 31);
  for (const auto& e : z) CHECK(std::abs(boundary::delta0(c, -2, 3, e.lambda)) < 1e-10);
  // density: 5 zeros per period 2 pi
  CHECK(z.back().lambda.real() - z.front().lambda.real() == doctest::Approx(30 * 2 * pi / 5).epsilon(0.1));
  CHECK(z[15].lambda.real() >= -1e-9);
  CHECK(z[14].lambda.real() < 0);
}

TEST_CASE("irrational ratio sweep agrees with the winding count") {
  Canonical c{{0.4, 0.1}, 1, 2, {0.3, 0.2}};
  const double b1 = -1, b2 = std::sqrt(2.0);
  auto z = zeros_delta0(c, b1, b2, 12);
  REQUIRE(z.size() == 25);
  for (const auto& e : z) CHECK(std::abs(boundary::delta0(c, b1, b2, e.lambda)) < 1e-10);
  // everything the sweep found between two real parts is all there is
  double lo = 0.5 * (z[2].lambda.real() + z[3].lambda.real());
  double hi = 0.5 * (z[20].lambda.real() + z[21].lambda.real());
  double H = strip_bound(c, b1, b2) + 1;
  DetFn f = [&](cplx l) { return boundary::delta0(c, b1, b2, l); };
  auto inside = zeros_in_box(f, {}, lo, hi, -H, H);
  CHECK(inside.size() == 18);
  for (const auto& e : z) CHECK(std::abs(e.lambda.imag()) <= strip_bound(c, b1, b2) + 1e-9);
}

TEST_CASE("nonregular data are rejected") {
  CHECK_THROWS_AS(zeros_delta0({0, 1, 0, 0}, -1, 1, 4), std::domain_error);
}

TEST_CASE("count_zeros_disk examples") {
  DetFn anti = [](cplx l) { return boundary::delta0({1, 0, 0, 1}, -1, 1, l); };
  CHECK(count_zeros_disk(anti, pi, 0.5) == 2);
  CHECK(count_zeros_disk(anti, 1, 0.5) == 0);
  CHECK(count_zeros_disk([](cplx l) { return l; }, 0, 1) == 1);
  CHECK_THROWS_AS(count_zeros_disk([](cplx l) { return l - 1.0; }, 0, 1), ContourTooClose);
}

TEST_CASE("incompressible density examples") {
  std::vector<cplx> a, b, c;
  for (int n = -20; n <= 20; ++n) {
    a.push_back(2 * pi * n);
    b.push_back(double(n));
    c.push_back(pi + 2 * pi * n);
    c.push_back(pi + 2 * pi * n);
  }
  CHECK(incompressible_density(a) == 1);
  CHECK(incompressible_density(b) == 3);
  CHECK(incompressible_density(c) == 2);
}

TEST_CASE("zero potential returns the unperturbed zeros") {
  auto bc = BoundaryConditions::from_canonical({0, 1, 1, 0});
  auto w = zeros_deltaQ(ode::DiracSystem::free(-1, 1, 64), bc, 10);
  REQUIRE(w.entries.size() == 21);
  for (const auto& e : w.entries) {
    CHECK(e.lambda == e.lambda0);
    CHECK(e.verified);
    CHECK(e.ladder_eps == doctest::Approx(0.05));
  }
  CHECK(w.head == -1);
  CHECK(w.at(3).n == 3);
}

TEST_CASE("antiperiodic double zeros stay clustered") {
  auto bc = BoundaryConditions::from_canonical({1, 0, 0, 1});
  auto w = zeros_deltaQ(ode::DiracSystem::free(-1, 1, 64), bc, 4);
  for (const auto& e : w.entries) {
    CHECK(e.lambda == e.lambda0);
    CHECK(e.multiplicity == 2);
    CHECK(e.verified);
  }
}

TEST_CASE("lower triangular potential with b = 0 leaves the spectrum fixed") {
  auto bc = BoundaryConditions::from_canonical({1, 0, 0.7, 2});
  auto q = gridfn::SampledFunction::from([](double x) { return cplx(1.5 * std::cos(2 * pi * x), x); }, 256);
  ode::DiracSystem s(-1, 1, gridfn::SampledFunction::zero(256), q);
  ZeroOptions o;
  o.ode_N = 256;
  auto w = zeros_deltaQ(s, bc, 8, o);
  for (const auto& e : w.entries) CHECK(std::abs(e.lambda - e.lambda0) < 1e-8);
}

TEST_CASE("small smooth potential: pairing is verified and close") {
  auto bc = BoundaryConditions::from_canonical({0, 1, 1, 0});
  auto s = smooth(-1, 1, 256, 21, 0.1);
  ZeroOptions o;
  o.ode_N = 256;
  auto w = zeros_deltaQ(s, bc, 12, o);
  for (const auto& e : w.entries) {
    CHECK(e.verified);
    CHECK(std::abs(e.lambda - e.lambda0) < 0.1);
    CHECK(std::abs(ode::char_det_direct(s, bc, e.lambda, 256)) < 1e-9);
    CHECK(std::abs(e.lambda.imag()) <= w.strip_height);
  }
  // pairing is a bijection
  for (std::size_t i = 0; i < w.entries.size(); ++i)
    for (std::size_t j = i + 1; j < w.entries.size(); ++j)
      CHECK(std::abs(w.entries[i].lambda - w.entries[j].lambda) > 1e-6);
}

TEST_CASE("sum rule with a kernel-based determinant") {
  auto bc = BoundaryConditions::from_canonical({0.5, 1, 1, 0.5});
  auto s = smooth(-1, 1, 256, 22, 0.5);
  auto ks = transformop::build_kernels(s, 256);
  transformop::DetEvaluator D(bc, transformop::combos(ks.Kplus, ks.Kminus), -1, 1);
  ZeroOptions o;
  o.det = [&](cplx l) { return D(l); };
  auto w = zeros_deltaQ(s, bc, 10, o);
  // box between entries -6/-5 and 5/6 holds the 11 entries -5..5
  double lo = 0.5 * (w.at(-6).lambda.real() + w.at(-5).lambda.real());
  double hi = 0.5 * (w.at(5).lambda.real() + w.at(6).lambda.real());
  auto z = zeros_in_box(o.det, {}, lo, hi, -w.strip_height - 1, w.strip_height + 1);
  int mult = 0;
  for (int n = -5; n <= 5; ++n) mult += 1;
  CHECK(static_cast<int>(z.size()) == mult);
}

TEST_CASE("reflection symmetry for real data") {
  // real Q, real (a,b,c,d): lambda in sigma(Q; a,b,c,d) iff -conj(lambda) in sigma(Q; a,-b,-c,d)
  const int N = 256;
  auto q12 = gridfn::SampledFunction::from([](double x) { return cplx(std::cos(2 * pi * x)); }, N);
  auto q21 = gridfn::SampledFunction::from([](double x) { return cplx(0.5 - x); }, N);
  ode::DiracSystem s(-1, 1, q12, q21);
  auto bc = BoundaryConditions::from_canonical({0.5, 1, 2, 0.3});
  auto bcr = BoundaryConditions::from_canonical({0.5, -1, -2, 0.3});
  ZeroOptions o;
  o.ode_N = N;
  auto w = zeros_deltaQ(s, bc, 6, o);
  for (const auto& e : w.entries) CHECK(std::abs(ode::char_det_direct(s, bcr, -std::conj(e.lambda), N)) < 1e-9);
  // with b = c = 0 the spectrum itself is symmetric
  auto bq = BoundaryConditions::from_canonical({2, 0, 0, 1});
  auto wq = zeros_deltaQ(s, bq, 6, o);
  for (const auto& e : wq.entries) CHECK(std::abs(ode::char_det_direct(s, bq, -std::conj(e.lambda), N)) < 1e-9);
}

TEST_CASE("newton finds a simple zero") {
  auto z = newton([](cplx l) { return std::sin(l); }, cplx(3, 0.2));
  REQUIRE(z);
  CHECK(std::abs(*z - pi) < 1e-12);
}
