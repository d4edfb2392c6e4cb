#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dts/potential.hpp"
#include "dts/stability.hpp"

using namespace dts;
using namespace dts::stability;
using boundary::BoundaryConditions;
constexpr double pi = std::numbers::pi;

namespace {
constexpr int kN = 256;

spectrum::ZeroOptions fast() {
  spectrum::ZeroOptions o;
  o.ode_N = kN;
  return o;
}

DiracSystem smooth(unsigned seed, double norm, double b2 = 1) {
  std::mt19937_64 rng(seed);
  auto Q = potential::random_smooth_pair(rng, kN, 2, norm);
  return DiracSystem(-1, b2, Q[0], Q[1]);
}

const BoundaryConditions sep = BoundaryConditions::from_canonical({0, 1, 1, 0});
}  // namespace

TEST_CASE("identical potentials give zero deviation") {
  auto Q = smooth(1, 0.3);
  auto r = eigenfunction_deviation(Q, Q, sep, 8, PNorm(2), PNorm::infinity(), fast());
  REQUIRE(r.rows.size() == 17);
  for (const auto& row : r.rows) {
    CHECK(row.dlambda == 0);
    CHECK(row.dfn == 0);
  }
  CHECK(r.eig.lpc_all == 0);
  CHECK(r.fn.sup_all == 0);
  CHECK(r.q_dev == 0);
  auto t = two_sided_check(Q, Q, sep, 8, fast());
  CHECK(t.n.empty());
}

TEST_CASE("Q12 = 0 and b = 0 keep the eigenvalues") {
  auto bc = BoundaryConditions::from_canonical({2, 0, 0.5, 1});
  auto z = gridfn::SampledFunction::zero(kN);
  auto q = gridfn::SampledFunction::from([](double x) { return cplx(std::sin(2 * pi * x), 1 - x); }, kN);
  auto qt = gridfn::SampledFunction::from([](double x) { return cplx(x * x, -0.5); }, kN);
  auto r = eigen_deviation(DiracSystem(-1, 1, z, q), DiracSystem(-1, 1, z, qt), bc, 8, PNorm(2), fast());
  for (const auto& row : r.rows) CHECK(row.dlambda < 1e-8);
}

TEST_CASE("Q12 = 0: eigenfunctions on the second branch coincide") {
  auto bc = BoundaryConditions::from_canonical({2, 0, 0, 1});
  auto z = gridfn::SampledFunction::zero(kN);
  auto q = gridfn::SampledFunction::from([](double x) { return cplx(std::cos(2 * pi * x), 0.3); }, kN);
  auto qt = gridfn::SampledFunction::from([](double x) { return cplx(0.5 - x, x); }, kN);
  auto r = eigenfunction_deviation(DiracSystem(-1, 1, z, q), DiracSystem(-1, 1, z, qt), bc, 8, PNorm(2),
                                   PNorm::infinity(), fast());
  int second = 0, first_moved = 0;
  for (const auto& row : r.rows) {
    CHECK_FALSE(row.skipped);
    if (std::abs(row.lambda.imag()) < 1e-9) {  // zeros of d + e_2: real line
      ++second;
      CHECK(row.dfn < 1e-10);
    } else if (row.dfn > 1e-4) {
      ++first_moved;
    }
  }
  CHECK(second >= 8);
  CHECK(first_moved > 0);
}

TEST_CASE("scaling family has a stable Lipschitz ratio") {
  auto Q = smooth(2, 1.0);
  auto zero = DiracSystem::free(-1, 1, kN);
  double lo = 1e300, hi = 0;
  for (double s : {0.25, 0.5, 1.0}) {
    DiracSystem Qs(-1, 1, Q.Q12 * s, Q.Q21 * s);
    auto r = eigen_deviation(Qs, zero, sep, 10, PNorm(2), fast());
    double ratio = std::sqrt(r.eig.lpc_all) / r.q_dev;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo <= 3);
}

TEST_CASE("two-sided check: bounded ratios and role swap") {
  auto Q = smooth(3, 0.2);
  auto zero = DiracSystem::free(-1, 1, kN);
  auto t = two_sided_check(Q, zero, sep, 10, fast());
  REQUIRE(t.max_tail > 0);
  CHECK(t.max_tail / t.min_tail <= 100);
  auto s = two_sided_check(zero, Q, sep, 10, fast());
  REQUIRE(s.max_tail > 0);
  CHECK(s.max_tail / t.max_tail <= 10);
  CHECK(t.max_tail / s.max_tail <= 10);
}

TEST_CASE("triangle consistency of the pairing") {
  auto Q = smooth(4, 0.3), Qt = smooth(5, 0.3);
  auto zero = DiracSystem::free(-1, 1, kN);
  auto a = eigen_deviation(Q, Qt, sep, 8, PNorm(2), fast());
  auto b = eigen_deviation(Q, zero, sep, 8, PNorm(2), fast());
  auto c = eigen_deviation(zero, Qt, sep, 8, PNorm(2), fast());
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    CHECK(a.rows[k].dlambda <= 1.1 * (b.rows[k].dlambda + c.rows[k].dlambda) + 1e-12);
}

TEST_CASE("eigenfunction tail partial sums decay") {
  auto Q = smooth(6, 0.5);
  auto zero = DiracSystem::free(-1, 1, kN);
  auto r = eigenfunction_deviation(Q, zero, sep, 16, PNorm(2), PNorm::infinity(), fast());
  double inner = 0, outer = 0;
  for (const auto& row : r.rows) {
    REQUIRE_FALSE(row.skipped);
    (std::abs(row.n) <= 8 ? inner : outer) += row.dfn * row.dfn;
  }
  CHECK(std::isfinite(r.fn.lpc_all));
  CHECK(outer < inner);
}

TEST_CASE("aggregates are recomputable from the rows") {
  auto r = eigen_deviation(smooth(7, 0.4), smooth(8, 0.4), sep, 8, PNorm(1.5), fast());
  auto a = aggregate(r.rows, PNorm(1.5), 0);
  CHECK(a.lpc_all == r.eig.lpc_all);
  CHECK(a.weighted_tail == r.eig.weighted_tail);
  double lpc = 0, w = 0, sup = 0;
  for (const auto& row : r.rows) {
    lpc += std::pow(row.dlambda, 3.0);
    w += std::pow(1.0 + std::abs(row.n), -0.5) * std::pow(row.dlambda, 1.5);
    sup = std::max(sup, row.dlambda);
  }
  CHECK(r.eig.lpc_all == doctest::Approx(lpc));
  CHECK(r.eig.weighted_all == doctest::Approx(w));
  CHECK(r.eig.sup_all == sup);
}

TEST_CASE("weighted against plain sums at row level") {
  // (1+|n|)^{p-2} d^p <= d^{p'} exactly when d >= (1+|n|)^{-1/p'}
  for (double p : {1.25, 1.5, 2.0}) {
    const double pc = p / (p - 1);
    std::vector<DeviationRow> big, small;
    for (int n = -20; n <= 20; ++n) {
      DeviationRow r;
      r.n = n;
      r.dlambda = 1.5 * std::pow(1.0 + std::abs(n), -1 / pc);
      big.push_back(r);
      r.dlambda = 0.5 * std::pow(1.0 + std::abs(n), -1 / pc);
      small.push_back(r);
    }
    auto a = aggregate(big, PNorm(p), 0), b = aggregate(small, PNorm(p), 0);
    CHECK(a.weighted_all <= a.lpc_all * (1 + 1e-12));
    CHECK(b.weighted_all >= b.lpc_all * (1 - 1e-12));
  }
}

TEST_CASE("p = 1 aggregate is the sup") {
  std::vector<DeviationRow> rows(3);
  rows[0].dlambda = 0.1;
  rows[1].dlambda = 0.3;
  rows[2].dlambda = 0.2;
  rows[1].head = true;
  auto a = aggregate(rows, PNorm(1), 0);
  CHECK(a.lpc_all == 0.3);
  CHECK(a.lpc_tail == 0.2);
  CHECK_THROWS_AS(eigen_deviation(spectrum::SpectrumWindow{}, spectrum::SpectrumWindow{}, PNorm(3), 0),
                  std::invalid_argument);
}

TEST_CASE("sampler stays in the ball and is deterministic") {
  for (auto fam : {potential::Family::trig, potential::Family::step, potential::Family::spline}) {
    PotentialBallSampler s{PNorm(1.5), 0.7, 42, fam, 128};
    for (std::uint64_t k = 0; k < 10; ++k) {
      auto Q = s.sample(-1, 2, k);
      CHECK(Q.norm(PNorm(1.5)) <= 0.7 * (1 + 1e-12));
      CHECK(Q.norm(PNorm(1.5)) > 0);
      auto Q2 = s.sample(-1, 2, k);
      CHECK(Q.Q21.samples() == Q2.Q21.samples());
    }
  }
}

TEST_CASE("ball experiment edge cases and determinism") {
  PotentialBallSampler s{PNorm(2), 0.5, 9, potential::Family::trig, kN};
  BallOptions o;
  o.kernel_N = 64;
  o.zeros = fast();
  CHECK(run_ball_experiment(s, sep, -1, 1, 0, 6, PNorm(2), o).rows.empty());

  PotentialBallSampler zs{PNorm(2), 0.0, 9, potential::Family::trig, kN};
  auto z = run_ball_experiment(zs, sep, -1, 1, 2, 6, PNorm(2), o);
  REQUIRE(z.rows.size() == 2);
  for (const auto& r : z.rows) {
    CHECK(r.q_dev == 0);
    CHECK(r.eig_lpc == 0);
    CHECK(r.fn_lpc == 0);
    CHECK(r.kernel_Xinf == 0);
  }
  CHECK(z.max_ratio_eig == 0);

  auto a = run_ball_experiment(s, sep, -1, 1, 3, 6, PNorm(2), o);
  auto b = run_ball_experiment(s, sep, -1, 1, 3, 6, PNorm(2), o);
  CHECK(ball_table_json(a) == ball_table_json(b));
  for (const auto& r : a.rows) {
    CHECK(std::isfinite(r.ratio_eig));
    CHECK(std::isfinite(r.ratio_fn));
    CHECK(std::isfinite(r.ratio_kernel_X1));
  }
}

TEST_CASE("report serialisation") {
  auto r = eigen_deviation(smooth(10, 0.2), smooth(11, 0.2), sep, 4, PNorm(2), fast());
  std::ostringstream a, b;
  write_report_csv(a, r);
  write_report_csv(b, r);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("n,") == 0);
  auto j = report_json(r, "x", "separated", 0.2);
  CHECK(j.find("\"eigenvalues\"") != std::string::npos);
}
