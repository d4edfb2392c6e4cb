#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dts/boundary.hpp"
#include "dts/ode.hpp"

namespace dts::spectrum {

using DetFn = std::function<cplx(cplx)>;

struct IndexedZero {
  int n;
  cplx lambda;
  int multiplicity;
};

struct ContourTooClose : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonIntegerWinding : std::runtime_error {
  double value;
  NonIntegerWinding(const std::string& w, double v) : std::runtime_error(w), value(v) {}
};

// |Im lambda| bound for the zeros of Delta_0 (dominant-term argument).
double strip_bound(const boundary::Canonical& c, double b1, double b2);

// Canonically ordered zeros of Delta_0 for |n| <= N_max, counted with multiplicity.
// n = 0 is the first zero with Re >= 0.
std::vector<IndexedZero> zeros_delta0(const boundary::Canonical& c, double b1, double b2, int N_max,
                                      std::optional<boundary::Ratio> ratio_hint = std::nullopt);

// Winding number of f around the circle, trapezoid rule on f'/f with central differences.
int count_zeros_disk(const DetFn& f, cplx center, double radius, int quad_nodes = 64);

// All zeros of f in the box (repeated by multiplicity) by argument-principle bisection.
// fprime may be empty (central differences are used then).
std::vector<cplx> zeros_in_box(const DetFn& f, const DetFn& fprime, double re0, double re1, double im0,
                               double im1);

// Newton with central-difference derivative, step 1e-6 (1 + |z|).
std::optional<cplx> newton(const DetFn& f, cplx z0, int max_iter = 50);

struct SpectrumEntry {
  int n;
  cplx lambda0, lambda;
  int multiplicity;
  double ladder_eps;  // finest verified ladder level, NaN if none
  bool verified;
};

struct SpectrumWindow {
  std::vector<SpectrumEntry> entries;  // n = -N_max..N_max
  double strip_height = 0;
  int N_max = 0;
  int head = -1;  // largest |n| whose pairing is not winding-verified, -1 if none
  const SpectrumEntry& at(int n) const { return entries.at(n + N_max); }
};

struct ZeroOptions {
  std::vector<double> ladder{0.4, 0.2, 0.1, 0.05};
  int ode_N = 512;
  int quad_nodes = 128;
  int pad = 4;
  DetFn det;  // defaults to ode::char_det_direct at ode_N
};

SpectrumWindow zeros_deltaQ(const ode::DiracSystem& sys, const boundary::BoundaryConditions& bc, int N_max,
                            const ZeroOptions& opts = {});

// Max over t on a step-1/4 grid of #{n : |Re lambda_n - t| <= 1}.
int incompressible_density(const std::vector<cplx>& seq);

void write_csv(std::ostream& out, const SpectrumWindow& w);
void write_csv(const std::string& path, const SpectrumWindow& w);

}  // namespace dts::spectrum
