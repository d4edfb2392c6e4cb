#pragma once

#include <string>
#include <vector>

#include "dts/boundary.hpp"
#include "dts/spectrum.hpp"

namespace dts::bari {

using boundary::Canonical;

struct EjQuantities {
  cplx e1, e2;
  double E1p, E1m, E2p, E2m;  // E_j^+- = int_0^1 e^{-+2 b_j Im l x} dx
};
// (e^y - 1)/y, 1 at y = 0
double exp_mean(double y);
EjQuantities ej_quantities(double b1, double b2, cplx lambda);

struct BariTerm {
  int n = 0;
  cplx lambda0;
  cplx z;  // (1 + d e_2^{-1}) conj(1 + a e_1)
  double alpha = 0;
  // 0: vectors with b != 0 (or the reflected problem when b = 0, c != 0)
  // 1: b = c = 0, f = (0, e^{i b2 l x});  2: b = c = 0, f = (e^{i b1 l x}, 0)
  int branch = 0;
  bool degenerate = false;  // (f, g) = 0
};
std::vector<BariTerm> bari_terms(const Canonical& c, double b1, double b2,
                                 const std::vector<spectrum::IndexedZero>& lambdas);

// Simpson quadrature of ||f||^2, ||g||^2, (f, g) for the explicit vector pair at lambda.
struct QuadratureTerm {
  double f2 = 0, g2 = 0;
  cplx fg;
  double alpha = 0;
};
QuadratureTerm bari_term_quadrature(const Canonical& c, double b1, double b2, cplx lambda, int branch,
                                    int N = 20000);

enum class Verdict { bari, not_bari, inconclusive };
std::string to_string(Verdict v);

struct BariReport {
  std::vector<BariTerm> rows;
  // partial[m] = sum over |n| <= m outside the head
  std::vector<double> partial_im2, partial_z, partial_alpha;
  double gate = 0;  // b1 |c| + b2 |b|
  double tail_im2 = 0, tail_z = 0;  // last-quarter share of the total
  int head = -1;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
};

BariReport bari_criterion(const Canonical& c, double b1, double b2, int N_max);
std::string to_json(const BariReport& r);

// M = [[a, mu b], [c / mu, d]], mu = sqrt(-b2/b1), unitary within 1e-12
bool selfadjoint_check(const Canonical& c, double b1, double b2);

}  // namespace dts::bari
