#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dts/gridfn.hpp"

namespace dts::boundary {

using Mat24 = Eigen::Matrix<cplx, 2, 4>;

// y1(0) + b y2(0) + a y1(1) = 0,  d y2(0) + c y1(1) + y2(1) = 0
struct Canonical {
  cplx a, b, c, d;
};

struct BoundaryConditions {
  Mat24 A;
  std::optional<Canonical> canonical;

  static BoundaryConditions from_matrix(const Mat24& A);
  static BoundaryConditions from_canonical(const Canonical& c);
};

// J(j,k) = det of columns j,k of A (1-based).
struct Minors {
  cplx J[5][5] = {};
  cplx operator()(int j, int k) const { return J[j][k]; }
};

struct NotCanonicalizable : std::domain_error {
  using std::domain_error::domain_error;
};

enum class Regularity { nonregular, regular, strictly_regular, regular_unknown_strictness };
std::string to_string(Regularity r);

// b1 = -n1 beta, b2 = n2 beta, gcd(n1, n2) = 1.
struct Ratio {
  int n1 = 1, n2 = 1;
};

struct RegularityVerdict {
  Regularity kind = Regularity::nonregular;
  std::string reason;
  std::string ratio_path;  // "hint", "detected" or "irrational"
  std::optional<Ratio> ratio;
};

Minors minors(const BoundaryConditions& bc);
Canonical canonicalize(const BoundaryConditions& bc);

// Continued fractions of -b1/b2, denominators up to 64, residual 1e-12.
std::optional<Ratio> detect_ratio(double b1, double b2);

RegularityVerdict classify(const BoundaryConditions& bc, double b1, double b2,
                           std::optional<Ratio> ratio_hint = std::nullopt);

cplx delta0(const Canonical& c, double b1, double b2, cplx lambda);
cplx delta0_prime(const Canonical& c, double b1, double b2, cplx lambda);

// Coefficients low to high: p(z) = sum coeffs[k] z^k. Companion-matrix roots, Newton-polished.
std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs);

// d z^{n1} + a z^{n2} + (ad - bc) + z^{n1+n2}
std::vector<cplx> delta0_polynomial(const Canonical& c, const Ratio& r);

// True if some pair of roots lies within 1e-6 max(1,|z|).
bool has_multiple_roots(const std::vector<cplx>& roots);

}  // namespace dts::boundary
