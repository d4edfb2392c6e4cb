#include "dts/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace dts::boundary {

namespace {

constexpr double kTol = 1e-10;

bool near_zero(cplx v, double scale) { return std::abs(v) <= kTol * std::max(1.0, scale); }

bool is_int_multiple_of_2pi(double theta) {
  double r = std::remainder(theta, 2 * std::numbers::pi);
  return std::abs(r) <= 1e-9 * std::max(1.0, std::abs(theta));
}

}  // namespace

std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::nonregular: return "nonregular";
    case Regularity::regular: return "regular";
    case Regularity::strictly_regular: return "strictly_regular";
    case Regularity::regular_unknown_strictness: return "regular_unknown_strictness";
  }
  return "?";
}

BoundaryConditions BoundaryConditions::from_matrix(const Mat24& A) {
  BoundaryConditions bc{A, std::nullopt};
  double best = 0, scale = A.cwiseAbs().maxCoeff();
  for (int j = 1; j <= 4; ++j)
    for (int k = j + 1; k <= 4; ++k) best = std::max(best, std::abs(minors(bc)(j, k)));
  if (best <= 1e-14 * std::max(1.0, scale * scale))
    throw std::invalid_argument("boundary matrix rows are linearly dependent");
  return bc;
}

BoundaryConditions BoundaryConditions::from_canonical(const Canonical& c) {
  Mat24 A;
  A << 1.0, c.b, c.a, 0.0, 0.0, c.d, c.c, 1.0;
  return {A, c};
}

Minors minors(const BoundaryConditions& bc) {
  Minors m;
  const auto& A = bc.A;
  for (int j = 1; j <= 4; ++j)
    for (int k = 1; k <= 4; ++k)
      m.J[j][k] = A(0, j - 1) * A(1, k - 1) - A(0, k - 1) * A(1, j - 1);
  return m;
}

Canonical canonicalize(const BoundaryConditions& bc) {
  const auto& A = bc.A;
  cplx J14 = minors(bc)(1, 4);
  double scale = A.cwiseAbs().maxCoeff();
  if (std::abs(J14) <= 1e-14 * std::max(1.0, scale * scale))
    throw NotCanonicalizable("J14 = 0: boundary conditions have no canonical form");
  Mat2 A14;
  A14 << A(0, 0), A(0, 3), A(1, 0), A(1, 3);
  Mat24 M = A14.inverse() * A;
  return {M(0, 2), M(0, 1), M(1, 2), M(1, 1)};
}

std::optional<Ratio> detect_ratio(double b1, double b2) {
  const double r = -b1 / b2;
  // convergents p/q of r
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = r;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(x);
    long p2 = static_cast<long>(a) * p1 + p0, q2 = static_cast<long>(a) * q1 + q0;
    if (q2 > 64) break;
    if (p2 > 0 && std::abs(r - double(p2) / double(q2)) <= 1e-12 * std::max(1.0, r))
      return Ratio{static_cast<int>(p2), static_cast<int>(q2)};
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double frac = x - a;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

cplx delta0(const Canonical& c, double b1, double b2, cplx l) {
  return c.d + c.a * std::exp(I * (b1 + b2) * l) + (c.a * c.d - c.b * c.c) * std::exp(I * b1 * l) +
         std::exp(I * b2 * l);
}

cplx delta0_prime(const Canonical& c, double b1, double b2, cplx l) {
  return I * (b1 + b2) * c.a * std::exp(I * (b1 + b2) * l) +
         I * b1 * (c.a * c.d - c.b * c.c) * std::exp(I * b1 * l) + I * b2 * std::exp(I * b2 * l);
}

namespace {

cplx horner(const std::vector<cplx>& c, cplx z, cplx* deriv) {
  cplx p = 0, dp = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    dp = dp * z + p;
    p = p * z + *it;
  }
  if (deriv) *deriv = dp;
  return p;
}

}  // namespace

std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs) {
  std::vector<cplx> c = coeffs;
  while (!c.empty() && c.back() == cplx{}) c.pop_back();
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return {};
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) C(0, k) = -c[n - 1 - k] / c[n];
  for (int k = 1; k < n; ++k) C(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  for (auto& z : roots) {
    for (int it = 0; it < 8; ++it) {
      cplx dp;
      cplx p = horner(c, z, &dp);
      if (dp == cplx{}) break;
      cplx zn = z - p / dp;
      if (std::abs(horner(c, zn, nullptr)) >= std::abs(p)) break;
      z = zn;
    }
  }
  return roots;
}

std::vector<cplx> delta0_polynomial(const Canonical& c, const Ratio& r) {
  std::vector<cplx> p(r.n1 + r.n2 + 1, cplx{});
  p[0] += c.a * c.d - c.b * c.c;
  p[r.n1] += c.d;
  p[r.n2] += c.a;
  p[r.n1 + r.n2] += 1.0;
  return p;
}

bool has_multiple_roots(const std::vector<cplx>& roots) {
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (std::abs(roots[i] - roots[j]) <= 1e-6 * std::max(1.0, std::abs(roots[i]))) return true;
  return false;
}

RegularityVerdict classify(const BoundaryConditions& bc, double b1, double b2, std::optional<Ratio> hint) {
  if (!(b1 < 0 && b2 > 0)) throw std::invalid_argument("classify: need b1 < 0 < b2");
  RegularityVerdict v;
  Minors m = minors(bc);
  double scale = bc.A.cwiseAbs().maxCoeff();
  scale = std::max(1.0, scale * scale);
  if (std::abs(m(1, 4)) <= 1e-14 * scale || std::abs(m(3, 2)) <= 1e-14 * scale) {
    v.kind = Regularity::nonregular;
    v.reason = "j14_j32_zero";
    return v;
  }
  Canonical c = canonicalize(bc);
  if (hint) {
    v.ratio = hint;
    v.ratio_path = "hint";
  } else if (auto r = detect_ratio(b1, b2)) {
    v.ratio = r;
    v.ratio_path = "detected";
  } else {
    v.ratio_path = "irrational";
  }
  auto set = [&](Regularity k, const char* why) {
    v.kind = k;
    v.reason = why;
    return v;
  };
  const double mag = std::abs(c.a) + std::abs(c.b) + std::abs(c.c) + std::abs(c.d);
  const cplx bcp = c.b * c.c;

  if (std::abs(b1 + b2) <= 1e-12 * std::max(-b1, b2)) {
    cplx disc = (c.a - c.d) * (c.a - c.d) + 4.0 * bcp;
    if (near_zero(disc, mag * mag)) return set(Regularity::regular, "dirac_discriminant_zero");
    return set(Regularity::strictly_regular, "dirac_discriminant_nonzero");
  }
  if (near_zero(c.a, mag) && near_zero(c.d, mag)) return set(Regularity::strictly_regular, "separated");

  if (near_zero(bcp, mag * mag)) {
    double L = b1 * std::log(std::abs(c.d)) + b2 * std::log(std::abs(c.a));
    double Ls = std::abs(b1 * std::log(std::abs(c.d))) + std::abs(b2 * std::log(std::abs(c.a)));
    if (std::abs(L) > kTol * std::max(1.0, Ls)) return set(Regularity::strictly_regular, "bc_zero_distinct_lines");
    if (!v.ratio) return set(Regularity::regular, "bc_zero_same_line");
    double theta = v.ratio->n1 * std::arg(-c.d) - v.ratio->n2 * std::arg(-c.a);
    bool anti = std::abs(c.a - 1.0) <= kTol && std::abs(c.d - 1.0) <= kTol;
    if (is_int_multiple_of_2pi(theta))
      return set(Regularity::regular, anti ? "antiperiodic_n1_minus_n2_even" : "bc_zero_coincident");
    return set(Regularity::strictly_regular, anti ? "antiperiodic_n1_minus_n2_odd" : "bc_zero_arg_separated");
  }

  if (v.ratio) {
    const int n1 = v.ratio->n1, n2 = v.ratio->n2;
    if (near_zero(c.a, mag)) {
      // compare in logs to avoid overflow for large n1, n2
      cplx lhs = n1 * std::log(double(n1)) + n2 * std::log(double(n2)) + double(n1 + n2) * std::log(-c.d);
      cplx rhs = double(n1 + n2) * std::log(double(n1 + n2)) + double(n2) * std::log(-bcp);
      cplx diff = lhs - rhs;
      bool equal = std::abs(diff.real()) <= kTol * std::max(1.0, std::abs(lhs.real())) &&
                   is_int_multiple_of_2pi(diff.imag());
      if (equal) return set(Regularity::regular, "a_zero_rational_double_root");
      return set(Regularity::strictly_regular, "a_zero_rational");
    }
    auto roots = poly_roots(delta0_polynomial(c, *v.ratio));
    if (has_multiple_roots(roots)) return set(Regularity::regular, "polynomial_multiple_roots");
    return set(Regularity::strictly_regular, "polynomial_simple_roots");
  }

  if (near_zero(c.a, mag) && std::abs(c.d.imag()) <= kTol * mag && std::abs(bcp.imag()) <= kTol * mag * mag) {
    const double al = -b1 / b2;
    const double thr = -(al + 1.0) * std::pow(std::abs(bcp) * std::pow(al, -al), 1.0 / (al + 1.0));
    if (std::abs(c.d.real() - thr) <= kTol * std::max(1.0, std::abs(thr)))
      return set(Regularity::regular, "a_zero_real_threshold");
    return set(Regularity::strictly_regular, "a_zero_real");
  }
  return set(Regularity::regular_unknown_strictness, "irrational_unknown");
}

}  // namespace dts::boundary
