#include "dts/bari.hpp"

#include <cmath>
#include <json.hpp>

namespace dts::bari {

double exp_mean(double y) {
  if (std::abs(y) < 1e-5) return 1 + y / 2 + y * y / 6;
  return std::expm1(y) / y;
}

EjQuantities ej_quantities(double b1, double b2, cplx lambda) {
  const double im = lambda.imag();
  return {std::exp(I * b1 * lambda), std::exp(I * b2 * lambda), exp_mean(-2 * b1 * im), exp_mean(2 * b1 * im),
          exp_mean(-2 * b2 * im), exp_mean(2 * b2 * im)};
}

namespace {

// generic pair, b != 0
BariTerm generic_term(const Canonical& c, double b1, double b2, cplx lambda) {
  auto q = ej_quantities(b1, b2, lambda);
  const double k = -b2 / b1;
  const cplx u = 1.0 + c.d / q.e2, v = 1.0 + c.a * q.e1;
  const double nb = std::norm(c.b);
  double f2 = nb * q.E1p + std::norm(v) * q.E2p;
  double g2 = std::norm(u) * q.E1m + k * k * nb * q.E2m;
  cplx fg = c.b * (u + k * v);
  BariTerm t;
  t.lambda0 = lambda;
  t.z = u * std::conj(v);
  if (std::abs(fg) < 1e-12) {
    t.degenerate = true;
    t.alpha = std::nan("");
  } else {
    t.alpha = f2 * g2 / std::norm(fg) - 1;
  }
  return t;
}

int diag_branch(const Canonical& c, double b1, double b2, cplx lambda) {
  return std::abs(c.d + std::exp(I * b2 * lambda)) <= std::abs(1.0 + c.a * std::exp(I * b1 * lambda)) ? 1 : 2;
}

Canonical reflect(const Canonical& c) { return {c.d, c.c, c.b, c.a}; }

}  // namespace

std::vector<BariTerm> bari_terms(const Canonical& c, double b1, double b2,
                                 const std::vector<spectrum::IndexedZero>& lambdas) {
  std::vector<BariTerm> out;
  const bool bz = std::abs(c.b) < 1e-14, cz = std::abs(c.c) < 1e-14;
  for (const auto& l : lambdas) {
    BariTerm t;
    if (bz && cz) {
      auto q = ej_quantities(b1, b2, l.lambda);
      t.lambda0 = l.lambda;
      t.branch = diag_branch(c, b1, b2, l.lambda);
      t.alpha = t.branch == 1 ? q.E2p * q.E2m - 1 : q.E1p * q.E1m - 1;
      t.z = (1.0 + c.d / q.e2) * std::conj(1.0 + c.a * q.e1);
    } else if (bz) {
      // x -> 1 - x with the components swapped maps the problem to one with b != 0
      t = generic_term(reflect(c), -b2, -b1, l.lambda);
      t.z = (1.0 + c.d * std::exp(-I * b2 * l.lambda)) * std::conj(1.0 + c.a * std::exp(I * b1 * l.lambda));
    } else {
      t = generic_term(c, b1, b2, l.lambda);
    }
    t.n = l.n;
    out.push_back(t);
  }
  return out;
}

QuadratureTerm bari_term_quadrature(const Canonical& c0, double b1, double b2, cplx lambda, int branch, int N) {
  if (N < 2 || N % 2) throw std::invalid_argument("Simpson needs an even N");
  Canonical c = c0;
  if (branch == 0 && std::abs(c.b) < 1e-14) {
    c = reflect(c0);
    std::swap(b1, b2);
    b1 = -b1;
    b2 = -b2;
  }
  const double k = -b2 / b1;
  const cplx e1 = std::exp(I * b1 * lambda), e2 = std::exp(I * b2 * lambda);
  auto f = [&](double x) -> std::array<cplx, 2> {
    if (branch == 1) return {cplx{}, std::exp(I * b2 * lambda * x)};
    if (branch == 2) return {std::exp(I * b1 * lambda * x), cplx{}};
    return {c.b * std::exp(I * b1 * lambda * x), -(1.0 + c.a * e1) * std::exp(I * b2 * lambda * x)};
  };
  // conjugate of g
  auto gb = [&](double x) -> std::array<cplx, 2> {
    if (branch == 1) return {cplx{}, std::exp(-I * b2 * lambda * x)};
    if (branch == 2) return {std::exp(-I * b1 * lambda * x), cplx{}};
    return {(1.0 + c.d / e2) * std::exp(-I * b1 * lambda * x), -k * c.b * std::exp(-I * b2 * lambda * x)};
  };
  QuadratureTerm q;
  const double h = 1.0 / N;
  for (int i = 0; i <= N; ++i) {
    double w = (i == 0 || i == N) ? 1 : (i % 2 ? 4 : 2);
    double x = i * h;
    auto fv = f(x), gv = gb(x);
    q.f2 += w * (std::norm(fv[0]) + std::norm(fv[1]));
    q.g2 += w * (std::norm(gv[0]) + std::norm(gv[1]));
    q.fg += w * (fv[0] * gv[0] + fv[1] * gv[1]);
  }
  q.f2 *= h / 3;
  q.g2 *= h / 3;
  q.fg *= h / 3;
  q.alpha = q.f2 * q.g2 / std::norm(q.fg) - 1;
  return q;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::bari: return "bari";
    case Verdict::not_bari: return "not_bari";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

BariReport bari_criterion(const Canonical& c, double b1, double b2, int N_max) {
  if (N_max < 4) throw std::invalid_argument("bari_criterion: N_max must be at least 4");
  BariReport r;
  r.rows = bari_terms(c, b1, b2, spectrum::zeros_delta0(c, b1, b2, N_max));
  r.gate = b1 * std::abs(c.c) + b2 * std::abs(c.b);
  for (const auto& t : r.rows)
    if (t.degenerate || !std::isfinite(t.alpha)) r.head = std::max(r.head, std::abs(t.n));

  r.partial_im2.assign(N_max + 1, 0);
  r.partial_z.assign(N_max + 1, 0);
  r.partial_alpha.assign(N_max + 1, 0);
  for (const auto& t : r.rows) {
    if (std::abs(t.n) <= r.head) continue;
    r.partial_im2[std::abs(t.n)] += std::norm(t.lambda0.imag());
    r.partial_z[std::abs(t.n)] += std::abs(t.z) - t.z.real();
    r.partial_alpha[std::abs(t.n)] += t.alpha;
  }
  for (int m = 1; m <= N_max; ++m) {
    r.partial_im2[m] += r.partial_im2[m - 1];
    r.partial_z[m] += r.partial_z[m - 1];
    r.partial_alpha[m] += r.partial_alpha[m - 1];
  }
  const int q = (3 * N_max) / 4;
  auto share = [&](const std::vector<double>& s) {
    double tot = s[N_max], last = tot - s[q];
    return tot > 0 ? last / tot : 0.0;
  };
  auto cauchy = [&](const std::vector<double>& s) {
    double last = s[N_max] - s[q];
    return last < 1e-10 || last < 1e-6 * s[N_max];
  };
  r.tail_im2 = share(r.partial_im2);
  r.tail_z = share(r.partial_z);

  if (r.head >= N_max) {
    r.verdict = Verdict::inconclusive;
    r.reason = "window is all head";
  } else if (std::abs(r.gate) > 1e-12) {
    r.verdict = Verdict::not_bari;
    r.reason = "gate b1|c| + b2|b| != 0";
  } else if (cauchy(r.partial_im2) && cauchy(r.partial_z)) {
    r.verdict = Verdict::bari;
    r.reason = "gate holds, both tails negligible";
  } else if (r.tail_im2 > 0.2 || r.tail_z > 0.2) {
    r.verdict = Verdict::not_bari;
    r.reason = r.tail_im2 > 0.2 ? "sum |Im l|^2 grows linearly" : "sum (|z| - Re z) grows linearly";
  } else {
    r.verdict = Verdict::inconclusive;
    r.reason = "tails neither negligible nor linear";
  }
  return r;
}

std::string to_json(const BariReport& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.verdict);
  j["reason"] = r.reason;
  j["gate"] = r.gate;
  j["head"] = r.head;
  j["tail_share"] = {{"im2", r.tail_im2}, {"z", r.tail_z}};
  j["thresholds"] = {{"gate", 1e-12}, {"cauchy_relative", 1e-6}, {"cauchy_absolute", 1e-10}, {"linear", 0.2}};
  j["partial_sums"] = {{"im2", r.partial_im2}, {"z", r.partial_z}, {"alpha", r.partial_alpha}};
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& t : r.rows)
    rows.push_back({{"n", t.n},
                    {"lambda0", {t.lambda0.real(), t.lambda0.imag()}},
                    {"im_lambda0", t.lambda0.imag()},
                    {"z", {t.z.real(), t.z.imag()}},
                    {"alpha", t.degenerate ? nlohmann::json(nullptr) : nlohmann::json(t.alpha)},
                    {"branch", t.branch}});
  return j.dump(2);
}

bool selfadjoint_check(const Canonical& c, double b1, double b2) {
  const double mu = std::sqrt(-b2 / b1);
  Mat2 M;
  M << c.a, mu * c.b, c.c / mu, c.d;
  return ((M * M.adjoint()) - Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace dts::bari
