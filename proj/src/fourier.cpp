#include "dts/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dts/parallel.hpp"

namespace dts::fourier {

namespace {

// running |int_0^{x_i}| maximum up to node imax
double running_max(const SampledFunction& g, cplx lambda, int imax) {
  const double h = g.h();
  cplx s = 0, prev = g[0];
  double best = 0;
  for (int i = 1; i <= imax; ++i) {
    cplx cur = g[i] * std::exp(I * lambda * g.node(i));
    s += 0.5 * h * (prev + cur);
    prev = cur;
    best = std::max(best, std::abs(s));
  }
  return best;
}

}  // namespace

cplx fourier(const SampledFunction& g, cplx lambda) {
  std::vector<cplx> y(g.N() + 1);
  for (int i = 0; i <= g.N(); ++i) y[i] = g[i] * std::exp(I * lambda * g.node(i));
  return gridfn::trapz(y, g.h());
}

double maximal_fourier(const SampledFunction& g, cplx lambda) { return running_max(g, lambda, g.N()); }

double sFk(const ode::DiracSystem& sys, double x, cplx lambda, int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("sFk: k must be 1 or 2");
  const int j = 3 - k;
  const auto& q = sys.Q(j, k);
  int imax = static_cast<int>(std::floor(std::clamp(x, 0.0, 1.0) * q.N() + 1e-9));
  return running_max(q, (sys.b(k) - sys.b(j)) * lambda, imax);
}

BesselReport bessel_sum(const SampledFunction& g, const std::vector<cplx>& seq, const std::vector<int>& index,
                        PNorm p, bool weighted, bool use_maximal) {
  if (p.is_inf() || !(p.p > 1 && p.p <= 2)) throw std::invalid_argument("bessel_sum: p must lie in (1, 2]");
  if (weighted && index.size() != seq.size())
    throw std::invalid_argument("bessel_sum: weighted sum needs one index per entry");
  const double pc = p.p / (p.p - 1);
  std::vector<double> F(seq.size());
  parallel_for(static_cast<int>(seq.size()), [&](int n) {
    F[n] = use_maximal ? maximal_fourier(g, seq[n]) : std::abs(fourier(g, seq[n]));
  });
  BesselReport r;
  r.weighted = weighted;
  r.p = p;
  for (std::size_t n = 0; n < seq.size(); ++n)
    r.sum += weighted ? std::pow(1.0 + std::abs(index[n]), p.p - 2) * std::pow(F[n], p.p) : std::pow(F[n], pc);
  double gn = gridfn::lp_norm(g, p);
  r.norm_ref = std::pow(gn, weighted ? p.p : pc);
  r.ratio = r.norm_ref > 0 ? r.sum / r.norm_ref : 0;
  return r;
}

}  // namespace dts::fourier
