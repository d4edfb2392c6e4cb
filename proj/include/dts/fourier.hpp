#pragma once

#include <vector>

#include "dts/gridfn.hpp"
#include "dts/ode.hpp"

namespace dts::fourier {

using gridfn::PNorm;
using gridfn::SampledFunction;

// int_0^1 g(t) e^{i l t} dt, trapezoid
cplx fourier(const SampledFunction& g, cplx lambda);

// max over nodes x of |int_0^x g e^{i l t} dt|, cumulative trapezoid
double maximal_fourier(const SampledFunction& g, cplx lambda);

// sup_{s <= x} |int_0^s Q_jk(t) e^{i (b_k - b_j) l t} dt|, j = 3 - k; s runs over nodes
double sFk(const ode::DiracSystem& sys, double x, cplx lambda, int k);

struct BesselReport {
  double sum = 0;
  double norm_ref = 0;  // ||g||_p^{p'} (plain) or ||g||_p^p (weighted)
  double ratio = 0;
  bool weighted = false;
  PNorm p{2};
};

// Plain: sum F[g](mu_n)^{p'}. Weighted: sum (1+|n|)^{p-2} F[g](mu_n)^p with the caller's indices n.
// F is the maximal transform when use_maximal, else |fourier|. p in (1, 2].
BesselReport bessel_sum(const SampledFunction& g, const std::vector<cplx>& seq, const std::vector<int>& index,
                        PNorm p, bool weighted, bool use_maximal);

}  // namespace dts::fourier
