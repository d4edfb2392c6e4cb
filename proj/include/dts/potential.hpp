#pragma once

#include <random>
#include <string>
#include <vector>

#include "dts/gridfn.hpp"

namespace dts::potential {

using gridfn::SampledFunction;
using gridfn::SampledPair;

struct TrigTerm {
  int k;
  cplx c;  // c e^{2 pi i k x}
};

SampledFunction trig(const std::vector<TrigTerm>& terms, int N);
// values.size() == breakpoints.size() + 1, breakpoints increasing in (0,1)
SampledFunction step(const std::vector<double>& breakpoints, const std::vector<cplx>& values, int N);

enum class Family { trig, step, spline };
Family family_from_string(const std::string& s);
std::string to_string(Family f);

// Random complex function of the given family (not normalised).
SampledFunction random_function(Family f, std::mt19937_64& rng, int N);
// Random (Q12, Q21) rescaled so that the L^p norm of the pair equals `norm`.
SampledPair random_pair(Family f, std::mt19937_64& rng, int N, double p, double norm);
// Low-degree trigonometric pair (|k| <= 3) with given L^p norm.
SampledPair random_smooth_pair(std::mt19937_64& rng, int N, double p, double norm);

// CSV rows "x, Re Q12, Im Q12, Re Q21, Im Q21"; x strictly increasing, spanning [0,1].
void save_csv(const std::string& path, const SampledPair& Q);
SampledPair load_csv(const std::string& path, int N);

}  // namespace dts::potential
