#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dts/boundary.hpp"
#include "dts/ode.hpp"
#include "dts/potential.hpp"
#include "dts/spectrum.hpp"
#include "dts/transformop.hpp"

namespace dts::stability {

using boundary::BoundaryConditions;
using gridfn::PNorm;
using ode::DiracSystem;

// Potentials in the ball lp_norm(Q, p) <= r. Sample k depends only on (seed, k).
struct PotentialBallSampler {
  PNorm p{2};
  double r = 1;
  std::uint64_t seed = 0;
  potential::Family family = potential::Family::trig;
  int N = 256;

  DiracSystem sample(double b1, double b2, std::uint64_t k) const;
};

struct DeviationRow {
  int n = 0;
  cplx lambda, lambda_t;
  double dlambda = 0;
  double dfn = 0;      // ||f_n - f~_n||_inf, eigenfunction reports only
  double delta_t = 0;  // |Delta_{Q~}(lambda_n)|
  bool head = false;
  bool skipped = false;  // eigenfunction vanished
};

struct Aggregates {
  double lpc_all = 0, lpc_tail = 0;            // sum d^{p'}
  double weighted_all = 0, weighted_tail = 0;  // sum (1+|n|)^{p-2} d^p
  double sup_all = 0, sup_tail = 0;
};

struct DeviationReport {
  std::vector<DeviationRow> rows;
  Aggregates eig, fn;
  int head = -1;  // rows with |n| <= head form the excluded head set
  double q_dev = 0;
  PNorm p{2};
  int N_max = 0;
};

// Aggregates of eigenvalue (which = 0) or eigenfunction (which = 1) deviations from the rows.
Aggregates aggregate(const std::vector<DeviationRow>& rows, PNorm p, int which);

DeviationReport eigen_deviation(const DiracSystem& Q, const DiracSystem& Qt, const BoundaryConditions& bc, int N_max,
                                PNorm p, const spectrum::ZeroOptions& opts = {});
// From precomputed windows on the same Lambda_0.
DeviationReport eigen_deviation(const spectrum::SpectrumWindow& W, const spectrum::SpectrumWindow& Wt, PNorm p,
                                double q_dev);

struct TwoSidedReport {
  std::vector<int> n;
  std::vector<double> ratio;  // |l_n - l~_n| / |Delta_{Q~}(l_n)|, exact-zero rows excluded
  double min_tail = 0, max_tail = 0;
  int head = -1;
};
TwoSidedReport two_sided_check(const DiracSystem& Q, const DiracSystem& Qt, const BoundaryConditions& bc, int N_max,
                               const spectrum::ZeroOptions& opts = {});

// F(x, l) = U_r(Phi_2) Phi_1(x) - U_r(Phi_1) Phi_2(x) at lambda; r = 1 or 2.
gridfn::SampledPair eigenfunction(const DiracSystem& sys, const BoundaryConditions& bc, cplx lambda, int row, int N);
// Row with the larger unperturbed cofactors at lambda0 (row 1 unless 4 |row1| < |row2|).
int eigenfunction_row(const BoundaryConditions& bc, double b1, double b2, cplx lambda0);

DeviationReport eigenfunction_deviation(const DiracSystem& Q, const DiracSystem& Qt, const BoundaryConditions& bc,
                                        int N_max, PNorm p, PNorm s_norm = PNorm::infinity(),
                                        const spectrum::ZeroOptions& opts = {});

struct BallRow {
  int pair = 0;
  double q_dev = 0;
  double kernel_Xinf = 0, kernel_X1 = 0;
  double eig_lpc = 0;  // (sum |l_n - l~_n|^{p'})^{1/p'}
  double fn_lpc = 0;
  double ratio_kernel_Xinf = 0, ratio_kernel_X1 = 0, ratio_eig = 0, ratio_fn = 0;
};
struct BallTable {
  std::vector<BallRow> rows;
  double max_ratio_kernel_Xinf = 0, max_ratio_kernel_X1 = 0, max_ratio_eig = 0, max_ratio_fn = 0;
};
struct BallOptions {
  int kernel_N = 256;
  bool eigenfunctions = true;
  spectrum::ZeroOptions zeros;
};
BallTable run_ball_experiment(const PotentialBallSampler& sampler, const BoundaryConditions& bc, double b1, double b2,
                              int pairs, int N_max, PNorm p, const BallOptions& opts = {});

void write_report_csv(std::ostream& out, const DeviationReport& r);
void write_report_csv(const std::string& path, const DeviationReport& r);
std::string report_json(const DeviationReport& r, const std::string& experiment_id, const std::string& bc_descriptor,
                        double radius);
std::string ball_table_json(const BallTable& t);

}  // namespace dts::stability
