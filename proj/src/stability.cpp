#include "dts/stability.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include <json.hpp>

#include "dts/parallel.hpp"

namespace dts::stability {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double conj_exp(PNorm p) { return p.p == 1.0 ? kInf : p.conj(); }

void check_p(PNorm p) {
  if (p.is_inf() || p.p > 2) throw std::invalid_argument("deviation sums need p in [1, 2]");
}

}  // namespace

DiracSystem PotentialBallSampler::sample(double b1, double b2, std::uint64_t k) const {
  std::mt19937_64 rng(splitmix(seed ^ splitmix(k)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double norm = r * (1.0 - u(rng));  // (0, r]
  auto Q = potential::random_pair(family, rng, N, p.p, norm);
  return DiracSystem(b1, b2, Q[0], Q[1]);
}

Aggregates aggregate(const std::vector<DeviationRow>& rows, PNorm p, int which) {
  Aggregates a;
  const double pc = conj_exp(p);
  for (const auto& r : rows) {
    if (which == 1 && r.skipped) continue;
    double d = which == 0 ? r.dlambda : r.dfn;
    double lpc = std::isinf(pc) ? 0 : std::pow(d, pc);
    double w = std::pow(1.0 + std::abs(r.n), p.p - 2) * std::pow(d, p.p);
    a.lpc_all += lpc;
    a.weighted_all += w;
    a.sup_all = std::max(a.sup_all, d);
    if (!r.head) {
      a.lpc_tail += lpc;
      a.weighted_tail += w;
      a.sup_tail = std::max(a.sup_tail, d);
    }
  }
  // p = 1: the l^inf "sum" is the sup
  if (std::isinf(pc)) {
    a.lpc_all = a.sup_all;
    a.lpc_tail = a.sup_tail;
  }
  return a;
}

DeviationReport eigen_deviation(const spectrum::SpectrumWindow& W, const spectrum::SpectrumWindow& Wt, PNorm p,
                                double q_dev) {
  check_p(p);
  if (W.N_max != Wt.N_max) throw std::invalid_argument("eigen_deviation: windows differ");
  DeviationReport r;
  r.p = p;
  r.N_max = W.N_max;
  r.q_dev = q_dev;
  r.head = std::max(W.head, Wt.head);
  for (int n = -W.N_max; n <= W.N_max; ++n) {
    const auto &e = W.at(n), &et = Wt.at(n);
    if (std::abs(e.lambda0 - et.lambda0) > 1e-9 * (1 + std::abs(e.lambda0)))
      throw std::runtime_error("eigen_deviation: windows do not share Lambda_0");
    DeviationRow row;
    row.n = n;
    row.lambda = e.lambda;
    row.lambda_t = et.lambda;
    row.dlambda = std::abs(e.lambda - et.lambda);
    row.head = std::abs(n) <= r.head;
    r.rows.push_back(row);
  }
  r.eig = aggregate(r.rows, p, 0);
  return r;
}

DeviationReport eigen_deviation(const DiracSystem& Q, const DiracSystem& Qt, const BoundaryConditions& bc, int N_max,
                                PNorm p, const spectrum::ZeroOptions& opts) {
  auto W = spectrum::zeros_deltaQ(Q, bc, N_max, opts);
  auto Wt = spectrum::zeros_deltaQ(Qt, bc, N_max, opts);
  auto r = eigen_deviation(W, Wt, p, (Q - Qt).norm(p));
  parallel_for(static_cast<int>(r.rows.size()), [&](int k) {
    r.rows[k].delta_t = std::abs(ode::char_det_direct(Qt, bc, r.rows[k].lambda, opts.ode_N));
  });
  return r;
}

TwoSidedReport two_sided_check(const DiracSystem& Q, const DiracSystem& Qt, const BoundaryConditions& bc, int N_max,
                               const spectrum::ZeroOptions& opts) {
  auto d = eigen_deviation(Q, Qt, bc, N_max, PNorm(2), opts);
  TwoSidedReport t;
  t.head = d.head;
  t.min_tail = kInf;
  t.max_tail = 0;
  for (const auto& r : d.rows) {
    if (r.dlambda < 1e-12) continue;  // 0/0
    double q = r.delta_t > 0 ? r.dlambda / r.delta_t : kInf;
    t.n.push_back(r.n);
    t.ratio.push_back(q);
    if (!r.head) {
      t.min_tail = std::min(t.min_tail, q);
      t.max_tail = std::max(t.max_tail, q);
    }
  }
  if (t.max_tail == 0) t.min_tail = 0;
  return t;
}

namespace {
// U_r applied to columns of the fundamental matrix, r = 0 or 1
std::array<cplx, 2> cofactors(const boundary::Mat24& A, int r, const Mat2& Phi1) {
  std::array<cplx, 2> u;
  for (int k = 0; k < 2; ++k) u[k] = A(r, k) + A(r, 2) * Phi1(0, k) + A(r, 3) * Phi1(1, k);
  return u;
}
}  // namespace

gridfn::SampledPair eigenfunction(const DiracSystem& sys, const BoundaryConditions& bc, cplx lambda, int row, int N) {
  if (row != 1 && row != 2) throw std::invalid_argument("eigenfunction: row must be 1 or 2");
  auto F = ode::fundamental_matrix(sys, lambda, N);
  auto u = cofactors(bc.A, row - 1, F.end());
  std::vector<cplx> f1(N + 1), f2(N + 1);
  for (int i = 0; i <= N; ++i) {
    const Mat2& P = F.at(i);
    f1[i] = u[1] * P(0, 0) - u[0] * P(0, 1);
    f2[i] = u[1] * P(1, 0) - u[0] * P(1, 1);
  }
  return {gridfn::SampledFunction(f1), gridfn::SampledFunction(f2)};
}

int eigenfunction_row(const BoundaryConditions& bc, double b1, double b2, cplx lambda0) {
  Mat2 P = Mat2::Zero();
  P(0, 0) = std::exp(I * b1 * lambda0);
  P(1, 1) = std::exp(I * b2 * lambda0);
  auto mag = [&](int r) {
    auto u = cofactors(bc.A, r, P);
    return std::hypot(std::abs(u[0]), std::abs(u[1]));
  };
  return 4 * mag(0) < mag(1) ? 2 : 1;
}

DeviationReport eigenfunction_deviation(const DiracSystem& Q, const DiracSystem& Qt, const BoundaryConditions& bc,
                                        int N_max, PNorm p, PNorm s_norm, const spectrum::ZeroOptions& opts) {
  auto W = spectrum::zeros_deltaQ(Q, bc, N_max, opts);
  auto Wt = spectrum::zeros_deltaQ(Qt, bc, N_max, opts);
  auto r = eigen_deviation(W, Wt, p, (Q - Qt).norm(p));
  const int N = opts.ode_N;
  parallel_for(static_cast<int>(r.rows.size()), [&](int k) {
    auto& row = r.rows[k];
    int ur = eigenfunction_row(bc, Q.b1, Q.b2, W.at(row.n).lambda0);
    auto f = eigenfunction(Q, bc, row.lambda, ur, N);
    auto ft = eigenfunction(Qt, bc, row.lambda_t, ur, N);
    double nf = gridfn::lp_norm(f, s_norm), nft = gridfn::lp_norm(ft, s_norm);
    if (!(nf > 1e-8) || !(nft > 1e-8)) {
      row.skipped = true;
      return;
    }
    gridfn::SampledPair d{f[0] * (1 / nf) - ft[0] * (1 / nft), f[1] * (1 / nf) - ft[1] * (1 / nft)};
    row.dfn = gridfn::sup_norm(d);
  });
  r.fn = aggregate(r.rows, p, 1);
  return r;
}

BallTable run_ball_experiment(const PotentialBallSampler& sampler, const BoundaryConditions& bc, double b1, double b2,
                              int pairs, int N_max, PNorm p, const BallOptions& opts) {
  BallTable t;
  const double pc = conj_exp(p);
  auto root = [&](double s) { return std::isinf(pc) ? s : std::pow(s, 1 / pc); };
  for (int k = 0; k < pairs; ++k) {
    auto Q = sampler.sample(b1, b2, 2 * k), Qt = sampler.sample(b1, b2, 2 * k + 1);
    BallRow row;
    row.pair = k;
    row.q_dev = (Q - Qt).norm(p);
    auto kd = transformop::kernel_deviation_norms(Q.resampled(opts.kernel_N), Qt.resampled(opts.kernel_N), p,
                                                  opts.kernel_N);
    row.kernel_Xinf = kd.dev_Xinf;
    row.kernel_X1 = kd.dev_X1;
    DeviationReport d = opts.eigenfunctions ? eigenfunction_deviation(Q, Qt, bc, N_max, p, PNorm::infinity(), opts.zeros)
                                            : eigen_deviation(Q, Qt, bc, N_max, p, opts.zeros);
    row.eig_lpc = root(d.eig.lpc_all);
    row.fn_lpc = root(d.fn.lpc_all);
    if (row.q_dev > 0) {
      row.ratio_kernel_Xinf = row.kernel_Xinf / row.q_dev;
      row.ratio_kernel_X1 = row.kernel_X1 / row.q_dev;
      row.ratio_eig = row.eig_lpc / row.q_dev;
      row.ratio_fn = row.fn_lpc / row.q_dev;
    }
    t.max_ratio_kernel_Xinf = std::max(t.max_ratio_kernel_Xinf, row.ratio_kernel_Xinf);
    t.max_ratio_kernel_X1 = std::max(t.max_ratio_kernel_X1, row.ratio_kernel_X1);
    t.max_ratio_eig = std::max(t.max_ratio_eig, row.ratio_eig);
    t.max_ratio_fn = std::max(t.max_ratio_fn, row.ratio_fn);
    t.rows.push_back(row);
  }
  return t;
}

void write_report_csv(const std::string& path, const DeviationReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_report_csv(out, r);
}

void write_report_csv(std::ostream& out, const DeviationReport& r) {
  out << std::setprecision(17) << "n,re_lambda,im_lambda,re_lambda_t,im_lambda_t,dlambda,dfn,delta_t,head,skipped\n";
  for (const auto& w : r.rows)
    out << w.n << ',' << w.lambda.real() << ',' << w.lambda.imag() << ',' << w.lambda_t.real() << ','
        << w.lambda_t.imag() << ',' << w.dlambda << ',' << w.dfn << ',' << w.delta_t << ',' << w.head << ','
        << w.skipped << '\n';
}

namespace {
nlohmann::json agg_json(const Aggregates& a) {
  return {{"lpc_all", a.lpc_all},         {"lpc_tail", a.lpc_tail}, {"weighted_all", a.weighted_all},
          {"weighted_tail", a.weighted_tail}, {"sup_all", a.sup_all}, {"sup_tail", a.sup_tail}};
}
}  // namespace

std::string report_json(const DeviationReport& r, const std::string& experiment_id, const std::string& bc_descriptor,
                        double radius) {
  nlohmann::json j;
  j["experiment"] = experiment_id;
  j["bc"] = bc_descriptor;
  j["p"] = r.p.p;
  j["r"] = radius;
  j["N_max"] = r.N_max;
  j["head"] = r.head;
  j["q_dev"] = r.q_dev;
  j["eigenvalues"] = agg_json(r.eig);
  j["eigenfunctions"] = agg_json(r.fn);
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& w : r.rows)
    rows.push_back({{"n", w.n},
                    {"lambda", {w.lambda.real(), w.lambda.imag()}},
                    {"lambda_t", {w.lambda_t.real(), w.lambda_t.imag()}},
                    {"dlambda", w.dlambda},
                    {"dfn", w.dfn},
                    {"delta_t", w.delta_t},
                    {"head", w.head},
                    {"skipped", w.skipped}});
  return j.dump(2);
}

std::string ball_table_json(const BallTable& t) {
  nlohmann::json j;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"pair", r.pair},
                    {"q_dev", r.q_dev},
                    {"kernel_Xinf", r.kernel_Xinf},
                    {"kernel_X1", r.kernel_X1},
                    {"eig_lpc", r.eig_lpc},
                    {"fn_lpc", r.fn_lpc},
                    {"ratio_kernel_Xinf", r.ratio_kernel_Xinf},
                    {"ratio_kernel_X1", r.ratio_kernel_X1},
                    {"ratio_eig", r.ratio_eig},
                    {"ratio_fn", r.ratio_fn}});
  j["max_ratio"] = {{"kernel_Xinf", t.max_ratio_kernel_Xinf},
                    {"kernel_X1", t.max_ratio_kernel_X1},
                    {"eig", t.max_ratio_eig},
                    {"fn", t.max_ratio_fn}};
  return j.dump(2);
}

}  // namespace dts::stability
