#include "dts/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dts::potential {

SampledFunction trig(const std::vector<TrigTerm>& terms, int N) {
  return SampledFunction::from(
      [&](double x) {
        cplx s = 0;
        for (const auto& t : terms) s += t.c * std::exp(2.0 * std::numbers::pi * I * double(t.k) * x);
        return s;
      },
      N);
}

SampledFunction step(const std::vector<double>& br, const std::vector<cplx>& values, int N) {
  if (values.size() != br.size() + 1) throw std::invalid_argument("step: need one more value than breakpoints");
  for (std::size_t k = 0; k < br.size(); ++k)
    if (!(br[k] > 0 && br[k] < 1) || (k > 0 && br[k] <= br[k - 1]))
      throw std::invalid_argument("step: breakpoints must increase inside (0,1)");
  return SampledFunction::from(
      [&](double x) {
        auto it = std::upper_bound(br.begin(), br.end(), x);
        return values[it - br.begin()];
      },
      N);
}

Family family_from_string(const std::string& s) {
  if (s == "trig") return Family::trig;
  if (s == "step") return Family::step;
  if (s == "spline") return Family::spline;
  throw std::invalid_argument("unknown potential family: " + s);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::trig: return "trig";
    case Family::step: return "step";
    case Family::spline: return "spline";
  }
  return "?";
}

namespace {

cplx gauss(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double re = n(rng);
  return {re, n(rng)};
}

// natural cubic spline through (k/m, y_k), evaluated on the grid
SampledFunction spline(const std::vector<cplx>& y, int N) {
  const int m = static_cast<int>(y.size()) - 1;
  const double h = 1.0 / m;
  std::vector<cplx> M(m + 1, cplx{});
  if (m >= 2) {
    // tridiagonal solve for interior second derivatives
    std::vector<double> c(m + 1, 0.0);
    std::vector<cplx> d(m + 1, cplx{});
    for (int i = 1; i < m; ++i) {
      cplx rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
      double denom = 4.0 - (i > 1 ? c[i - 1] : 0.0);
      c[i] = 1.0 / denom;
      d[i] = (rhs - (i > 1 ? d[i - 1] : cplx{})) / denom;
    }
    for (int i = m - 1; i >= 1; --i) M[i] = d[i] - c[i] * M[i + 1];
  }
  return SampledFunction::from(
      [&](double x) {
        int i = std::min(static_cast<int>(x / h), m - 1);
        double t = x - i * h, u = h - t;
        return (M[i] * u * u * u + M[i + 1] * t * t * t) / (6 * h) + (y[i] / h - M[i] * h / 6.0) * u +
               (y[i + 1] / h - M[i + 1] * h / 6.0) * t;
      },
      N);
}

}  // namespace

SampledFunction random_function(Family f, std::mt19937_64& rng, int N) {
  switch (f) {
    case Family::trig: {
      std::uniform_int_distribution<int> deg(1, 3);
      int m = deg(rng);
      std::vector<TrigTerm> t;
      for (int k = -m; k <= m; ++k) t.push_back({k, gauss(rng) / (1.0 + std::abs(k))});
      return trig(t, N);
    }
    case Family::step: {
      std::uniform_int_distribution<int> pieces(2, 6);
      std::uniform_real_distribution<double> u(0.05, 0.95);
      int n = pieces(rng);
      std::vector<double> br;
      while (static_cast<int>(br.size()) < n - 1) {
        double b = u(rng);
        if (std::none_of(br.begin(), br.end(), [&](double c) { return std::abs(c - b) < 0.02; })) br.push_back(b);
      }
      std::sort(br.begin(), br.end());
      std::vector<cplx> v;
      for (int k = 0; k < n; ++k) v.push_back(gauss(rng));
      return step(br, v, N);
    }
    case Family::spline: {
      std::uniform_int_distribution<int> knots(3, 8);
      int m = knots(rng);
      std::vector<cplx> y;
      for (int k = 0; k <= m; ++k) y.push_back(gauss(rng));
      return spline(y, N);
    }
  }
  throw std::logic_error("bad family");
}

SampledPair random_pair(Family f, std::mt19937_64& rng, int N, double p, double norm) {
  SampledPair Q{random_function(f, rng, N), random_function(f, rng, N)};
  double n = gridfn::lp_norm(Q, gridfn::PNorm(p));
  if (n == 0) return Q;
  return {Q[0] * (norm / n), Q[1] * (norm / n)};
}

SampledPair random_smooth_pair(std::mt19937_64& rng, int N, double p, double norm) {
  return random_pair(Family::trig, rng, N, p, norm);
}

void save_csv(const std::string& path, const SampledPair& Q) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  const int N = Q[0].N();
  for (int i = 0; i <= N; ++i)
    out << Q[0].node(i) << ',' << Q[0][i].real() << ',' << Q[0][i].imag() << ',' << Q[1][i].real() << ','
        << Q[1][i].imag() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

SampledPair load_csv(const std::string& path, int N) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> xs;
  std::vector<cplx> q12, q21;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double v[5];
    for (double& d : v)
      if (!(ss >> d)) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": malformed row");
    std::string rest;
    if (ss >> rest) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": extra columns");
    if (!xs.empty() && !(v[0] > xs.back()))
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": x column not increasing");
    xs.push_back(v[0]);
    q12.emplace_back(v[1], v[2]);
    q21.emplace_back(v[3], v[4]);
  }
  if (xs.size() < 3) throw std::invalid_argument(path + ": need at least 3 rows");
  if (std::abs(xs.front()) > 1e-12 || std::abs(xs.back() - 1) > 1e-12)
    throw std::invalid_argument(path + ": x column must span [0,1]");
  // uniform file on the same grid: keep samples untouched
  const int M = static_cast<int>(xs.size()) - 1;
  bool uniform = true;
  for (int i = 0; i <= M && uniform; ++i) uniform = std::abs(xs[i] - double(i) / M) < 1e-12;
  SampledFunction a(q12), b(q21);
  if (uniform) return {a.resampled(N), b.resampled(N)};
  auto interp = [&](const std::vector<cplx>& q) {
    return SampledFunction::from(
        [&](double x) {
          auto it = std::upper_bound(xs.begin(), xs.end(), x);
          std::size_t k = std::clamp<std::size_t>(it - xs.begin(), 1, xs.size() - 1);
          double f = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
          return q[k - 1] * (1 - f) + q[k] * f;
        },
        N);
  };
  return {interp(q12), interp(q21)};
}

}  // namespace dts::potential
