#include "dts/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>

#include "dts/parallel.hpp"

namespace dts::spectrum {

using boundary::Canonical;
using boundary::Ratio;
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

namespace {

bool close(cplx z, cplx w, double rel) { return std::abs(z - w) <= rel * std::max(1.0, std::abs(z)); }

// sort by Re; runs with Re within 1e-9 sorted by Im
void canonical_sort(std::vector<cplx>& z) {
  std::sort(z.begin(), z.end(), [](cplx u, cplx v) { return u.real() < v.real(); });
  for (std::size_t i = 0; i < z.size();) {
    std::size_t j = i + 1;
    while (j < z.size() && z[j].real() - z[j - 1].real() <= 1e-9) ++j;
    std::sort(z.begin() + i, z.begin() + j, [](cplx u, cplx v) { return u.imag() < v.imag(); });
    i = j;
  }
}

// Index a sorted list; empty if not enough zeros on either side.
std::vector<IndexedZero> index_window(const std::vector<cplx>& z, int K) {
  auto it = std::find_if(z.begin(), z.end(), [](cplx w) { return w.real() >= -1e-9; });
  long i0 = it - z.begin();
  if (i0 < K || static_cast<long>(z.size()) - i0 < K + 1) return {};
  std::vector<IndexedZero> out;
  for (int n = -K; n <= K; ++n) {
    cplx w = z[i0 + n];
    int m = 0;
    for (long j = std::max(0L, i0 + n - 8); j < std::min<long>(z.size(), i0 + n + 9); ++j)
      if (close(z[j], w, 1e-6)) ++m;
    out.push_back({n, w, m});
  }
  return out;
}

// theta/s + 2 pi n/s + i eta, all n with |Re| <= L
void progression(std::vector<cplx>& out, double theta, double s, double eta, double L) {
  long M = static_cast<long>(std::ceil(L * std::abs(s) / (2 * kPi))) + 2;
  for (long n = -M; n <= M; ++n) {
    double re = (theta + 2 * kPi * n) / s;
    if (std::abs(re) <= L) out.emplace_back(re, eta);
  }
}

std::optional<cplx> newton_with(const DetFn& f, const DetFn& fp, cplx z, int max_iter) {
  cplx fz = f(z);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fz) < 1e-15) return z;
    cplx d;
    if (fp) {
      d = fp(z);
    } else {
      double h = 1e-6 * (1 + std::abs(z));
      d = (f(z + h) - f(z - h)) / (2 * h);
    }
    if (d == cplx{} || !std::isfinite(std::abs(d))) return std::nullopt;
    cplx step = fz / d;
    // damped step: halve until |f| does not grow
    cplx zn = z - step, fn = f(zn);
    for (int k = 0; k < 12 && !(std::abs(fn) <= std::abs(fz)); ++k) {
      step *= 0.5;
      zn = z - step;
      fn = f(zn);
    }
    if (!std::isfinite(std::abs(fn))) return std::nullopt;
    z = zn;
    fz = fn;
    if (std::abs(step) < 1e-13 * (1 + std::abs(z))) return z;
  }
  if (std::abs(fz) < 1e-10) return z;
  return std::nullopt;
}

// Total change of arg f along the polygonal contour, with adaptive refinement.
class ArgWalker {
 public:
  explicit ArgWalker(const DetFn& f) : f_(f) {}

  cplx eval(cplx z) const {
    cplx v = f_(z);
    if (std::abs(v) < 1e-13 || !std::isfinite(std::abs(v))) throw ContourTooClose("zero on contour");
    return v;
  }

  double segment(cplx za, cplx fa, cplx zb, cplx fb, int depth) const {
    double d = std::arg(fb / fa);
    if (std::abs(d) < 0.6 || depth > 40) {
      if (depth > 40 && std::abs(d) > 2.5) throw ContourTooClose("argument jump on contour");
      return d;
    }
    cplx zm = 0.5 * (za + zb), fm = eval(zm);
    return segment(za, fa, zm, fm, depth + 1) + segment(zm, fm, zb, fb, depth + 1);
  }

  int winding_box(double re0, double re1, double im0, double im1, double density) const {
    cplx corners[5] = {{re0, im0}, {re1, im0}, {re1, im1}, {re0, im1}, {re0, im0}};
    double total = 0;
    cplx z0 = corners[0], f0 = eval(z0);
    for (int s = 0; s < 4; ++s) {
      cplx a = corners[s], b = corners[s + 1];
      int n = std::max(8, static_cast<int>(std::ceil(std::abs(b - a) * density)));
      for (int k = 1; k <= n; ++k) {
        cplx z1 = a + (b - a) * (double(k) / n), f1 = eval(z1);
        total += segment(z0, f0, z1, f1, 0);
        z0 = z1;
        f0 = f1;
      }
    }
    double w = total / (2 * kPi);
    double r = std::round(w);
    if (std::abs(w - r) > 0.2) throw NonIntegerWinding("non-integer winding", w);
    return static_cast<int>(r);
  }

 private:
  const DetFn& f_;
};

struct Box {
  double re0, re1, im0, im1;
  cplx center() const { return {0.5 * (re0 + re1), 0.5 * (im0 + im1)}; }
  bool contains(cplx z, double slack = 0) const {
    return z.real() >= re0 - slack && z.real() <= re1 + slack && z.imag() >= im0 - slack && z.imag() <= im1 + slack;
  }
};

void box_recurse(const DetFn& f, const DetFn& fp, const ArgWalker& W, const Box& b, int count, double density,
                 std::vector<cplx>& out, int depth) {
  if (count <= 0) return;
  double w = b.re1 - b.re0, h = b.im1 - b.im0;
  if (count == 1) {
    if (auto z = newton_with(f, fp, b.center(), 60); z && b.contains(*z, 1e-12)) {
      out.push_back(*z);
      return;
    }
  }
  if (std::max(w, h) < 1e-7 || depth > 80) {
    cplx c = b.center();
    if (count > 1)
      if (auto z = newton_with(f, fp, c, 60); z && b.contains(*z, std::max(w, h))) c = *z;
    out.insert(out.end(), count, c);
    return;
  }
  static constexpr double fracs[] = {0.5, 0.4713, 0.5377, 0.4231, 0.5819, 0.3637};
  for (double s : fracs) {
    Box lo = b, hi = b;
    if (w >= h) {
      lo.re1 = hi.re0 = b.re0 + s * w;
    } else {
      lo.im1 = hi.im0 = b.im0 + s * h;
    }
    try {
      int cl = W.winding_box(lo.re0, lo.re1, lo.im0, lo.im1, density);
      int ch = count - cl;
      if (cl < 0 || ch < 0) continue;
      if (ch > 0 && W.winding_box(hi.re0, hi.re1, hi.im0, hi.im1, density) != ch) continue;
      box_recurse(f, fp, W, lo, cl, density, out, depth + 1);
      box_recurse(f, fp, W, hi, ch, density, out, depth + 1);
      return;
    } catch (const ContourTooClose&) {
    } catch (const NonIntegerWinding&) {
    }
  }
  // every split line hit a zero: report the cluster at the center
  out.insert(out.end(), count, b.center());
}

// Smallest y >= 0 such that g(y) holds, g monotone; bisection.
double first_true(const std::function<bool(double)>& g) {
  if (g(0)) return 0;
  double hi = 1;
  while (!g(hi)) {
    hi *= 2;
    if (hi > 1e4) return hi;
  }
  double lo = 0;
  for (int k = 0; k < 60; ++k) {
    double m = 0.5 * (lo + hi);
    (g(m) ? hi : lo) = m;
  }
  return hi;
}

std::vector<cplx> sweep_delta0(const Canonical& c, double b1, double b2, double L) {
  DetFn f = [&](cplx z) { return boundary::delta0(c, b1, b2, z); };
  DetFn fp = [&](cplx z) { return boundary::delta0_prime(c, b1, b2, z); };
  const double H = strip_bound(c, b1, b2) + 0.5;
  const double density = 24 * std::max(-b1, b2);
  ArgWalker W(f);
  std::vector<cplx> out;
  double x = -L - 0.0731;
  while (x < L) {
    double x1 = x + 1;
    for (int tries = 0;; ++tries) {
      try {
        int n = W.winding_box(x, x1, -H, H, density);
        box_recurse(f, fp, W, {x, x1, -H, H}, n, density, out, 0);
        break;
      } catch (const std::runtime_error&) {
        if (tries > 10) throw;
        x1 += 0.0137;
      }
    }
    x = x1;
  }
  return out;
}

}  // namespace

std::optional<cplx> newton(const DetFn& f, cplx z0, int max_iter) { return newton_with(f, {}, z0, max_iter); }

double strip_bound(const Canonical& c, double b1, double b2) {
  const double ad = std::abs(c.d), aa = std::abs(c.a), aJ = std::abs(c.a * c.d - c.b * c.c);
  const double p = -b1, q = b2;
  // Im lambda = y > 0: J e^{-i b1 lambda} dominates
  double up = aJ == 0 ? 0
                      : first_true([&](double y) { return aJ > ad * std::exp(-p * y) + aa * std::exp(-q * y) +
                                                                  std::exp(-(p + q) * y); });
  // Im lambda = -Y < 0: e^{i b2 lambda} dominates
  double dn = first_true(
      [&](double Y) { return 1 > ad * std::exp(-q * Y) + aa * std::exp(-p * Y) + aJ * std::exp(-(p + q) * Y); });
  return std::max(up, dn);
}

std::vector<IndexedZero> zeros_delta0(const Canonical& c, double b1, double b2, int N_max,
                                      std::optional<Ratio> ratio_hint) {
  if (!(b1 < 0 && b2 > 0)) throw std::invalid_argument("zeros_delta0: need b1 < 0 < b2");
  if (N_max < 0) throw std::invalid_argument("zeros_delta0: N_max < 0");
  const cplx J = c.a * c.d - c.b * c.c;
  if (std::abs(J) < 1e-14) throw std::domain_error("zeros_delta0: boundary conditions are not regular");
  const double tiny = 1e-14;
  const double density = (b2 - b1) / (2 * kPi);
  double L = (N_max + 3) / density + 2 * kPi / std::min(-b1, b2) + 1;
  std::optional<Ratio> ratio = ratio_hint ? ratio_hint : boundary::detect_ratio(b1, b2);

  for (int attempt = 0; attempt < 8; ++attempt, L *= 1.5) {
    std::vector<cplx> z;
    if (std::abs(c.b * c.c) < tiny) {
      progression(z, std::arg(-c.d), b2, -std::log(std::abs(c.d)) / b2, L);
      progression(z, std::arg(-1.0 / c.a), b1, std::log(std::abs(c.a)) / b1, L);
    } else if (std::abs(c.a) < tiny && std::abs(c.d) < tiny) {
      const double s = b2 - b1;
      progression(z, std::arg(c.b * c.c), s, -std::log(std::abs(c.b * c.c)) / s, L);
    } else if (ratio) {
      const double beta = b2 / ratio->n2;
      for (cplx r : boundary::poly_roots(boundary::delta0_polynomial(c, *ratio)))
        progression(z, std::arg(r), beta, -std::log(std::abs(r)) / beta, L);
      // polish simple zeros on Delta_0 itself
      for (cplx& w : z) {
        cplx f = boundary::delta0(c, b1, b2, w), d = boundary::delta0_prime(c, b1, b2, w);
        for (int k = 0; k < 3 && std::abs(d) > 1e-3 && std::abs(f) > 1e-15; ++k) {
          cplx wn = w - f / d;
          cplx fn = boundary::delta0(c, b1, b2, wn);
          if (!(std::abs(fn) < std::abs(f))) break;
          w = wn;
          f = fn;
          d = boundary::delta0_prime(c, b1, b2, w);
        }
      }
    } else {
      z = sweep_delta0(c, b1, b2, L);
    }
    canonical_sort(z);
    auto out = index_window(z, N_max);
    if (!out.empty()) return out;
  }
  throw std::runtime_error("zeros_delta0: could not fill the index window");
}

int count_zeros_disk(const DetFn& f, cplx center, double radius, int quad_nodes) {
  if (!(radius > 0) || quad_nodes < 8) throw std::invalid_argument("count_zeros_disk: bad contour");
  std::vector<cplx> v(quad_nodes), dv(quad_nodes), e(quad_nodes);
  double vmax = 0, vmin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < quad_nodes; ++k) {
    e[k] = std::exp(I * (2 * kPi * k / quad_nodes));
    cplx z = center + radius * e[k];
    double h = 1e-6 * (1 + std::abs(z));
    v[k] = f(z);
    dv[k] = (f(z + h) - f(z - h)) / (2 * h);
    vmax = std::max(vmax, std::abs(v[k]));
    vmin = std::min(vmin, std::abs(v[k]));
  }
  if (!(vmin > 1e-6 * vmax)) throw ContourTooClose("count_zeros_disk: zero near contour");
  // (1/2 pi i) int f'/f dz, dz = i r e dtheta
  cplx s = 0;
  for (int k = 0; k < quad_nodes; ++k) s += dv[k] / v[k] * radius * e[k];
  double w = (s / double(quad_nodes)).real();
  double r = std::round(w);
  if (std::abs(w - r) > 0.2) throw NonIntegerWinding("count_zeros_disk: non-integer winding", w);
  return static_cast<int>(r);
}

std::vector<cplx> zeros_in_box(const DetFn& f, const DetFn& fprime, double re0, double re1, double im0,
                               double im1) {
  if (!(re1 > re0 && im1 > im0)) throw std::invalid_argument("zeros_in_box: empty box");
  ArgWalker W(f);
  const double density = 64 / std::max(re1 - re0, im1 - im0) + 16;
  int n = W.winding_box(re0, re1, im0, im1, density);
  std::vector<cplx> out;
  box_recurse(f, fprime, W, {re0, re1, im0, im1}, n, density, out, 0);
  canonical_sort(out);
  return out;
}

SpectrumWindow zeros_deltaQ(const ode::DiracSystem& sys, const boundary::BoundaryConditions& bc, int N_max,
                            const ZeroOptions& opts) {
  const Canonical c = boundary::canonicalize(bc);
  const int K = N_max + opts.pad;
  const auto base = zeros_delta0(c, sys.b1, sys.b2, K);
  const int M = static_cast<int>(base.size());
  DetFn det = opts.det;
  if (!det) {
    det = [&sys, &bc, N = opts.ode_N](cplx z) { return ode::char_det_direct(sys, bc, z, N); };
  }

  // Newton from every lambda_n^0
  std::vector<std::optional<cplx>> nw(M);
  parallel_for(M, [&](int i) { nw[i] = newton(det, base[i].lambda); });

  std::vector<SpectrumEntry> E(M);
  for (int i = 0; i < M; ++i)
    E[i] = {base[i].n, base[i].lambda, nw[i].value_or(base[i].lambda), base[i].multiplicity, kNaN, false};

  std::vector<double> ladder = opts.ladder;
  std::sort(ladder.begin(), ladder.end());
  for (double eps : ladder) {
    // components of the 2 eps graph on lambda^0
    std::vector<int> parent(M);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
    for (int i = 0; i < M; ++i)
      for (int j = i + 1; j < M && base[j].lambda.real() - base[i].lambda.real() < 2 * eps + 1e-12; ++j)
        if (std::abs(base[i].lambda - base[j].lambda) < 2 * eps) parent[find(j)] = find(i);
    std::vector<std::vector<int>> comps;
    {
      std::vector<int> slot(M, -1);
      for (int i = 0; i < M; ++i) {
        int r = find(i);
        if (slot[r] < 0) {
          slot[r] = static_cast<int>(comps.size());
          comps.emplace_back();
        }
        comps[slot[r]].push_back(i);
      }
    }
    struct Job {
      std::vector<int> members;
      cplx center;
      double radius;
      int count = -1;
    };
    std::vector<Job> jobs;
    for (auto& m : comps) {
      if (std::all_of(m.begin(), m.end(), [&](int i) { return E[i].verified; })) continue;
      // outermost entries have unknown neighbours outside the list
      if (std::any_of(m.begin(), m.end(), [&](int i) { return i == 0 || i == M - 1; })) continue;
      cplx ctr = 0;
      for (int i : m) ctr += base[i].lambda;
      ctr /= double(m.size());
      double R = 0;
      for (int i : m) R = std::max(R, std::abs(base[i].lambda - ctr));
      R += eps;
      bool clean = true;
      for (int j = 0; j < M && clean; ++j)
        if (std::find(m.begin(), m.end(), j) == m.end() && std::abs(base[j].lambda - ctr) <= R + 1e-9) clean = false;
      if (clean) jobs.push_back({m, ctr, R});
    }
    parallel_for(static_cast<int>(jobs.size()), [&](int k) {
      try {
        jobs[k].count = count_zeros_disk(det, jobs[k].center, jobs[k].radius, opts.quad_nodes);
      } catch (const std::runtime_error&) {
        jobs[k].count = -1;
      }
    });
    for (auto& job : jobs) {
      if (job.count != static_cast<int>(job.members.size())) continue;
      auto inside = [&](cplx z) { return std::abs(z - job.center) < job.radius; };
      std::vector<cplx> D;
      auto add = [&](cplx z) {
        if (inside(z) && std::none_of(D.begin(), D.end(), [&](cplx w) { return close(w, z, 1e-7); }))
          D.push_back(z);
      };
      for (int i : job.members)
        if (nw[i]) add(*nw[i]);
      if (static_cast<int>(D.size()) < job.count) {
        for (int k = 0; k < 8; ++k)
          if (auto z = newton(det, job.center + 0.6 * job.radius * std::exp(I * (2 * kPi * k / 8 + 0.3)))) add(*z);
      }
      if (static_cast<int>(D.size()) < job.count) {
        // winding bisection inside the enclosing square
        try {
          double r = job.radius / std::sqrt(2.0);
          for (cplx z : zeros_in_box(det, {}, job.center.real() - r, job.center.real() + r,
                                     job.center.imag() - r, job.center.imag() + r))
            add(z);
        } catch (const std::runtime_error&) {
        }
      }
      // drop zeros already claimed by members verified at a finer level
      std::vector<int> open;
      for (int i : job.members) {
        if (E[i].verified) {
          std::erase_if(D, [&](cplx w) { return close(w, E[i].lambda, 1e-7); });
        } else {
          open.push_back(i);
        }
      }
      if (open.empty()) continue;
      canonical_sort(D);
      const int nd = static_cast<int>(D.size()), no = static_cast<int>(open.size());
      for (int k = 0; k < no; ++k) {
        auto& e = E[open[k]];
        if (nd == 0) {
          e.lambda = job.center;
          e.multiplicity = no;
        } else if (nd >= no) {
          e.lambda = D[k];
          e.multiplicity = 1;
        } else {
          // fewer distinct zeros than the count: the last one carries the cluster
          int j = std::min(k, nd - 1);
          e.lambda = D[j];
          e.multiplicity = j == nd - 1 ? no - nd + 1 : 1;
        }
        e.verified = true;
        e.ladder_eps = eps;
      }
    }
  }

  SpectrumWindow w;
  w.N_max = N_max;
  w.strip_height = strip_bound(c, sys.b1, sys.b2);
  for (const auto& e : E) {
    if (std::abs(e.n) > N_max) continue;
    w.entries.push_back(e);
    w.strip_height = std::max({w.strip_height, std::abs(e.lambda.imag()), std::abs(e.lambda0.imag())});
    if (!e.verified) w.head = std::max(w.head, std::abs(e.n));
  }
  return w;
}

int incompressible_density(const std::vector<cplx>& seq) {
  if (seq.empty()) return 0;
  double lo = seq[0].real(), hi = lo;
  for (cplx z : seq) {
    lo = std::min(lo, z.real());
    hi = std::max(hi, z.real());
  }
  std::vector<double> re;
  for (cplx z : seq) re.push_back(z.real());
  std::sort(re.begin(), re.end());
  int best = 0;
  for (double t = std::floor(lo) - 1; t <= std::ceil(hi) + 1; t += 0.25) {
    auto a = std::lower_bound(re.begin(), re.end(), t - 1 - 1e-12);
    auto b = std::upper_bound(re.begin(), re.end(), t + 1 + 1e-12);
    best = std::max(best, static_cast<int>(b - a));
  }
  return best;
}

void write_csv(const std::string& path, const SpectrumWindow& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, w);
}

void write_csv(std::ostream& out, const SpectrumWindow& w) {
  out << std::setprecision(17) << "n,re_lambda0,im_lambda0,re_lambda,im_lambda,multiplicity,ladder_eps\n";
  for (const auto& e : w.entries) {
    out << e.n << ',' << e.lambda0.real() << ',' << e.lambda0.imag() << ',' << e.lambda.real() << ','
        << e.lambda.imag() << ',' << e.multiplicity << ',';
    if (std::isnan(e.ladder_eps)) {
      out << "nan";
    } else {
      out << e.ladder_eps;
    }
    out << '\n';
  }
}

}  // namespace dts::spectrum
