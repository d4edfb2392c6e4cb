#include "dts/config.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dts/bari.hpp"
#include "dts/fourier.hpp"
#include "dts/potential.hpp"
#include "dts/spectrum.hpp"
#include "dts/stability.hpp"
#include "dts/transformop.hpp"

namespace dts::cli {

using nlohmann::json;

Task task_from_string(const std::string& s) {
  if (s == "classify") return Task::classify;
  if (s == "spectrum") return Task::spectrum;
  if (s == "kernels") return Task::kernels;
  if (s == "stability") return Task::stability;
  if (s == "bari") return Task::bari;
  if (s == "fourier") return Task::fourier;
  throw ConfigError("unknown task: " + s);
}

std::string to_string(Task t) {
  switch (t) {
    case Task::classify: return "classify";
    case Task::spectrum: return "spectrum";
    case Task::kernels: return "kernels";
    case Task::stability: return "stability";
    case Task::bari: return "bari";
    case Task::fourier: return "fourier";
  }
  return "?";
}

namespace {

void only_keys(const json& j, std::set<std::string> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

cplx to_cplx(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ": expected a number or [re, im]");
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where, long lo, long hi) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  long v = j.get<long>();
  if (v < lo || v > hi) throw ConfigError(where + ": out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

void check_potential_spec(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) throw ConfigError(where + ": missing type");
  const std::string t = j["type"];
  if (t == "zero") {
    only_keys(j, {"type"}, where);
  } else if (t == "trig") {
    only_keys(j, {"type", "Q12", "Q21"}, where);
    for (const char* q : {"Q12", "Q21"}) {
      if (!j.contains(q)) continue;
      if (!j[q].is_array()) throw ConfigError(where + "." + q + ": expected [[k, re, im], ...]");
      for (const auto& term : j[q])
        if (!term.is_array() || term.size() != 3 || !term[0].is_number_integer() || !term[1].is_number() ||
            !term[2].is_number())
          throw ConfigError(where + "." + q + ": each term is [k, re, im]");
    }
  } else if (t == "step") {
    only_keys(j, {"type", "Q12", "Q21"}, where);
    for (const char* q : {"Q12", "Q21"}) {
      if (!j.contains(q)) continue;
      only_keys(j[q], {"breakpoints", "values"}, where + "." + q);
      if (!j[q].contains("breakpoints") || !j[q].contains("values") || !j[q]["breakpoints"].is_array() ||
          !j[q]["values"].is_array())
        throw ConfigError(where + "." + q + ": needs breakpoints and values arrays");
    }
  } else if (t == "file") {
    only_keys(j, {"type", "path"}, where);
    if (!j.contains("path") || !j["path"].is_string()) throw ConfigError(where + ": file potential needs a path");
  } else {
    throw ConfigError(where + ": unknown potential type '" + t + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  c.raw = j;
  only_keys(j, {"task", "system", "potential_tilde", "bc", "ratio", "N_max", "p", "r", "seed", "pairs", "family",
                "tolerances", "lambdas", "output"},
            "config");
  if (j.contains("task")) {
    if (!j["task"].is_string()) throw ConfigError("task: expected a string");
    c.task = task_from_string(j["task"]);
  }
  if (j.contains("system")) {
    const auto& s = j["system"];
    only_keys(s, {"b1", "b2", "N", "potential"}, "system");
    if (s.contains("b1")) c.b1 = num(s["b1"], "system.b1");
    if (s.contains("b2")) c.b2 = num(s["b2"], "system.b2");
    if (s.contains("N")) c.N = integer(s["N"], "system.N", 8, 1 << 14);
    if (s.contains("potential")) c.potential = s["potential"];
  }
  if (!(c.b1 < 0 && c.b2 > 0)) throw ConfigError("system: need b1 < 0 < b2");
  check_potential_spec(c.potential, "system.potential");
  if (j.contains("potential_tilde")) {
    check_potential_spec(j["potential_tilde"], "potential_tilde");
    c.potential_tilde = j["potential_tilde"];
  }
  if (j.contains("bc")) {
    const auto& b = j["bc"];
    only_keys(b, {"canonical", "matrix"}, "bc");
    if (b.contains("canonical") == b.contains("matrix")) throw ConfigError("bc: give exactly one of canonical, matrix");
    if (b.contains("canonical")) {
      const auto& k = b["canonical"];
      only_keys(k, {"a", "b", "c", "d"}, "bc.canonical");
      boundary::Canonical cc{0, 0, 0, 0};
      if (k.contains("a")) cc.a = to_cplx(k["a"], "bc.canonical.a");
      if (k.contains("b")) cc.b = to_cplx(k["b"], "bc.canonical.b");
      if (k.contains("c")) cc.c = to_cplx(k["c"], "bc.canonical.c");
      if (k.contains("d")) cc.d = to_cplx(k["d"], "bc.canonical.d");
      c.bc = boundary::BoundaryConditions::from_canonical(cc);
    } else {
      const auto& m = b["matrix"];
      if (!m.is_array() || m.size() != 2 || !m[0].is_array() || m[0].size() != 4 || !m[1].is_array() ||
          m[1].size() != 4)
        throw ConfigError("bc.matrix: expected 2 rows of 4 entries");
      boundary::Mat24 A;
      for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 4; ++k) A(r, k) = to_cplx(m[r][k], "bc.matrix");
      try {
        c.bc = boundary::BoundaryConditions::from_matrix(A);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bc.matrix: ") + e.what());
      }
    }
  }
  if (j.contains("ratio")) {
    const auto& r = j["ratio"];
    if (!r.is_array() || r.size() != 2) throw ConfigError("ratio: expected [n1, n2]");
    c.ratio = boundary::Ratio{integer(r[0], "ratio", 1, 1 << 20), integer(r[1], "ratio", 1, 1 << 20)};
    double want = -c.b1 / c.b2, got = double(c.ratio->n1) / c.ratio->n2;
    if (std::abs(want - got) > 1e-12 * want) throw ConfigError("ratio: n1/n2 does not match -b1/b2");
  }
  if (j.contains("N_max")) c.N_max = integer(j["N_max"], "N_max", 0, 2000);
  if (j.contains("p")) {
    if (j["p"].is_string() && j["p"] == "inf") {
      c.p = kInf;
    } else {
      c.p = num(j["p"], "p");
      if (!(c.p >= 1)) throw ConfigError("p: must be >= 1");
    }
  }
  if (j.contains("r")) {
    c.r = num(j["r"], "r");
    if (!(c.r > 0)) throw ConfigError("r: must be positive");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("pairs")) c.pairs = integer(j["pairs"], "pairs", 0, 100000);
  if (j.contains("family")) {
    if (!j["family"].is_string()) throw ConfigError("family: expected a string");
    c.family = j["family"];
    try {
      potential::family_from_string(c.family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    only_keys(t, {"tol", "max_iter"}, "tolerances");
    if (t.contains("tol")) {
      c.tol = num(t["tol"], "tolerances.tol");
      if (!(c.tol > 0 && c.tol < 1)) throw ConfigError("tolerances.tol: must lie in (0, 1)");
    }
    if (t.contains("max_iter")) c.max_iter = integer(t["max_iter"], "tolerances.max_iter", 1, 100000);
  }
  if (j.contains("lambdas")) {
    if (!j["lambdas"].is_array()) throw ConfigError("lambdas: expected an array");
    for (const auto& l : j["lambdas"]) c.lambdas.push_back(to_cplx(l, "lambdas"));
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output: expected a string");
    c.output = j["output"];
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ode::DiracSystem load_potential(const json& spec, double b1, double b2, int N) {
  check_potential_spec(spec, "potential");
  const std::string t = spec["type"];
  if (t == "zero") return ode::DiracSystem::free(b1, b2, N);
  if (t == "file") {
    const std::string path = spec["path"];
    if (!std::filesystem::exists(path)) throw IoError("potential file not found: " + path);
    auto Q = potential::load_csv(path, N);
    return ode::DiracSystem(b1, b2, Q[0], Q[1]);
  }
  auto one = [&](const char* q) {
    if (!spec.contains(q)) return gridfn::SampledFunction::zero(N);
    if (t == "trig") {
      std::vector<potential::TrigTerm> terms;
      for (const auto& term : spec[q]) terms.push_back({term[0].get<int>(), {term[1].get<double>(), term[2].get<double>()}});
      return potential::trig(terms, N);
    }
    std::vector<double> br;
    for (const auto& b : spec[q]["breakpoints"]) br.push_back(num(b, "breakpoints"));
    std::vector<cplx> vals;
    for (const auto& v : spec[q]["values"]) vals.push_back(to_cplx(v, "values"));
    return potential::step(br, vals, N);
  };
  return ode::DiracSystem(b1, b2, one("Q12"), one("Q21"));
}

std::string manifest_hash(const json& raw) {
  std::string s = raw.dump() + "|" + kVersion;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

namespace {

class Outputs {
 public:
  Outputs(std::filesystem::path dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void text(const std::string& name, const std::string& body) {
    auto p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    if (!out) throw IoError("cannot write " + p.string());
    files_.push_back(name);
  }
  void json_doc(const std::string& name, json j) {
    j["manifest_hash"] = hash_;
    text(name, j.dump(2) + "\n");
  }
  void csv(const std::string& name, const std::string& body) { text(name, "# manifest " + hash_ + "\n" + body); }
  std::filesystem::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::string hash_;
  std::vector<std::string> files_;
};

void run_task(Task task, const ExperimentConfig& c, Outputs& out) {
  const gridfn::PNorm p(c.p);
  switch (task) {
    case Task::classify: {
      auto v = boundary::classify(c.bc, c.b1, c.b2, c.ratio);
      json j{{"kind", boundary::to_string(v.kind)}, {"reason", v.reason}, {"ratio_path", v.ratio_path}};
      j["ratio"] = v.ratio ? json::array({v.ratio->n1, v.ratio->n2}) : json(nullptr);
      out.json_doc("classify.json", j);
      return;
    }
    case Task::spectrum: {
      auto sys = load_potential(c.potential, c.b1, c.b2, c.N);
      spectrum::ZeroOptions o;
      o.ode_N = c.N;
      auto w = spectrum::zeros_deltaQ(sys, c.bc, c.N_max, o);
      std::ostringstream s;
      s << std::setprecision(17);
      spectrum::write_csv(s, w);
      out.csv("spectrum.csv", s.str());
      out.json_doc("spectrum.json", {{"N_max", w.N_max}, {"head", w.head}, {"strip_height", w.strip_height}});
      return;
    }
    case Task::kernels: {
      auto sys = load_potential(c.potential, c.b1, c.b2, c.N);
      auto K = transformop::build_kernels(sys, c.N, c.max_iter, c.tol);
      transformop::dump_kernel(out.path("kplus.bin").string(), K.Kplus);
      transformop::dump_kernel(out.path("kminus.bin").string(), K.Kminus);
      out.json_doc("kernels.json", {{"N", c.N},
                                    {"residual_R", K.residual_R},
                                    {"residual_P_plus", K.residual_Pplus},
                                    {"residual_P_minus", K.residual_Pminus},
                                    {"boundary_plus", K.boundary_plus},
                                    {"boundary_minus", K.boundary_minus},
                                    {"norm_Xinf_plus", gridfn::x_norm(K.Kplus, gridfn::XFamily::infinity, p)},
                                    {"norm_X1_plus", gridfn::x_norm(K.Kplus, gridfn::XFamily::one, p)}});
      return;
    }
    case Task::stability: {
      spectrum::ZeroOptions o;
      o.ode_N = c.N;
      if (c.potential_tilde) {
        auto Q = load_potential(c.potential, c.b1, c.b2, c.N);
        auto Qt = load_potential(*c.potential_tilde, c.b1, c.b2, c.N);
        auto r = stability::eigenfunction_deviation(Q, Qt, c.bc, c.N_max, p, gridfn::PNorm::infinity(), o);
        std::ostringstream s;
        stability::write_report_csv(s, r);
        out.csv("stability.csv", s.str());
        out.json_doc("stability.json", json::parse(stability::report_json(r, "pair", "bc", c.r)));
      } else {
        stability::PotentialBallSampler smp{p, c.r, c.seed, potential::family_from_string(c.family), c.N};
        stability::BallOptions bo;
        bo.zeros = o;
        bo.kernel_N = std::min(c.N, 256);
        auto t = stability::run_ball_experiment(smp, c.bc, c.b1, c.b2, c.pairs, c.N_max, p, bo);
        out.json_doc("stability.json", json::parse(stability::ball_table_json(t)));
      }
      return;
    }
    case Task::bari: {
      auto cc = boundary::canonicalize(c.bc);
      auto r = bari::bari_criterion(cc, c.b1, c.b2, c.N_max);
      auto j = json::parse(bari::to_json(r));
      j["selfadjoint"] = bari::selfadjoint_check(cc, c.b1, c.b2);
      out.json_doc("bari.json", j);
      return;
    }
    case Task::fourier: {
      auto sys = load_potential(c.potential, c.b1, c.b2, c.N);
      std::ostringstream s;
      s << std::setprecision(17)
        << "re_lambda,im_lambda,re_F12,im_F12,re_F21,im_F21,maxF12,maxF21,sF1,sF2\n";
      for (cplx l : c.lambdas) {
        cplx f12 = fourier::fourier(sys.Q12, l), f21 = fourier::fourier(sys.Q21, l);
        s << l.real() << ',' << l.imag() << ',' << f12.real() << ',' << f12.imag() << ',' << f21.real() << ','
          << f21.imag() << ',' << fourier::maximal_fourier(sys.Q12, l) << ','
          << fourier::maximal_fourier(sys.Q21, l) << ',' << fourier::sFk(sys, 1, l, 1) << ','
          << fourier::sFk(sys, 1, l, 2) << '\n';
      }
      out.csv("fourier.csv", s.str());
      return;
    }
  }
}

}  // namespace

int run(const std::string& task_name, const std::string& config_path, const std::optional<std::string>& out_dir,
        std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Task task = task_from_string(task_name);
    ExperimentConfig c = load_config(config_path);
    if (c.task && *c.task != task) throw ConfigError("config task '" + to_string(*c.task) + "' differs from '" + task_name + "'");
    const std::string hash = manifest_hash(c.raw);
    Outputs out(out_dir ? *out_dir : c.output, hash);
    try {
      run_task(task, c, out);
    } catch (const IoError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json m{{"tool", "dts"}, {"version", kVersion}, {"task", task_name}, {"hash", hash},
           {"config", c.raw},  {"timings", {{"total_s", secs}}}, {"outputs", out.files()}};
    out.text("manifest.json", m.dump(2) + "\n");
    return 0;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << "I/O failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace dts::cli
