#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dts/boundary.hpp"
#include "dts/ode.hpp"

namespace dts::cli {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Task { classify, spectrum, kernels, stability, bari, fourier };
Task task_from_string(const std::string& s);
std::string to_string(Task t);

struct ExperimentConfig {
  std::optional<Task> task;
  double b1 = -1, b2 = 1;
  int N = 512;
  nlohmann::json potential = {{"type", "zero"}};
  std::optional<nlohmann::json> potential_tilde;
  boundary::BoundaryConditions bc = boundary::BoundaryConditions::from_canonical({0, 1, 1, 0});
  std::optional<boundary::Ratio> ratio;
  int N_max = 20;
  double p = 2, r = 1;
  std::uint64_t seed = 0;
  int pairs = 10;
  std::string family = "trig";
  double tol = 1e-10;
  int max_iter = 200;
  std::vector<cplx> lambdas;  // fourier task
  std::string output = ".";
  nlohmann::json raw;  // echo for the manifest
};

// Throws ConfigError on unknown keys, bad types or out-of-range knobs.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Potential spec: {"type": "zero"} | {"type": "trig", "Q12": [[k, re, im], ...], "Q21": [...]}
// | {"type": "step", "Q12": {"breakpoints": [...], "values": [[re, im], ...]}, "Q21": {...}}
// | {"type": "file", "path": "..."}
ode::DiracSystem load_potential(const nlohmann::json& spec, double b1, double b2, int N);

// FNV-1a of the canonical config dump and the version string, as 16 hex digits.
std::string manifest_hash(const nlohmann::json& raw);

// Exit codes: 0 ok, 1 invalid config, 2 numerical failure, 3 I/O failure.
int run(const std::string& task, const std::string& config_path, const std::optional<std::string>& out_dir,
        std::ostream& err);

}  // namespace dts::cli
