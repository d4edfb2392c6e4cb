#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dts/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dirac-type boundary value problems: kernels, spectra, stability and Bari checks"};
  app.set_version_flag("--version", dts::cli::kVersion);
  std::string task, config;
  std::optional<std::string> out;
  app.add_option("task", task, "classify | spectrum | kernels | stability | bari | fourier")->required();
  app.add_option("--config", config, "experiment config (JSON)")->required();
  app.add_option("--out", out, "output directory (overrides the config's output)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  return dts::cli::run(task, config, out, std::cerr);
}
