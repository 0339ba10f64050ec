#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modeconv/config.hpp"
#include "modeconv/errors.hpp"
#include "modeconv/pipeline.hpp"

namespace {

using Command = std::vector<std::filesystem::path> (*)(const modeconv::RunConfig&, std::ostream&);

struct Subcommand {
  const char* name;
  const char* help;
  Command run;
};

constexpr Subcommand kCommands[] = {
    {"modes", "Solve and export guided modes of the source and converter sections", modeconv::cmd_modes},
    {"design", "Grating periods, coupling per volt, crosstalk and sweeps for the converters", modeconv::cmd_design},
    {"spdc", "SPDC spectra of both processes and the estimated state parameters (w, v)", modeconv::cmd_spdc},
    {"chsh", "Optimal CHSH settings, S value and converter drive voltages", modeconv::cmd_chsh},
    {"sweep", "Coupling strength over a grid of electrode half gaps and offsets", modeconv::cmd_sweep},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mode-converter entangled photon source design tool"};
  app.require_subcommand(1);

  std::string config_path = "configs/device.yaml";
  std::string out_dir;
  std::vector<std::string> overrides;
  const Subcommand* selected = nullptr;

  for (const auto& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("-c,--config", config_path, "YAML run configuration")->capture_default_str();
    sub->add_option("-o,--out", out_dir, "Output directory (overrides the config's 'output')");
    sub->add_option("--override", overrides, "KEY=VALUE with a dotted key, e.g. electrode.offset_um=1.1");
    sub->callback([&selected, &cmd] { selected = &cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : modeconv::kExitConfig;
  }

  try {
    modeconv::RunConfig config;
    modeconv::run_stage("config", [&] { config = modeconv::load_run_config(config_path, overrides); });
    if (!out_dir.empty()) config.output_dir = out_dir;
    const auto written = selected->run(config, std::cerr);
    for (const auto& path : written) std::cout << path.string() << '\n';
    return modeconv::kExitOk;
  } catch (const modeconv::StageError& e) {
    std::cerr << "error: " << selected->name << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << selected->name << ": " << e.what() << '\n';
    return modeconv::kExitNumeric;
  }
}
