#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modeconv/chsh.hpp"
#include "modeconv/electrode.hpp"
#include "modeconv/modesolver.hpp"

namespace modeconv {

struct WavelengthTriple {
  double pump_um = 0.392;
  double signal_um = 0.750776;  // H photon
  double idler_um = 0.820435;   // V photon
};

struct SpdcOptions {
  double crystal_length_um = 1000.0;
  std::optional<double> qpm_period_um;  // empty: solved so both processes are matched on average
  double window_half_width_nm = 12.0;
  int spectrum_points = 481;
  int interpolation_nodes = 5;
};

struct SweepOptions {
  std::vector<double> half_gaps_um;
  std::vector<double> offsets_um;
  double max_voltage = 30.0;
  int voltage_points = 121;
};

struct RunConfig {
  std::filesystem::path material_path;
  WaveguideGeometry source{5.0, 2.0, 0.02, 1.0};
  WaveguideGeometry converter{3.0, 2.0, 0.02, 1.0};
  GridOptions grid;
  SolveOptions solve;
  ElectrodeConfig electrode{1.3, 0.95, 100.0, 20000.0, 1.0, 1.0};
  WavelengthTriple wavelengths;
  SpdcOptions spdc;
  std::optional<double> state_w;
  std::optional<double> state_v;
  OptimizerOptions optimizer;
  SweepOptions sweep;
  int field_stride = 4;  // export every n-th grid node of mode fields
  std::filesystem::path output_dir = "out";

  void validate() const;  // throws ConfigError
};

// Parses YAML text. Relative paths resolve against `base_dir`. Each override is KEY=VALUE with a
// dotted key path (e.g. electrode.offset_um=1.1); overrides take precedence over file values,
// which take precedence over built-in defaults.
RunConfig parse_run_config(const std::string& text, const std::string& source_name,
                           const std::filesystem::path& base_dir, const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace modeconv
