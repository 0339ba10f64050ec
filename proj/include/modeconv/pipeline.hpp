#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modeconv/chsh.hpp"
#include "modeconv/config.hpp"
#include "modeconv/coupler.hpp"
#include "modeconv/material.hpp"
#include "modeconv/spdc.hpp"

namespace modeconv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

// Failure inside a named pipeline stage; what() is "[stage] message".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message, int exit_code)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

// Runs `fn`, converting library exceptions into StageError (config problems -> exit 2,
// everything else -> exit 3). StageErrors pass through unchanged.
void run_stage(const std::string& stage, const std::function<void()>& fn);

Material load_stage_material(const RunConfig& config);

struct ModeRow {
  std::string section;
  GuidedMode mode;
};
std::vector<ModeRow> solve_all_modes(const RunConfig& config, const Material& material);

struct DesignResult {
  ConverterSection section_h;
  ConverterSection section_v;
  CouplingDesign design_h;
  CouplingDesign design_v;
  double full_transfer_voltage_h = 0.0;
  CrosstalkReport crosstalk;
};
DesignResult run_design(const RunConfig& config, const Material& material);

struct SpdcResult {
  double qpm_period_um = 0.0;
  bool qpm_period_solved = false;
  double period_process1_um = 0.0;
  double period_process2_um = 0.0;
  double pump_beta = 0.0;
  double overlap1 = 0.0;
  double overlap2 = 0.0;
  ProcessSpectrum spectrum1;
  ProcessSpectrum spectrum2;
  double peak_signal1_um = 0.0;  // grid argmax of |a1|^2
  double peak_signal2_um = 0.0;
  std::optional<double> matched_signal1_um;  // root of the mismatch, when bracketed
  std::optional<double> matched_signal2_um;
  StateParameters state;
};
SpdcResult run_spdc(const RunConfig& config, const Material& material);

struct ChshRun {
  StateParameters state;
  std::string state_source;  // "config" or "spdc"
  ChshResult result;
  double planar_bound = 0.0;
};
ChshRun run_chsh(const RunConfig& config, const Material& material);

// Subcommands: write their files into config.output_dir, log progress to `log`, and return the
// written paths in a fixed order. Throw StageError on failure.
std::vector<std::filesystem::path> cmd_modes(const RunConfig& config, std::ostream& log);
std::vector<std::filesystem::path> cmd_design(const RunConfig& config, std::ostream& log);
std::vector<std::filesystem::path> cmd_spdc(const RunConfig& config, std::ostream& log);
std::vector<std::filesystem::path> cmd_chsh(const RunConfig& config, std::ostream& log);
std::vector<std::filesystem::path> cmd_sweep(const RunConfig& config, std::ostream& log);

}  // namespace modeconv
