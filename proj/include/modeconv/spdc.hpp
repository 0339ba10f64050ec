#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "modeconv/material.hpp"
#include "modeconv/modesolver.hpp"

namespace modeconv {

// Type-II processes pumped by an H-polarized 10 mode:
//   One: 10_P -> 00_H (signal) + 10_V (idler)
//   Two: 10_P -> 10_H (signal) + 00_V (idler)
enum class Process { One = 1, Two = 2 };

struct ProcessModes {
  ModeOrder signal;
  ModeOrder idler;
};
ProcessModes process_modes(Process process);

inline constexpr ModeOrder kPumpOrder{1, 0};

struct QpmSourceConfig {
  double pump_wavelength_um = 0.392;
  double qpm_period_um = 6.956;
  double crystal_length_um = 1000.0;
  WaveguideGeometry geometry{5.0, 2.0, 0.02, 1.0};

  void validate() const;
};

// 1/lambda_i = 1/lambda_p - 1/lambda_s. Throws RangeError when no positive idler exists.
double idler_wavelength(double pump_um, double signal_um);

// Signal-wavelength window over which modes are solved and interpolated.
struct SpectralWindow {
  double signal_min_um = 0.738;
  double signal_max_um = 0.764;
  int nodes = 5;
};

struct ProcessSpectrum {
  Process process = Process::One;
  std::vector<double> signal_um;
  std::vector<double> idler_um;
  std::vector<double> amplitude;  // overlap (1/um) x sinc(mismatch L / 2)

  double intensity(std::size_t k) const { return amplitude[k] * amplitude[k]; }
};

// Source model with mode dispersion interpolated across the spectral window: modes are solved
// at Chebyshev nodes in signal wavelength (signal in H at lambda_s, idler in V at lambda_i) and
// propagation constants and triple overlaps are interpolated between them.
class SpdcModel {
 public:
  SpdcModel(const Material& material, QpmSourceConfig config, SpectralWindow window = {},
            const GridOptions& grid = {}, const SolveOptions& solve = {});

  const QpmSourceConfig& config() const { return config_; }
  const SpectralWindow& window() const { return window_; }
  void set_qpm_period(double period_um);
  const GuidedMode& pump_mode() const { return pump_; }

  double signal_beta(ModeOrder order, double signal_um) const;
  double idler_beta(ModeOrder order, double signal_um) const;
  double overlap(Process process, double signal_um) const;

  // beta_P - beta_s - beta_i (no grating term)
  double raw_mismatch(Process process, double signal_um) const;
  // beta_P - beta_s - beta_i - 2 pi / Lambda_QPM
  double qpm_mismatch(Process process, double signal_um) const;
  // Grating period that phase matches `process` at `signal_um`.
  double qpm_period_for(Process process, double signal_um) const;
  // Period phase matching both processes on average at `signal_um`.
  double balanced_qpm_period(double signal_um) const;
  // Root of qpm_mismatch in the window by bisection; NumericError when not bracketed.
  double phase_matched_signal(Process process) const;

  ProcessSpectrum process_spectrum(Process process, std::span<const double> signal_grid) const;

 private:
  void check_in_window(double signal_um) const;
  double interpolate(const std::vector<double>& values, double signal_um) const;

  QpmSourceConfig config_;
  SpectralWindow window_;
  GuidedMode pump_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  // [order 00, order 10] for signal (H) and idler (V); overlaps for processes One and Two
  std::array<std::vector<double>, 2> signal_beta_;
  std::array<std::vector<double>, 2> idler_beta_;
  std::array<std::vector<double>, 2> overlap_;
};

std::vector<double> uniform_grid(double first, double last, int points);

// Two-qubit state in the basis {|00,00>, |00,10>, |10,00>, |10,10>}, first slot the H photon's
// mode, second the V photon's mode. w and v record the source parameters it was built from.
struct TwoPhotonState {
  double w = 0.5;
  double v = 0.5;
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();

  double trace() const { return rho.trace().real(); }
  double purity() const { return (rho * rho).trace().real(); }
  double min_eigenvalue() const;
  bool is_hermitian(double tol = 1e-12) const;
};

// rho = w |01><01| + (1-w) |10><10| + v (|01><10| + |10><01|), requiring v <= sqrt(w(1-w)).
TwoPhotonState build_density_matrix(double w, double v);

struct StateParameters {
  double w = 0.0;
  double v = 0.0;
};

// w = N1/(N1+N2), v = |int a1 a2| / (N1+N2) on a shared grid (trapezoid rule).
StateParameters estimate_wv(const ProcessSpectrum& first, const ProcessSpectrum& second);

}  // namespace modeconv
