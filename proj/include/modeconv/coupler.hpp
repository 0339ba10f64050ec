#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "modeconv/electrode.hpp"
#include "modeconv/grid.hpp"
#include "modeconv/material.hpp"
#include "modeconv/modesolver.hpp"

namespace modeconv {

struct CouplingCoefficients {
  double kappa12 = 0.0;  // 1/um, weighted by 1/beta_00
  double kappa21 = 0.0;  // 1/um, weighted by 1/beta_10
  double kappa = 0.0;    // sqrt(kappa12 * kappa21) >= 0
};

// Grating-assisted coupling strength between the 00 and 10 modes of one polarization for the
// transverse modulation envelope `modulation` (Delta n) and unperturbed profile `n_profile`.
CouplingCoefficients coupling_coefficients(const GuidedMode& mode00, const GuidedMode& mode10,
                                           const Grid2D& modulation, const Grid2D& n_profile);

// Lambda = 2 pi / delta_beta.
double design_grating_period(double delta_beta);

// Amplitude transfer (A, B)(x) = M (A, B)(0) across a grating section of length x, A the 00 and
// B the 10 amplitude. delta = (delta_beta - K) / 2, gamma = sqrt(kappa^2 + delta^2).
struct TransferMatrix {
  Eigen::Matrix2cd m;
  double delta = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double length = 0.0;

  std::complex<double> operator()(int row, int col) const { return m(row, col); }
  Eigen::Vector2cd apply(const Eigen::Vector2cd& amplitudes) const { return m * amplitudes; }
};

TransferMatrix transfer_matrix(double kappa, double delta, double length);

// Propagator from x0 to x0 + length. The coupled equations carry exp(+-2 i delta x), so a
// section starting at x0 differs from transfer_matrix() by the frame phases at x0; with it,
//   transfer_matrix(k, d, L1 + L2) == section_transfer_matrix(k, d, L1, L2) * transfer_matrix(k, d, L1).
TransferMatrix section_transfer_matrix(double kappa, double delta, double x0, double length);

struct ModePowers {
  double p00 = 0.0;
  double p10 = 0.0;
};

// Powers after propagating unit-norm input amplitudes over x. Throws if |a0|^2 + |b0|^2 != 1.
ModePowers power_evolution(double kappa, double delta, std::complex<double> a0, std::complex<double> b0, double x);

struct CouplingDesign {
  Polarization polarization = Polarization::H;
  double kappa_per_volt = 0.0;  // 1/(um V)
  double grating_period = 0.0;  // um
  double delta_beta = 0.0;      // rad/um
  double length = 20000.0;      // um

  void validate() const;
  double kappa_at(double voltage) const { return kappa_per_volt * voltage; }
  // detuning of this polarization under a grating of the given period
  double detuning(double grating_period_um) const;
};

// Fractions of launched power moved into the other spatial mode for both polarizations
// under one grating, plus the detuning-limited ceilings (kappa/gamma)^2.
struct GratingCrosstalk {
  double grating_period = 0.0;
  double voltage = 0.0;
  double delta_h = 0.0;
  double delta_v = 0.0;
  double fraction_h = 0.0;
  double fraction_v = 0.0;
  double ceiling_h = 0.0;
  double ceiling_v = 0.0;
};

struct CrosstalkReport {
  GratingCrosstalk grating_h;  // electrode pattern with period Lambda_H
  GratingCrosstalk grating_v;  // electrode pattern with period Lambda_V
};

GratingCrosstalk grating_crosstalk(const CouplingDesign& design_h, const CouplingDesign& design_v,
                                   double grating_period, double voltage);
CrosstalkReport crosstalk_analysis(const CouplingDesign& design_h, const CouplingDesign& design_v, double voltage);

// V = theta / (kappa_per_volt * L), theta in [0, pi].
double voltage_for_angle(double theta, const CouplingDesign& design);
// Voltage giving kappa L = pi / 2.
double full_transfer_voltage(const CouplingDesign& design);

// Transfer versus drive voltage: H launched in 00, V launched in 10, one grating.
struct VoltageSweepRow {
  double voltage;
  double p00_h;
  double p10_h;
  double p00_v;
  double p10_v;
};
std::vector<VoltageSweepRow> voltage_sweep(const CouplingDesign& design_h, const CouplingDesign& design_v,
                                           double grating_period, double max_voltage, int points);

// Two-mode converter section for one polarization: its 00/10 modes and index profile.
struct ConverterSection {
  Polarization polarization = Polarization::H;
  double wavelength_um = 0.0;
  Grid2D n_profile;
  GuidedMode mode00;
  GuidedMode mode10;
  int guided_count = 0;

  double delta_beta() const { return mode00.beta - mode10.beta; }
};

ConverterSection solve_converter_section(const Material& material, const WaveguideGeometry& geometry,
                                         Polarization pol, double wavelength_um, const GridOptions& grid = {},
                                         const SolveOptions& solve = {});

// Coupling per volt for the electrode geometry (its voltage field is ignored) and the
// phase-matched grating period for this section.
CouplingDesign design_coupler(const ConverterSection& section, const ElectrodeConfig& electrode,
                              const ElectroOpticTensor& eo);

// Kappa (at 1 V) over half-gap a and offset d.
struct KappaSweepRow {
  double half_gap_um;
  double offset_um;
  double kappa_h;
  double kappa_v;
};
std::vector<KappaSweepRow> kappa_sweep(const ConverterSection& section_h, const ConverterSection& section_v,
                                       const ElectroOpticTensor& eo, std::span<const double> half_gaps,
                                       std::span<const double> offsets);

}  // namespace modeconv
