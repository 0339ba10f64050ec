#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modeconv/grid.hpp"
#include "modeconv/material.hpp"

namespace modeconv {

// H: dominant field along y (sees n_y). V: dominant field along z (sees n_z).
enum class Polarization { H, V };

Polarization parse_polarization(std::string_view label);
char polarization_label(Polarization pol);
Axis polarization_axis(Polarization pol);

// Rectangular step-index core of width b and depth c directly below the surface z = 0.
struct WaveguideGeometry {
  double width_um = 0.0;
  double depth_um = 0.0;
  double delta_n = 0.0;
  double cover_index = 1.0;

  void validate() const;
};

// Cross-section discretization. Margins are measured from the core edges to the Dirichlet box.
struct GridOptions {
  double spacing_um = 0.025;
  double side_margin_um = 6.0;
  double bottom_margin_um = 4.0;
  double cover_margin_um = 1.0;
};

GridSpec make_grid_spec(const WaveguideGeometry& geometry, const GridOptions& options);

// Index profile n(y, z) sampled on the node layout of make_grid_spec().
Grid2D build_index_profile(const Material& material, const WaveguideGeometry& geometry,
                           Polarization pol, double wavelength_um, const GridOptions& options = {});

struct ModeOrder {
  int m = 0;  // nodes along y
  int n = 0;  // nodes along z

  friend bool operator==(const ModeOrder&, const ModeOrder&) = default;
};

std::string order_label(ModeOrder order);

struct GuidedMode {
  Polarization polarization = Polarization::H;
  ModeOrder order;
  double beta = 0.0;  // rad/um
  double wavelength_um = 0.0;
  Grid2D field;       // real profile, normalized to unit integral of psi^2
  double residual = 0.0;              // ||(L - beta^2) psi|| / (beta^2 ||psi||)
  double boundary_field_ratio = 0.0;  // max |psi| on the outermost node ring / peak

  double effective_index() const;
};

struct SolveOptions {
  // Interface conditions for the dominant field component: continuity of n^2 E across
  // interfaces normal to the field. false gives the plain scalar Helmholtz operator.
  bool semivectorial = true;
  double tolerance = 1e-10;
  int krylov_dim = 0;  // 0 picks max(3*max_modes + 20, 40)
  int max_restarts = 30;
  // Guidance threshold beta > k0 * cutoff_index; unset uses the largest index on the box boundary.
  std::optional<double> cutoff_index;
};

// Guided modes of the scalar/semivectorial Helmholtz problem
//   d2psi/dy2 + d2psi/dz2 + (k0^2 n^2 - beta^2) psi = 0
// with psi = 0 on the box. Returned by decreasing beta; a mode is guided when
// beta exceeds k0 times the largest index found on the box boundary.
std::vector<GuidedMode> solve_modes(const Grid2D& profile, Polarization pol, double wavelength_um,
                                    int max_modes, const SolveOptions& options = {});

// Convenience: profile + solve + pick the requested order. Throws NumericError if absent.
GuidedMode find_mode(const Grid2D& profile, Polarization pol, double wavelength_um, ModeOrder order,
                     int max_modes = 4, const SolveOptions& options = {});

// Sign changes of the field along y and z through its peak.
ModeOrder classify_order(const Grid2D& field);

// Pair overlap  int psi1 psi2 dy dz  or triple overlap  int psiP psiS psiI dy dz.
// Fields on different layouts are resampled onto the first mode's grid.
double mode_overlap(std::span<const GuidedMode* const> modes);
double mode_overlap(const GuidedMode& a, const GuidedMode& b);
double mode_overlap(const GuidedMode& a, const GuidedMode& b, const GuidedMode& c);

// Richardson estimate of the grid-converged propagation constant from solves at h and h/2.
struct ConvergenceReport {
  double beta_coarse = 0.0;
  double beta_fine = 0.0;
  double beta_extrapolated = 0.0;
  double change = 0.0;  // |beta_fine - beta_coarse|
};

ConvergenceReport check_convergence(const Material& material, const WaveguideGeometry& geometry,
                                    Polarization pol, double wavelength_um, ModeOrder order,
                                    const GridOptions& coarse, const SolveOptions& options = {});

}  // namespace modeconv
