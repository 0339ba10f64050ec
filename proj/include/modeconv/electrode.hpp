#pragma once

#include <string>
#include <vector>

#include "modeconv/grid.hpp"
#include "modeconv/material.hpp"
#include "modeconv/modesolver.hpp"

namespace modeconv {

// Coplanar electrode pair on the crystal surface, periodically patterned along x.
// Electrode edges sit at y = offset -/+ half_gap; the waveguide is centred at y = 0.
struct ElectrodeConfig {
  double half_gap_um = 1.3;      // a
  double offset_um = 0.0;        // d
  double period_um = 100.0;      // Lambda
  double length_um = 20000.0;    // L
  double voltage = 1.0;          // V
  double modulation_depth = 1.0; // amplitude of the first longitudinal harmonic

  void validate() const;
  // Empty when the length holds an integer number of periods (within 1e-6 relative).
  std::string period_warning() const;
};

// Radius of the disk around each electrode edge excluded from field sampling.
inline constexpr double kEdgeExclusionUm = 0.010;

// Vertical field E_z (V/um) at (y, z), z >= 0 into the substrate, from the closed form for a
// coplanar strip pair with gap 2a centred at y = d. Throws DomainError at the edges (+-a, 0).
double ez_field(const ElectrodeConfig& config, double y_um, double z_um);

// Transverse envelope of the index modulation Delta n(y, z) for the given polarization,
// sampled on the nodes of `n_profile`. Zero in the cover and inside the edge-exclusion disks.
Grid2D index_modulation(const ElectrodeConfig& config, const ElectroOpticTensor& eo, Polarization pol,
                        const Grid2D& n_profile);

// Samples of E_z over a rectangular window, row-major (y outer), for export.
struct FieldSample {
  double y_um;
  double z_um;
  double e_z;
};
std::vector<FieldSample> field_map(const ElectrodeConfig& config, double y_min, double y_max, double z_max,
                                   double step_um);

}  // namespace modeconv
