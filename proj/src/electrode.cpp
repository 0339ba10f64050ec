#include "modeconv/electrode.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "modeconv/errors.hpp"

namespace modeconv {

void ElectrodeConfig::validate() const {
  if (!(half_gap_um > 0.0)) throw std::invalid_argument("electrode half gap must be positive");
  if (!(period_um > 0.0)) throw std::invalid_argument("electrode period must be positive");
  if (!(length_um > 0.0)) throw std::invalid_argument("electrode length must be positive");
  if (!std::isfinite(voltage) || !std::isfinite(offset_um) || !std::isfinite(modulation_depth))
    throw std::invalid_argument("electrode voltage, offset and modulation depth must be finite");
}

std::string ElectrodeConfig::period_warning() const {
  const double periods = length_um / period_um;
  if (std::abs(periods - std::round(periods)) <= 1e-6 * periods) return {};
  std::ostringstream os;
  os << "electrode length " << length_um << " um is not an integer number of " << period_um
     << " um periods (" << periods << ")";
  return os.str();
}

double ez_field(const ElectrodeConfig& config, double y_um, double z_um) {
  if (z_um < 0.0) throw DomainError("ez_field: z must be >= 0 (inside the substrate)");
  const double a = config.half_gap_um;
  const double y = y_um - config.offset_um;
  const double z = z_um;
  const double a2 = a * a;
  const double y2 = y * y;
  const double z2 = z * z;
  // R^2 = a^4 + y^4 + z^4 + 2 y^2 z^2 + 2 a^2 (z^2 - y^2) = (y^2 + z^2 - a^2)^2 + 4 a^2 z^2
  const double q = y2 + z2 - a2;
  const double r = std::sqrt(q * q + 4.0 * a2 * z2);
  if (r <= 1e-12 * a2) throw DomainError("ez_field: evaluation at an electrode edge");
  // numerator -(a^2 + z^2 - y^2) + R, rearranged to avoid cancellation when it is small
  const double p = y2 - a2 - z2;
  const double num = p >= 0.0 ? p + r : 4.0 * y2 * z2 / (r - p);
  return config.voltage / (std::numbers::pi * std::numbers::sqrt2) * std::sqrt(num) / r;
}

Grid2D index_modulation(const ElectrodeConfig& config, const ElectroOpticTensor& eo, Polarization pol,
                        const Grid2D& n_profile) {
  config.validate();
  const GridSpec& s = n_profile.spec;
  const double r = eo.r_i3(polarization_axis(pol));
  const double left_edge = config.offset_um - config.half_gap_um;
  const double right_edge = config.offset_um + config.half_gap_um;
  Grid2D out(s);
  for (int i = 0; i < s.ny; ++i) {
    const double y = s.y(i);
    for (int j = 0; j < s.nz; ++j) {
      const double z = s.z(j);
      if (z < 0.0) continue;
      if (std::hypot(y - left_edge, z) < kEdgeExclusionUm || std::hypot(y - right_edge, z) < kEdgeExclusionUm)
        continue;
      const double e = config.modulation_depth * ez_field(config, y, z);
      out.at(i, j) = eo_index_shift(n_profile.at(i, j), r, e);
    }
  }
  return out;
}

std::vector<FieldSample> field_map(const ElectrodeConfig& config, double y_min, double y_max, double z_max,
                                   double step_um) {
  if (!(step_um > 0.0) || !(y_max > y_min) || !(z_max >= 0.0)) throw std::invalid_argument("field_map: bad window");
  std::vector<FieldSample> out;
  const int ny = static_cast<int>(std::floor((y_max - y_min) / step_um + 1e-9)) + 1;
  const int nz = static_cast<int>(std::floor(z_max / step_um + 1e-9)) + 1;
  for (int i = 0; i < ny; ++i) {
    const double y = y_min + i * step_um;
    for (int j = 0; j < nz; ++j) {
      const double z = j * step_um;
      double e = 0.0;
      try {
        e = ez_field(config, y, z);
      } catch (const DomainError&) {
        e = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back({y, z, e});
    }
  }
  return out;
}

}  // namespace modeconv
