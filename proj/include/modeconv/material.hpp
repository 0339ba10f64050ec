#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace modeconv {

// Principal axes of the crystal. Propagation is along x; H light sees n_y, V light sees n_z.
enum class Axis { X = 0, Y = 1, Z = 2 };

Axis parse_axis(std::string_view label);
char axis_label(Axis axis);

struct WavelengthRange {
  double min_um = 0.0;
  double max_um = 0.0;
  bool contains(double wavelength_um) const {
    return wavelength_um >= min_um && wavelength_um <= max_um;
  }
};

// Supported dispersion formulas (lambda in um):
//   PoleSquared: n^2 = A + B lambda^2 / (lambda^2 - C^2) - D lambda^2          coefficients {A, B, C, D}
//   TwoPole:     n^2 = A + B / (lambda^2 - C) + D / (lambda^2 - E)              coefficients {A, B, C, D, E}
enum class SellmeierForm { PoleSquared, TwoPole };

SellmeierForm parse_sellmeier_form(std::string_view name);
std::string_view sellmeier_form_name(SellmeierForm form);

class SellmeierSet {
 public:
  SellmeierSet(Axis axis, SellmeierForm form, std::vector<double> coefficients, WavelengthRange range);

  Axis axis() const { return axis_; }
  SellmeierForm form() const { return form_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  const WavelengthRange& valid_range() const { return range_; }

  // Throws RangeError outside valid_range.
  double index(double wavelength_um) const;

 private:
  Axis axis_;
  SellmeierForm form_;
  std::vector<double> coefficients_;
  WavelengthRange range_;
};

// Linear electro-optic coefficients in pm/V (contracted notation).
struct ElectroOpticTensor {
  double r13 = 0.0;
  double r23 = 0.0;
  double r33 = 0.0;
  double r42 = 0.0;
  double r51 = 0.0;

  // r_{i3}: the coefficient coupling E_z to the index along `axis`.
  double r_i3(Axis axis) const;

  static ElectroOpticTensor ktp();
};

inline constexpr double kPmPerVToUmPerV = 1e-6;

// Index shift -n^3 r_{i3} E_z / 2 with r in pm/V and E_z in V/um.
double eo_index_shift(double n, double r_pm_per_v, double e_z_v_per_um);

struct IndexPerturbation {
  double delta_n_x = 0.0;
  double delta_n_y = 0.0;
  double delta_n_z = 0.0;
};

class Material {
 public:
  Material(std::string name, std::string citation, std::array<std::optional<SellmeierSet>, 3> axes,
           ElectroOpticTensor eo);

  const std::string& name() const { return name_; }
  const std::string& citation() const { return citation_; }
  const ElectroOpticTensor& electro_optic() const { return eo_; }
  const SellmeierSet& sellmeier(Axis axis) const;

  double refractive_index(Axis axis, double wavelength_um) const;
  double eo_index_shift(Axis axis, double n, double e_z_v_per_um) const;
  IndexPerturbation index_perturbation(double wavelength_um, double e_z_v_per_um) const;

 private:
  std::string name_;
  std::string citation_;
  std::array<std::optional<SellmeierSet>, 3> axes_;
  ElectroOpticTensor eo_;
};

// Key-value (YAML) material data file; see data/ktp_fan1987.yaml for the schema.
Material load_material(const std::filesystem::path& path);
Material parse_material(std::string_view text, const std::string& source_name = "<memory>");

}  // namespace modeconv
