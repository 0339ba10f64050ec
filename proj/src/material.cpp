#include "modeconv/material.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "modeconv/errors.hpp"

namespace modeconv {

Axis parse_axis(std::string_view label) {
  if (label == "x" || label == "X") return Axis::X;
  if (label == "y" || label == "Y") return Axis::Y;
  if (label == "z" || label == "Z") return Axis::Z;
  throw std::invalid_argument("unknown crystal axis '" + std::string(label) + "'");
}

char axis_label(Axis axis) { return "xyz"[static_cast<int>(axis)]; }

SellmeierForm parse_sellmeier_form(std::string_view name) {
  if (name == "pole_squared") return SellmeierForm::PoleSquared;
  if (name == "two_pole") return SellmeierForm::TwoPole;
  throw std::invalid_argument("unknown Sellmeier form '" + std::string(name) + "'");
}

std::string_view sellmeier_form_name(SellmeierForm form) {
  return form == SellmeierForm::PoleSquared ? "pole_squared" : "two_pole";
}

namespace {

std::size_t coefficient_count(SellmeierForm form) {
  return form == SellmeierForm::PoleSquared ? 4 : 5;
}

}  // namespace

SellmeierSet::SellmeierSet(Axis axis, SellmeierForm form, std::vector<double> coefficients,
                           WavelengthRange range)
    : axis_(axis), form_(form), coefficients_(std::move(coefficients)), range_(range) {
  if (coefficients_.size() != coefficient_count(form_))
    throw std::invalid_argument("Sellmeier form '" + std::string(sellmeier_form_name(form_)) +
                                "' expects " + std::to_string(coefficient_count(form_)) +
                                " coefficients, got " + std::to_string(coefficients_.size()));
  if (!(range_.min_um > 0.0) || !(range_.max_um > range_.min_um))
    throw std::invalid_argument("Sellmeier valid range must satisfy 0 < min < max");
}

double SellmeierSet::index(double wavelength_um) const {
  if (!range_.contains(wavelength_um)) {
    std::ostringstream os;
    os << "wavelength " << wavelength_um << " um outside valid range [" << range_.min_um << ", "
       << range_.max_um << "] for n_" << axis_label(axis_);
    throw RangeError(os.str());
  }
  const double l2 = wavelength_um * wavelength_um;
  const auto& c = coefficients_;
  double n2 = 0.0;
  switch (form_) {
    case SellmeierForm::PoleSquared:
      n2 = c[0] + c[1] * l2 / (l2 - c[2] * c[2]) - c[3] * l2;
      break;
    case SellmeierForm::TwoPole:
      n2 = c[0] + c[1] / (l2 - c[2]) + c[3] / (l2 - c[4]);
      break;
  }
  if (!(n2 > 1.0)) {
    std::ostringstream os;
    os << "Sellmeier evaluation gives n^2 = " << n2 << " at " << wavelength_um << " um";
    throw RangeError(os.str());
  }
  return std::sqrt(n2);
}

double ElectroOpticTensor::r_i3(Axis axis) const {
  switch (axis) {
    case Axis::X:
      return r13;
    case Axis::Y:
      return r23;
    case Axis::Z:
      return r33;
  }
  return 0.0;
}

ElectroOpticTensor ElectroOpticTensor::ktp() {
  // r23 and r33 as used for the converter design; r13, r42, r51 are standard KTP literature values.
  return {9.5, 16.0, 36.0, 9.3, 7.3};
}

double eo_index_shift(double n, double r_pm_per_v, double e_z_v_per_um) {
  if (!(n > 1.0) || !std::isfinite(n)) throw std::invalid_argument("eo_index_shift: index must be > 1");
  if (!std::isfinite(e_z_v_per_um) || !std::isfinite(r_pm_per_v))
    throw std::invalid_argument("eo_index_shift: non-finite field or coefficient");
  return -0.5 * n * n * n * (r_pm_per_v * kPmPerVToUmPerV) * e_z_v_per_um;
}

Material::Material(std::string name, std::string citation,
                   std::array<std::optional<SellmeierSet>, 3> axes, ElectroOpticTensor eo)
    : name_(std::move(name)), citation_(std::move(citation)), axes_(std::move(axes)), eo_(eo) {
  for (double r : {eo_.r13, eo_.r23, eo_.r33, eo_.r42, eo_.r51})
    if (!std::isfinite(r)) throw std::invalid_argument("electro-optic coefficients must be finite");
}

const SellmeierSet& Material::sellmeier(Axis axis) const {
  const auto& set = axes_[static_cast<int>(axis)];
  if (!set) throw std::invalid_argument(std::string("material has no data for axis ") + axis_label(axis));
  return *set;
}

double Material::refractive_index(Axis axis, double wavelength_um) const {
  return sellmeier(axis).index(wavelength_um);
}

double Material::eo_index_shift(Axis axis, double n, double e_z_v_per_um) const {
  return modeconv::eo_index_shift(n, eo_.r_i3(axis), e_z_v_per_um);
}

IndexPerturbation Material::index_perturbation(double wavelength_um, double e_z_v_per_um) const {
  IndexPerturbation p;
  p.delta_n_x = eo_index_shift(Axis::X, refractive_index(Axis::X, wavelength_um), e_z_v_per_um);
  p.delta_n_y = eo_index_shift(Axis::Y, refractive_index(Axis::Y, wavelength_um), e_z_v_per_um);
  p.delta_n_z = eo_index_shift(Axis::Z, refractive_index(Axis::Z, wavelength_um), e_z_v_per_um);
  return p;
}

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

template <typename T>
T read_as(const YAML::Node& node, const std::string& what, const std::string& source) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("cannot read " + what, source, line_of(node));
  }
}

WavelengthRange read_range(const YAML::Node& node, const std::string& source) {
  if (!node.IsSequence() || node.size() != 2)
    throw ConfigError("valid_range_um must be a two-element list", source, line_of(node));
  return {read_as<double>(node[0], "valid_range_um[0]", source),
          read_as<double>(node[1], "valid_range_um[1]", source)};
}

}  // namespace

Material parse_material(std::string_view text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, source_name, e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError("material file must be a key-value map", source_name, 1);

  const std::string name = root["name"] ? read_as<std::string>(root["name"], "name", source_name) : "";
  const std::string citation =
      root["citation"] ? read_as<std::string>(root["citation"], "citation", source_name) : "";

  const YAML::Node form_node = root["form"];
  if (!form_node) throw ConfigError("missing key 'form'", source_name, 1);
  SellmeierForm form;
  try {
    form = parse_sellmeier_form(read_as<std::string>(form_node, "form", source_name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), source_name, line_of(form_node));
  }

  const YAML::Node range_node = root["valid_range_um"];
  if (!range_node) throw ConfigError("missing key 'valid_range_um'", source_name, 1);
  const WavelengthRange common_range = read_range(range_node, source_name);

  const YAML::Node axes_node = root["axes"];
  if (!axes_node || !axes_node.IsMap())
    throw ConfigError("missing map 'axes'", source_name, axes_node ? line_of(axes_node) : 1);

  std::array<std::optional<SellmeierSet>, 3> axes;
  for (const auto& kv : axes_node) {
    const auto label = read_as<std::string>(kv.first, "axis label", source_name);
    Axis axis;
    try {
      axis = parse_axis(label);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), source_name, line_of(kv.first));
    }
    const YAML::Node entry = kv.second;
    YAML::Node coeff_node = entry;
    WavelengthRange range = common_range;
    if (entry.IsMap()) {
      coeff_node = entry["coefficients"];
      if (entry["valid_range_um"]) range = read_range(entry["valid_range_um"], source_name);
    }
    const auto coeffs = read_as<std::vector<double>>(coeff_node, "coefficients for axis " + label, source_name);
    try {
      axes[static_cast<int>(axis)].emplace(axis, form, coeffs, range);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), source_name, line_of(entry));
    }
  }

  ElectroOpticTensor eo = ElectroOpticTensor::ktp();
  if (const YAML::Node eo_node = root["electro_optic_pm_per_v"]) {
    if (!eo_node.IsMap()) throw ConfigError("electro_optic_pm_per_v must be a map", source_name, line_of(eo_node));
    auto read_r = [&](const char* key, double& dst) {
      if (eo_node[key]) dst = read_as<double>(eo_node[key], key, source_name);
    };
    read_r("r13", eo.r13);
    read_r("r23", eo.r23);
    read_r("r33", eo.r33);
    read_r("r42", eo.r42);
    read_r("r51", eo.r51);
  }
  try {
    return Material(name, citation, std::move(axes), eo);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), source_name, 1);
  }
}

Material load_material(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open material file", path.string(), 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_material(buf.str(), path.string());
}

}  // namespace modeconv
