#include "modeconv/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "modeconv/errors.hpp"

namespace modeconv {

namespace {

// Reads typed values from the merged YAML tree, attributing errors either to the config file
// line or to the --override that introduced the value.
class Reader {
 public:
  Reader(std::string source, std::set<std::string> overridden)
      : source_(std::move(source)), overridden_(std::move(overridden)) {}

  [[noreturn]] void fail(const std::string& key, const YAML::Node& node, const std::string& what) const {
    if (overridden_.count(key)) throw ConfigError(what, "--override " + key, 0);
    const int line = node && node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    throw ConfigError(what, source_, line);
  }

  double number(const YAML::Node& node, const std::string& key) const {
    try {
      const double v = node.as<double>();
      if (!std::isfinite(v)) fail(key, node, "'" + key + "' must be finite");
      return v;
    } catch (const YAML::Exception&) {
      fail(key, node, "'" + key + "' must be a number");
    }
  }

  int integer(const YAML::Node& node, const std::string& key) const {
    try {
      return node.as<int>();
    } catch (const YAML::Exception&) {
      fail(key, node, "'" + key + "' must be an integer");
    }
  }

  bool boolean(const YAML::Node& node, const std::string& key) const {
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(key, node, "'" + key + "' must be true or false");
    }
  }

  std::string text(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(key, node, "'" + key + "' must be a scalar");
    return node.Scalar();
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence() || node.size() == 0) fail(key, node, "'" + key + "' must be a non-empty list of numbers");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(number(item, key));
    return out;
  }

  // Map node with only the listed keys; returns false when the section is absent.
  bool section(const YAML::Node& root, const std::string& name, const std::set<std::string>& allowed,
               YAML::Node& out) const {
    const YAML::Node node = root[name];
    if (!node) return false;
    if (!node.IsMap() || node.size() == 0) {
      YAML::Node key_node = node;
      for (const auto& kv : root)
        if (kv.first.IsScalar() && kv.first.Scalar() == name) key_node = kv.first;
      fail(name, key_node, "section '" + name + "' must be a non-empty map");
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(name + "." + key, kv.first, "unknown key '" + name + "." + key + "'");
    }
    out = node;
    return true;
  }

 private:
  std::string source_;
  std::set<std::string> overridden_;
};

bool is_auto_or_null(const YAML::Node& node) {
  return node.IsNull() || (node.IsScalar() && (node.Scalar() == "auto" || node.Scalar() == "null"));
}

YAML::Node parse_override_value(const std::string& value, const std::string& key) {
  try {
    return YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse value: " + e.msg, "--override " + key, 0);
  }
}

std::set<std::string> apply_overrides(YAML::Node& root, const std::vector<std::string>& overrides) {
  std::set<std::string> keys;
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must have the form KEY=VALUE, got '" + item + "'", "--override", 0);
    const std::string key = item.substr(0, eq);
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
      if (part.empty()) throw ConfigError("empty path component", "--override " + key, 0);
      parts.push_back(part);
    }
    // yaml-cpp nodes are handles; descend by re-assignment through a chain of handles.
    std::vector<YAML::Node> chain{root};
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
      YAML::Node next = chain.back()[parts[k]];
      if (!next || next.IsNull()) {
        chain.back()[parts[k]] = YAML::Node(YAML::NodeType::Map);
        next = chain.back()[parts[k]];
      } else if (!next.IsMap()) {
        throw ConfigError("'" + parts[k] + "' is not a section", "--override " + key, 0);
      }
      chain.push_back(next);
    }
    chain.back()[parts.back()] = parse_override_value(item.substr(eq + 1), key);
    keys.insert(key);
  }
  return keys;
}

WaveguideGeometry read_geometry(const Reader& r, const YAML::Node& root, const std::string& name,
                                const WaveguideGeometry& fallback) {
  YAML::Node node;
  if (!r.section(root, name, {"width_um", "depth_um", "delta_n", "cover_index"}, node)) return fallback;
  WaveguideGeometry g = fallback;
  for (const char* key : {"width_um", "depth_um", "delta_n"})
    if (!node[key]) r.fail(name, node, "section '" + name + "' is missing '" + key + "'");
  g.width_um = r.number(node["width_um"], name + ".width_um");
  g.depth_um = r.number(node["depth_um"], name + ".depth_um");
  g.delta_n = r.number(node["delta_n"], name + ".delta_n");
  if (node["cover_index"]) g.cover_index = r.number(node["cover_index"], name + ".cover_index");
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(name, node, e.what());
  }
  return g;
}

std::optional<double> optional_number(const Reader& r, const YAML::Node& node, const std::string& key) {
  if (!node || is_auto_or_null(node)) return std::nullopt;
  return r.number(node, key);
}

}  // namespace

void RunConfig::validate() const {
  const std::string where;
  if (material_path.empty()) throw ConfigError("missing key 'material'", where, 0);
  if (!std::filesystem::exists(material_path))
    throw ConfigError("material file not found: " + material_path.string(), where, 0);
  if (!(converter.width_um < source.width_um))
    throw ConfigError("converter width must be smaller than source width", where, 0);
  if (!(grid.spacing_um > 0.0) || !(grid.side_margin_um > 0.0) || !(grid.bottom_margin_um > 0.0) ||
      !(grid.cover_margin_um >= 0.0))
    throw ConfigError("grid spacing and margins must be positive", where, 0);
  const auto& w = wavelengths;
  if (!(w.pump_um > 0.0 && w.signal_um > w.pump_um && w.idler_um > w.pump_um))
    throw ConfigError("wavelengths must satisfy 0 < pump < signal, idler", where, 0);
  const double mismatch = std::abs(1.0 / w.pump_um - 1.0 / w.signal_um - 1.0 / w.idler_um) * w.pump_um;
  if (mismatch > 1e-4) throw ConfigError("wavelength triple violates energy conservation beyond 1e-4", where, 0);
  if (!(spdc.crystal_length_um > 0.0) || !(spdc.window_half_width_nm > 0.0) || spdc.spectrum_points < 3 ||
      spdc.interpolation_nodes < 2)
    throw ConfigError("invalid spdc options", where, 0);
  if (spdc.qpm_period_um && !(*spdc.qpm_period_um > 0.0)) throw ConfigError("qpm period must be positive", where, 0);
  if (state_w.has_value() != state_v.has_value())
    throw ConfigError("state.w and state.v must be given together", where, 0);
  if (state_w && !(*state_w >= 0.0 && *state_w <= 1.0)) throw ConfigError("state.w must lie in [0, 1]", where, 0);
  if (state_v && !(*state_v >= 0.0)) throw ConfigError("state.v must be non-negative", where, 0);
  if (state_w && *state_v > std::sqrt(*state_w * (1.0 - *state_w)) + 1e-12)
    throw ConfigError("state.v exceeds the positivity bound sqrt(w(1-w))", where, 0);
  if (sweep.voltage_points < 2 || !(sweep.max_voltage > 0.0)) throw ConfigError("invalid voltage sweep", where, 0);
  if (field_stride < 1) throw ConfigError("field_stride must be >= 1", where, 0);
  try {
    electrode.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), where, 0);
  }
}

RunConfig parse_run_config(const std::string& text, const std::string& source_name,
                           const std::filesystem::path& base_dir, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, source_name, e.mark.line + 1);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config must be a key-value map", source_name, 1);
  const Reader r(source_name, apply_overrides(root, overrides));

  static const std::set<std::string> kTop{"material", "source",    "converter", "grid",  "solver", "electrode",
                                          "wavelengths", "spdc", "state",     "optimizer", "sweep", "output",
                                          "field_stride"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kTop.count(key)) r.fail(key, kv.first, "unknown key '" + key + "'");
  }

  RunConfig c;
  for (int k = 0; k <= 12; ++k) c.sweep.half_gaps_um.push_back((8 + k) / 10.0);
  for (int k = 0; k <= 50; ++k) c.sweep.offsets_um.push_back(k / 20.0);

  if (root["material"]) {
    const std::filesystem::path p = r.text(root["material"], "material");
    c.material_path = p.is_absolute() ? p : base_dir / p;
  }
  c.source = read_geometry(r, root, "source", c.source);
  c.converter = read_geometry(r, root, "converter", c.converter);

  YAML::Node n;
  if (r.section(root, "grid", {"spacing_um", "side_margin_um", "bottom_margin_um", "cover_margin_um"}, n)) {
    if (n["spacing_um"]) c.grid.spacing_um = r.number(n["spacing_um"], "grid.spacing_um");
    if (n["side_margin_um"]) c.grid.side_margin_um = r.number(n["side_margin_um"], "grid.side_margin_um");
    if (n["bottom_margin_um"]) c.grid.bottom_margin_um = r.number(n["bottom_margin_um"], "grid.bottom_margin_um");
    if (n["cover_margin_um"]) c.grid.cover_margin_um = r.number(n["cover_margin_um"], "grid.cover_margin_um");
  }
  if (r.section(root, "solver", {"semivectorial", "tolerance", "krylov_dim", "max_restarts"}, n)) {
    if (n["semivectorial"]) c.solve.semivectorial = r.boolean(n["semivectorial"], "solver.semivectorial");
    if (n["tolerance"]) c.solve.tolerance = r.number(n["tolerance"], "solver.tolerance");
    if (n["krylov_dim"]) c.solve.krylov_dim = r.integer(n["krylov_dim"], "solver.krylov_dim");
    if (n["max_restarts"]) c.solve.max_restarts = r.integer(n["max_restarts"], "solver.max_restarts");
  }
  if (r.section(root, "electrode", {"half_gap_um", "offset_um", "length_um", "modulation_depth"}, n)) {
    if (n["half_gap_um"]) c.electrode.half_gap_um = r.number(n["half_gap_um"], "electrode.half_gap_um");
    if (n["offset_um"]) c.electrode.offset_um = r.number(n["offset_um"], "electrode.offset_um");
    if (n["length_um"]) c.electrode.length_um = r.number(n["length_um"], "electrode.length_um");
    if (n["modulation_depth"])
      c.electrode.modulation_depth = r.number(n["modulation_depth"], "electrode.modulation_depth");
  }
  if (r.section(root, "wavelengths", {"pump_um", "signal_um", "idler_um"}, n)) {
    if (n["pump_um"]) c.wavelengths.pump_um = r.number(n["pump_um"], "wavelengths.pump_um");
    if (n["signal_um"]) c.wavelengths.signal_um = r.number(n["signal_um"], "wavelengths.signal_um");
    if (n["idler_um"]) c.wavelengths.idler_um = r.number(n["idler_um"], "wavelengths.idler_um");
  }
  if (r.section(root, "spdc",
                {"crystal_length_um", "qpm_period_um", "window_half_width_nm", "spectrum_points",
                 "interpolation_nodes"},
                n)) {
    if (n["crystal_length_um"]) c.spdc.crystal_length_um = r.number(n["crystal_length_um"], "spdc.crystal_length_um");
    if (n["qpm_period_um"]) c.spdc.qpm_period_um = optional_number(r, n["qpm_period_um"], "spdc.qpm_period_um");
    if (n["window_half_width_nm"])
      c.spdc.window_half_width_nm = r.number(n["window_half_width_nm"], "spdc.window_half_width_nm");
    if (n["spectrum_points"]) c.spdc.spectrum_points = r.integer(n["spectrum_points"], "spdc.spectrum_points");
    if (n["interpolation_nodes"])
      c.spdc.interpolation_nodes = r.integer(n["interpolation_nodes"], "spdc.interpolation_nodes");
  }
  if (r.section(root, "state", {"w", "v"}, n)) {
    c.state_w = optional_number(r, n["w"], "state.w");
    c.state_v = optional_number(r, n["v"], "state.v");
  }
  if (r.section(root, "optimizer", {"max_iterations", "tolerance", "initial_step"}, n)) {
    if (n["max_iterations"]) c.optimizer.max_iterations = r.integer(n["max_iterations"], "optimizer.max_iterations");
    if (n["tolerance"]) c.optimizer.tolerance = r.number(n["tolerance"], "optimizer.tolerance");
    if (n["initial_step"]) c.optimizer.initial_step = r.number(n["initial_step"], "optimizer.initial_step");
  }
  if (r.section(root, "sweep", {"half_gaps_um", "offsets_um", "max_voltage", "voltage_points"}, n)) {
    if (n["half_gaps_um"]) c.sweep.half_gaps_um = r.numbers(n["half_gaps_um"], "sweep.half_gaps_um");
    if (n["offsets_um"]) c.sweep.offsets_um = r.numbers(n["offsets_um"], "sweep.offsets_um");
    if (n["max_voltage"]) c.sweep.max_voltage = r.number(n["max_voltage"], "sweep.max_voltage");
    if (n["voltage_points"]) c.sweep.voltage_points = r.integer(n["voltage_points"], "sweep.voltage_points");
  }
  if (root["field_stride"]) c.field_stride = r.integer(root["field_stride"], "field_stride");
  if (root["output"]) {
    c.output_dir = r.text(root["output"], "output");
  }

  try {
    c.validate();
  } catch (const ConfigError& e) {
    // Re-attribute whole-config checks to the file.
    throw ConfigError(e.what(), source_name, 0);
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file", path.string(), 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path.string(), path.parent_path(), overrides);
}

}  // namespace modeconv
