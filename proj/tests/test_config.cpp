#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "modeconv/config.hpp"
#include "modeconv/errors.hpp"

using namespace modeconv;

namespace {

const std::filesystem::path kData = MODECONV_SOURCE_DIR "/data";
const std::string kMaterial = "material: ktp_fan1987.yaml\n";

RunConfig parse(const std::string& text, const std::vector<std::string>& overrides = {}) {
  return parse_run_config(text, "test.yaml", kData, overrides);
}

ConfigError parse_error(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    (void)parse(text, overrides);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError");
  return ConfigError("");
}

}  // namespace

TEST_CASE("shipped device configuration") {
  const auto c = load_run_config(MODECONV_SOURCE_DIR "/configs/device.yaml");
  CHECK(std::filesystem::equivalent(c.material_path, kData / "ktp_fan1987.yaml"));
  CHECK(c.source.width_um == 5.0);
  CHECK(c.converter.width_um == 3.0);
  CHECK(c.grid.spacing_um == 0.025);
  CHECK(c.electrode.half_gap_um == 1.3);
  CHECK(c.electrode.offset_um == 0.95);
  CHECK(c.electrode.length_um == 20000.0);
  CHECK(c.wavelengths.signal_um == 0.750776);
  CHECK_FALSE(c.spdc.qpm_period_um.has_value());
  CHECK_FALSE(c.state_w.has_value());
  CHECK(c.output_dir == "out");
  CHECK(c.sweep.half_gaps_um.size() == 13);
  CHECK(c.sweep.offsets_um.size() == 51);
  CHECK(c.sweep.offsets_um.back() == doctest::Approx(2.5));
}

TEST_CASE("defaults apply when sections are omitted") {
  const auto c = parse(kMaterial);
  const RunConfig d;
  CHECK(c.source.depth_um == d.source.depth_um);
  CHECK(c.grid.side_margin_um == d.grid.side_margin_um);
  CHECK(c.spdc.spectrum_points == d.spdc.spectrum_points);
  CHECK(c.optimizer.max_iterations == d.optimizer.max_iterations);
  CHECK(c.field_stride == d.field_stride);
}

TEST_CASE("overrides take precedence over file values") {
  const std::string text = kMaterial + "electrode:\n  offset_um: 0.5\nspdc:\n  qpm_period_um: 7.0\n";
  CHECK(parse(text).electrode.offset_um == 0.5);
  CHECK(*parse(text).spdc.qpm_period_um == 7.0);
  const auto c = parse(text, {"electrode.offset_um=1.1", "state.w=0.5", "state.v=0.5", "spdc.qpm_period_um=auto",
                              "sweep.offsets_um=[0.5, 1.0]", "grid.spacing_um=0.05"});
  CHECK(c.electrode.offset_um == 1.1);
  CHECK(*c.state_w == 0.5);
  CHECK(*c.state_v == 0.5);
  CHECK_FALSE(c.spdc.qpm_period_um.has_value());
  CHECK(c.sweep.offsets_um == std::vector<double>{0.5, 1.0});
  CHECK(c.grid.spacing_um == 0.05);
  CHECK(c.electrode.half_gap_um == 1.3);

  const auto bad = parse_error(kMaterial, {"electrode.offset_um=abc"});
  CHECK(bad.source() == "--override electrode.offset_um");
  CHECK_THROWS_AS(parse(kMaterial, {"noequals"}), ConfigError);
  CHECK_THROWS_AS(parse(kMaterial, {"material.x=1"}), ConfigError);
}

TEST_CASE("malformed files are rejected with a location") {
  SUBCASE("unknown key") {
    const auto e = parse_error(kMaterial + "grid:\n  spacing_um: 0.05\n  spacnig: 1\n");
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("grid.spacnig") != std::string::npos);
  }
  SUBCASE("unknown section") {
    CHECK(parse_error(kMaterial + "waveguide:\n  width_um: 1\n").line() == 2);
  }
  SUBCASE("empty geometry block") {
    const auto e = parse_error(kMaterial + "\nsource:\n");
    CHECK(e.source() == "test.yaml");
    CHECK(e.line() == 3);
  }
  SUBCASE("incomplete geometry block") {
    const auto e = parse_error(kMaterial + "source:\n  width_um: 5\n  delta_n: 0.02\n");
    CHECK(std::string(e.what()).find("depth_um") != std::string::npos);
  }
  SUBCASE("non-numeric value") {
    CHECK(parse_error(kMaterial + "electrode:\n  half_gap_um: wide\n").line() == 3);
  }
  SUBCASE("yaml syntax") {
    CHECK(parse_error(kMaterial + "grid: [1, 2\n").line() > 0);
  }
}

TEST_CASE("whole-configuration checks") {
  CHECK_THROWS_AS(parse("grid:\n  spacing_um: 0.05\n"), ConfigError);
  CHECK_THROWS_AS(parse("material: nowhere.yaml\n"), ConfigError);
  CHECK_THROWS_AS(parse(kMaterial + "converter:\n  width_um: 6\n  depth_um: 2\n  delta_n: 0.02\n"), ConfigError);
  CHECK_THROWS_AS(parse(kMaterial + "wavelengths:\n  signal_um: 0.76\n"), ConfigError);
  CHECK_THROWS_AS(parse(kMaterial, {"state.w=0.5"}), ConfigError);
  const auto e = parse_error(kMaterial, {"state.w=0.2", "state.v=0.45"});
  CHECK(std::string(e.what()).find("sqrt(w(1-w))") != std::string::npos);
  CHECK_NOTHROW(parse(kMaterial, {"state.w=0.4825", "state.v=0.4979"}));
  CHECK_THROWS_AS(parse(kMaterial, {"spdc.qpm_period_um=-1"}), ConfigError);
  CHECK_THROWS_AS(parse(kMaterial, {"field_stride=0"}), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/device.yaml"), ConfigError);
}
