#include "modeconv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "modeconv/errors.hpp"

namespace modeconv {

using nlohmann::ordered_json;

void run_stage(const std::string& stage, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(stage, e.what(), kExitConfig);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), kExitNumeric);
  }
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << std::setprecision(12);
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << values, first = false), ...);
    out_ << '\n';
  }

  std::ostream& stream() { return out_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_legend(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

std::filesystem::path prepare_output(const RunConfig& config) {
  std::filesystem::path dir = config.output_dir;
  run_stage("output", [&] { std::filesystem::create_directories(dir); });
  return dir;
}

std::string mode_name(const GuidedMode& m) {
  return std::string(1, polarization_label(m.polarization)) + order_label(m.order);
}

ordered_json design_json(const CouplingDesign& d, const ConverterSection& s) {
  return {{"wavelength_um", s.wavelength_um},
          {"guided_modes", s.guided_count},
          {"beta00", s.mode00.beta},
          {"beta10", s.mode10.beta},
          {"delta_beta", d.delta_beta},
          {"grating_period_um", d.grating_period},
          {"kappa_per_volt", d.kappa_per_volt}};
}

ordered_json crosstalk_json(const GratingCrosstalk& g) {
  return {{"grating_period_um", g.grating_period}, {"voltage", g.voltage},   {"delta_h", g.delta_h},
          {"delta_v", g.delta_v},                  {"fraction_h", g.fraction_h}, {"fraction_v", g.fraction_v},
          {"ceiling_h", g.ceiling_h},              {"ceiling_v", g.ceiling_v}};
}

std::vector<double> spectrum_grid(const RunConfig& config) {
  const double half = config.spdc.window_half_width_nm * 1e-3;
  return uniform_grid(config.wavelengths.signal_um - half, config.wavelengths.signal_um + half,
                      config.spdc.spectrum_points);
}

double argmax_signal(const ProcessSpectrum& s) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.amplitude.size(); ++k)
    if (s.intensity(k) > s.intensity(best)) best = k;
  return s.signal_um[best];
}

std::optional<double> try_matched(const SpdcModel& model, Process p) {
  try {
    return model.phase_matched_signal(p);
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

Material load_stage_material(const RunConfig& config) {
  std::optional<Material> m;
  run_stage("material", [&] { m = load_material(config.material_path); });
  return *m;
}

std::vector<ModeRow> solve_all_modes(const RunConfig& config, const Material& material) {
  std::vector<ModeRow> rows;
  const std::pair<const char*, const WaveguideGeometry*> sections[] = {{"source", &config.source},
                                                                       {"converter", &config.converter}};
  run_stage("modesolver", [&] {
    for (const auto& [name, geom] : sections) {
      for (Polarization pol : {Polarization::H, Polarization::V}) {
        const double lambda = pol == Polarization::H ? config.wavelengths.signal_um : config.wavelengths.idler_um;
        const auto profile = build_index_profile(material, *geom, pol, lambda, config.grid);
        for (auto& m : solve_modes(profile, pol, lambda, 6, config.solve)) rows.push_back({name, std::move(m)});
      }
    }
  });
  return rows;
}

DesignResult run_design(const RunConfig& config, const Material& material) {
  DesignResult r;
  run_stage("modesolver", [&] {
    r.section_h = solve_converter_section(material, config.converter, Polarization::H, config.wavelengths.signal_um,
                                          config.grid, config.solve);
    r.section_v = solve_converter_section(material, config.converter, Polarization::V, config.wavelengths.idler_um,
                                          config.grid, config.solve);
  });
  run_stage("coupler", [&] {
    r.design_h = design_coupler(r.section_h, config.electrode, material.electro_optic());
    r.design_v = design_coupler(r.section_v, config.electrode, material.electro_optic());
    r.full_transfer_voltage_h = full_transfer_voltage(r.design_h);
    r.crosstalk = crosstalk_analysis(r.design_h, r.design_v, r.full_transfer_voltage_h);
  });
  return r;
}

SpdcResult run_spdc(const RunConfig& config, const Material& material) {
  SpdcResult r;
  std::optional<SpdcModel> model;
  run_stage("spdc", [&] {
    QpmSourceConfig src;
    src.pump_wavelength_um = config.wavelengths.pump_um;
    src.crystal_length_um = config.spdc.crystal_length_um;
    src.geometry = config.source;
    const double half = config.spdc.window_half_width_nm * 1e-3;
    SpectralWindow window{config.wavelengths.signal_um - half, config.wavelengths.signal_um + half,
                          config.spdc.interpolation_nodes};
    model.emplace(material, src, window, config.grid, config.solve);

    const double ls = config.wavelengths.signal_um;
    r.period_process1_um = model->qpm_period_for(Process::One, ls);
    r.period_process2_um = model->qpm_period_for(Process::Two, ls);
    r.qpm_period_solved = !config.spdc.qpm_period_um.has_value();
    r.qpm_period_um = r.qpm_period_solved ? model->balanced_qpm_period(ls) : *config.spdc.qpm_period_um;
    model->set_qpm_period(r.qpm_period_um);
    r.pump_beta = model->pump_mode().beta;
    r.overlap1 = model->overlap(Process::One, ls);
    r.overlap2 = model->overlap(Process::Two, ls);

    const auto grid = spectrum_grid(config);
    r.spectrum1 = model->process_spectrum(Process::One, grid);
    r.spectrum2 = model->process_spectrum(Process::Two, grid);
    r.peak_signal1_um = argmax_signal(r.spectrum1);
    r.peak_signal2_um = argmax_signal(r.spectrum2);
    r.matched_signal1_um = try_matched(*model, Process::One);
    r.matched_signal2_um = try_matched(*model, Process::Two);
    r.state = estimate_wv(r.spectrum1, r.spectrum2);
  });
  return r;
}

ChshRun run_chsh(const RunConfig& config, const Material& material) {
  ChshRun run;
  if (config.state_w && config.state_v) {
    run.state = {*config.state_w, *config.state_v};
    run.state_source = "config";
  } else {
    run.state = run_spdc(config, material).state;
    run.state_source = "spdc";
  }
  const DesignResult design = run_design(config, material);
  run_stage("chsh", [&] {
    const TwoPhotonState rho = build_density_matrix(run.state.w, run.state.v);
    run.result = optimize_settings(rho, config.optimizer);
    run.planar_bound = analytic_planar_bound(rho);
    run.result.voltages = settings_to_voltages(run.result.settings, design.design_h, design.design_v);
  });
  return run;
}

std::vector<std::filesystem::path> cmd_modes(const RunConfig& config, std::ostream& log) {
  const auto dir = prepare_output(config);
  const Material material = load_stage_material(config);
  log << "[modes] solving source and converter sections\n";
  const auto rows = solve_all_modes(config, material);

  std::vector<std::filesystem::path> written;
  run_stage("output", [&] {
    const auto table = dir / "modes.csv";
    CsvWriter csv(table, {"section", "polarization", "order", "wavelength_um", "beta_per_um", "n_eff", "residual",
                          "boundary_field_ratio", "field_file"});
    std::filesystem::create_directories(dir / "fields");
    written.push_back(table);
    for (const auto& row : rows) {
      const auto& m = row.mode;
      const std::string file = "fields/" + row.section + "_" + mode_name(m) + ".csv";
      csv.row(row.section, polarization_label(m.polarization), order_label(m.order), m.wavelength_um, m.beta,
              m.effective_index(), m.residual, m.boundary_field_ratio, file);
      CsvWriter field(dir / file, {"y_um", "z_um", "field"});
      const GridSpec& s = m.field.spec;
      for (int i = 0; i < s.ny; i += config.field_stride)
        for (int j = 0; j < s.nz; j += config.field_stride) field.row(s.y(i), s.z(j), m.field.at(i, j));
      written.push_back(dir / file);
    }
    write_legend(dir / "modes_columns.txt",
                 {"modes.csv: section (source|converter), polarization (H|V), order (mn: nodes along y, z),",
                  "  wavelength_um, beta_per_um (rad/um), n_eff, residual (relative eigen-residual),",
                  "  boundary_field_ratio (|field| on outer node ring / peak), field_file",
                  "fields/*.csv: y_um (lateral), z_um (depth, cover at z < 0), field (unit-normalized)"});
    written.push_back(dir / "modes_columns.txt");
  });
  for (const auto& row : rows)
    log << "[modes] " << row.section << " " << mode_name(row.mode) << " n_eff=" << std::setprecision(8)
        << row.mode.effective_index() << "\n";
  return written;
}

std::vector<std::filesystem::path> cmd_design(const RunConfig& config, std::ostream& log) {
  const auto dir = prepare_output(config);
  const Material material = load_stage_material(config);
  log << "[design] solving converter sections\n";
  const DesignResult d = run_design(config, material);

  std::vector<KappaSweepRow> kappa_rows;
  std::vector<VoltageSweepRow> sweep_h;
  std::vector<VoltageSweepRow> sweep_v;
  run_stage("coupler", [&] {
    const std::vector<double> gap{config.electrode.half_gap_um};
    kappa_rows = kappa_sweep(d.section_h, d.section_v, material.electro_optic(), gap, config.sweep.offsets_um);
    sweep_h = voltage_sweep(d.design_h, d.design_v, d.design_h.grating_period, config.sweep.max_voltage,
                            config.sweep.voltage_points);
    sweep_v = voltage_sweep(d.design_h, d.design_v, d.design_v.grating_period, config.sweep.max_voltage,
                            config.sweep.voltage_points);
  });

  std::vector<std::filesystem::path> written;
  run_stage("output", [&] {
    ElectrodeConfig eh = config.electrode;
    eh.period_um = d.design_h.grating_period;
    ElectrodeConfig ev = config.electrode;
    ev.period_um = d.design_v.grating_period;
    ordered_json warnings = ordered_json::array();
    for (const auto& e : {eh, ev})
      if (auto w = e.period_warning(); !w.empty()) warnings.push_back(w);

    ordered_json j;
    j["electrode"] = {{"half_gap_um", config.electrode.half_gap_um},
                      {"offset_um", config.electrode.offset_um},
                      {"length_um", config.electrode.length_um}};
    j["H"] = design_json(d.design_h, d.section_h);
    j["V"] = design_json(d.design_v, d.section_v);
    j["full_transfer_voltage_h"] = d.full_transfer_voltage_h;
    j["crosstalk"] = {{"grating_h", crosstalk_json(d.crosstalk.grating_h)},
                      {"grating_v", crosstalk_json(d.crosstalk.grating_v)}};
    j["warnings"] = warnings;
    write_json(dir / "design.json", j);
    written.push_back(dir / "design.json");

    {
      CsvWriter csv(dir / "kappa_vs_offset.csv", {"half_gap_um", "offset_um", "kappa_h_per_um_v", "kappa_v_per_um_v"});
      for (const auto& r : kappa_rows) csv.row(r.half_gap_um, r.offset_um, r.kappa_h, r.kappa_v);
    }
    written.push_back(dir / "kappa_vs_offset.csv");
    const std::pair<const char*, const std::vector<VoltageSweepRow>*> sweeps[] = {
        {"voltage_sweep_grating_h.csv", &sweep_h}, {"voltage_sweep_grating_v.csv", &sweep_v}};
    for (const auto& [name, rows] : sweeps) {
      CsvWriter csv(dir / name, {"voltage", "h_p00", "h_p10", "v_p00", "v_p10"});
      for (const auto& r : *rows) csv.row(r.voltage, r.p00_h, r.p10_h, r.p00_v, r.p10_v);
      written.push_back(dir / name);
    }
    write_legend(dir / "design_columns.txt",
                 {"design.json: per polarization beta00/beta10 (rad/um), delta_beta, grating_period_um,",
                  "  kappa_per_volt (1/(um V)); crosstalk at the full-H-transfer voltage for each grating",
                  "kappa_vs_offset.csv: half_gap_um (a), offset_um (d), kappa at 1 V for H and V",
                  "voltage_sweep_grating_*.csv: voltage (V); H launched in 00, V launched in 10;",
                  "  output powers of the 00 and 10 modes for each polarization"});
    written.push_back(dir / "design_columns.txt");
  });
  log << std::setprecision(8) << "[design] Lambda_H=" << d.design_h.grating_period
      << " um Lambda_V=" << d.design_v.grating_period << " um kappa_H=" << d.design_h.kappa_per_volt
      << " kappa_V=" << d.design_v.kappa_per_volt << " /(um V)\n";
  return written;
}

std::vector<std::filesystem::path> cmd_spdc(const RunConfig& config, std::ostream& log) {
  const auto dir = prepare_output(config);
  const Material material = load_stage_material(config);
  log << "[spdc] solving source modes across the spectral window\n";
  const SpdcResult r = run_spdc(config, material);

  std::vector<std::filesystem::path> written;
  run_stage("output", [&] {
    const double lp = config.wavelengths.pump_um;
    {
      CsvWriter csv(dir / "spectrum.csv", {"signal_nm", "idler_nm", "energy_residual", "amplitude_1", "intensity_1",
                                           "amplitude_2", "intensity_2"});
      for (std::size_t k = 0; k < r.spectrum1.signal_um.size(); ++k) {
        const double ls = r.spectrum1.signal_um[k];
        const double li = r.spectrum1.idler_um[k];
        const double residual = (1.0 / lp - 1.0 / ls - 1.0 / li) * lp;
        csv.row(ls * 1e3, li * 1e3, residual, r.spectrum1.amplitude[k], r.spectrum1.intensity(k),
                r.spectrum2.amplitude[k], r.spectrum2.intensity(k));
      }
    }
    written.push_back(dir / "spectrum.csv");

    ordered_json j;
    j["pump_wavelength_um"] = lp;
    j["pump_beta"] = r.pump_beta;
    j["qpm_period_um"] = r.qpm_period_um;
    j["qpm_period_solved"] = r.qpm_period_solved;
    j["qpm_period_process1_um"] = r.period_process1_um;
    j["qpm_period_process2_um"] = r.period_process2_um;
    j["overlap1"] = r.overlap1;
    j["overlap2"] = r.overlap2;
    j["peak_signal1_nm"] = r.peak_signal1_um * 1e3;
    j["peak_idler1_nm"] = idler_wavelength(lp, r.peak_signal1_um) * 1e3;
    j["peak_signal2_nm"] = r.peak_signal2_um * 1e3;
    j["peak_idler2_nm"] = idler_wavelength(lp, r.peak_signal2_um) * 1e3;
    j["matched_signal1_nm"] = optional_json(r.matched_signal1_um ? std::optional(*r.matched_signal1_um * 1e3)
                                                                  : std::nullopt);
    j["matched_signal2_nm"] = optional_json(r.matched_signal2_um ? std::optional(*r.matched_signal2_um * 1e3)
                                                                  : std::nullopt);
    j["w"] = r.state.w;
    j["v"] = r.state.v;
    j["positivity_bound"] = std::sqrt(r.state.w * (1.0 - r.state.w));
    write_json(dir / "spdc.json", j);
    written.push_back(dir / "spdc.json");
    write_legend(dir / "spdc_columns.txt",
                 {"spectrum.csv: signal_nm (H photon), idler_nm (V photon, from energy conservation),",
                  "  energy_residual ((1/lp - 1/ls - 1/li) lp), amplitude_k (overlap x sinc, 1/um) and",
                  "  intensity_k = amplitude_k^2 for process 1 (00_H + 10_V) and process 2 (10_H + 00_V)",
                  "spdc.json: QPM period, spectral peaks, overlaps and the estimated state parameters (w, v)"});
    written.push_back(dir / "spdc_columns.txt");
  });
  log << std::setprecision(8) << "[spdc] QPM period " << r.qpm_period_um << " um, w=" << r.state.w
      << " v=" << r.state.v << "\n";
  return written;
}

std::vector<std::filesystem::path> cmd_chsh(const RunConfig& config, std::ostream& log) {
  const auto dir = prepare_output(config);
  const Material material = load_stage_material(config);
  log << "[chsh] building state and optimizing settings\n";
  const ChshRun run = run_chsh(config, material);

  std::vector<std::filesystem::path> written;
  run_stage("output", [&] {
    const auto& res = run.result;
    const auto deg = res.settings.degrees();
    ordered_json j;
    j["w"] = run.state.w;
    j["v"] = run.state.v;
    j["state_source"] = run.state_source;
    j["settings_deg"] = {{"theta1", deg[0]}, {"theta1p", deg[1]}, {"theta2", deg[2]}, {"theta2p", deg[3]}};
    j["correlations"] = {{"E_theta1_theta2", res.correlations[0]},
                         {"E_theta1p_theta2", res.correlations[1]},
                         {"E_theta1p_theta2p", res.correlations[2]},
                         {"E_theta1_theta2p", res.correlations[3]}};
    j["S"] = res.s_value;
    j["analytic_planar_bound"] = run.planar_bound;
    j["tsirelson_bound"] = 2.0 * std::numbers::sqrt2;
    const auto& v = *res.voltages;
    j["voltages"] = {{"theta1", v.theta1}, {"theta1p", v.theta1p}, {"theta2", v.theta2}, {"theta2p", v.theta2p}};
    write_json(dir / "chsh.json", j);
    written.push_back(dir / "chsh.json");
    write_legend(dir / "chsh_columns.txt",
                 {"chsh.json: state (w, v) and its source, optimal analyser angles in degrees (theta1, theta1p",
                  "  act on H, theta2, theta2p on V), the four correlations, S, the analytic planar bound,",
                  "  and the converter drive voltages realizing each angle"});
    written.push_back(dir / "chsh_columns.txt");
  });
  log << std::setprecision(8) << "[chsh] S=" << run.result.s_value << " (bound " << run.planar_bound << ")\n";
  return written;
}

std::vector<std::filesystem::path> cmd_sweep(const RunConfig& config, std::ostream& log) {
  const auto dir = prepare_output(config);
  const Material material = load_stage_material(config);
  log << "[sweep] solving converter sections\n";
  const DesignResult d = run_design(config, material);
  std::vector<KappaSweepRow> rows;
  run_stage("coupler", [&] {
    rows = kappa_sweep(d.section_h, d.section_v, material.electro_optic(), config.sweep.half_gaps_um,
                       config.sweep.offsets_um);
  });

  std::vector<std::filesystem::path> written;
  run_stage("output", [&] {
    {
      CsvWriter csv(dir / "kappa_map.csv", {"half_gap_um", "offset_um", "kappa_h_per_um_v", "kappa_v_per_um_v"});
      for (const auto& r : rows) csv.row(r.half_gap_um, r.offset_um, r.kappa_h, r.kappa_v);
    }
    written.push_back(dir / "kappa_map.csv");
    const auto best_h = std::max_element(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.kappa_h < b.kappa_h; });
    const auto best_v = std::max_element(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.kappa_v < b.kappa_v; });
    ordered_json j;
    j["best_h"] = {{"half_gap_um", best_h->half_gap_um}, {"offset_um", best_h->offset_um}, {"kappa", best_h->kappa_h}};
    j["best_v"] = {{"half_gap_um", best_v->half_gap_um}, {"offset_um", best_v->offset_um}, {"kappa", best_v->kappa_v}};
    j["points"] = rows.size();
    write_json(dir / "sweep.json", j);
    written.push_back(dir / "sweep.json");
    write_legend(dir / "sweep_columns.txt",
                 {"kappa_map.csv: half_gap_um (a), offset_um (d), kappa at 1 V for H and V (1/(um V))",
                  "sweep.json: electrode geometry maximizing kappa for each polarization"});
    written.push_back(dir / "sweep_columns.txt");
  });
  log << "[sweep] " << rows.size() << " electrode geometries evaluated\n";
  return written;
}

}  // namespace modeconv
