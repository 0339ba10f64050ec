#include "modeconv/coupler.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "modeconv/errors.hpp"

namespace modeconv {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// sin(x)/x with the removable singularity filled in
double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double k0_of(double wavelength_um) { return 2.0 * std::numbers::pi / wavelength_um; }

}  // namespace

CouplingCoefficients coupling_coefficients(const GuidedMode& mode00, const GuidedMode& mode10,
                                           const Grid2D& modulation, const Grid2D& n_profile) {
  if (mode00.polarization != mode10.polarization)
    throw std::invalid_argument("coupling_coefficients: modes differ in polarization");
  if (std::abs(mode00.wavelength_um - mode10.wavelength_um) > 1e-12)
    throw std::invalid_argument("coupling_coefficients: modes differ in wavelength");
  const GridSpec& s = mode00.field.spec;
  if (!s.same_layout(mode10.field.spec) || !s.same_layout(modulation.spec) || !s.same_layout(n_profile.spec))
    throw std::invalid_argument("coupling_coefficients: grid mismatch between modes, modulation and profile");

  double integral = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    integral += mode00.field.values[k] * n_profile.values[k] * modulation.values[k] * mode10.field.values[k];
  integral *= s.cell_area();

  const double k0 = k0_of(mode00.wavelength_um);
  CouplingCoefficients c;
  c.kappa12 = k0 * k0 / (2.0 * mode00.beta) * integral;
  c.kappa21 = k0 * k0 / (2.0 * mode10.beta) * integral;
  c.kappa = std::sqrt(c.kappa12 * c.kappa21);
  return c;
}

double design_grating_period(double delta_beta) {
  if (!(delta_beta > 0.0)) throw std::invalid_argument("design_grating_period: delta beta must be positive");
  return 2.0 * std::numbers::pi / delta_beta;
}

TransferMatrix transfer_matrix(double kappa, double delta, double length) {
  TransferMatrix t;
  t.kappa = kappa;
  t.delta = delta;
  t.length = length;
  t.gamma = std::hypot(kappa, delta);
  const double gx = t.gamma * length;
  const double c = std::cos(gx);
  // kappa/gamma sin(gamma x) and delta/gamma sin(gamma x), finite as gamma -> 0
  const double ks = kappa * length * sinc(gx);
  const double ds = delta * length * sinc(gx);
  const cd plus = std::exp(kI * (delta * length));
  const cd minus = std::conj(plus);
  t.m(0, 0) = (c - kI * ds) * plus;
  t.m(0, 1) = ks * plus;
  t.m(1, 0) = -ks * minus;
  t.m(1, 1) = (c + kI * ds) * minus;
  return t;
}

TransferMatrix section_transfer_matrix(double kappa, double delta, double x0, double length) {
  TransferMatrix t = transfer_matrix(kappa, delta, length);
  // P(x0) M(L) P(x0)^-1 with P(x) = diag(e^{i delta x}, e^{-i delta x})
  const cd phase = std::exp(kI * (2.0 * delta * x0));
  t.m(0, 1) *= phase;
  t.m(1, 0) *= std::conj(phase);
  return t;
}

ModePowers power_evolution(double kappa, double delta, cd a0, cd b0, double x) {
  const double norm = std::norm(a0) + std::norm(b0);
  if (std::abs(norm - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "power_evolution: input amplitudes not normalized (|A|^2 + |B|^2 = " << norm << ")";
    throw std::invalid_argument(os.str());
  }
  const auto t = transfer_matrix(kappa, delta, x);
  const Eigen::Vector2cd out = t.apply(Eigen::Vector2cd(a0, b0));
  return {std::norm(out[0]), std::norm(out[1])};
}

void CouplingDesign::validate() const {
  if (!(kappa_per_volt >= 0.0)) throw std::invalid_argument("kappa per volt must be non-negative");
  if (!(grating_period > 0.0)) throw std::invalid_argument("grating period must be positive");
  if (!(length > 0.0)) throw std::invalid_argument("coupler length must be positive");
}

double CouplingDesign::detuning(double grating_period_um) const {
  return 0.5 * (delta_beta - 2.0 * std::numbers::pi / grating_period_um);
}

namespace {

void fill_branch(const CouplingDesign& d, double grating_period, double voltage, double& delta, double& fraction,
                 double& ceiling) {
  // A design's own grating is phase matched by construction; evaluate that branch at delta = 0.
  delta = std::abs(grating_period - d.grating_period) <= 1e-12 * d.grating_period ? 0.0 : d.detuning(grating_period);
  const double kappa = d.kappa_at(voltage);
  const double gamma = std::hypot(kappa, delta);
  ceiling = gamma > 0.0 ? (kappa / gamma) * (kappa / gamma) : 0.0;
  const double s = kappa * d.length * sinc(gamma * d.length);
  fraction = s * s;
}

}  // namespace

GratingCrosstalk grating_crosstalk(const CouplingDesign& design_h, const CouplingDesign& design_v,
                                   double grating_period, double voltage) {
  design_h.validate();
  design_v.validate();
  GratingCrosstalk g;
  g.grating_period = grating_period;
  g.voltage = voltage;
  fill_branch(design_h, grating_period, voltage, g.delta_h, g.fraction_h, g.ceiling_h);
  fill_branch(design_v, grating_period, voltage, g.delta_v, g.fraction_v, g.ceiling_v);
  return g;
}

CrosstalkReport crosstalk_analysis(const CouplingDesign& design_h, const CouplingDesign& design_v, double voltage) {
  return {grating_crosstalk(design_h, design_v, design_h.grating_period, voltage),
          grating_crosstalk(design_h, design_v, design_v.grating_period, voltage)};
}

double voltage_for_angle(double theta, const CouplingDesign& design) {
  if (!(design.kappa_per_volt > 0.0)) throw std::invalid_argument("voltage_for_angle: kappa per volt must be positive");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw std::invalid_argument("voltage_for_angle: theta must lie in [0, pi]");
  return theta / (design.kappa_per_volt * design.length);
}

double full_transfer_voltage(const CouplingDesign& design) {
  return voltage_for_angle(0.5 * std::numbers::pi, design);
}

std::vector<VoltageSweepRow> voltage_sweep(const CouplingDesign& design_h, const CouplingDesign& design_v,
                                           double grating_period, double max_voltage, int points) {
  if (points < 2) throw std::invalid_argument("voltage_sweep: need at least two points");
  std::vector<VoltageSweepRow> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double v = max_voltage * k / (points - 1);
    const auto g = grating_crosstalk(design_h, design_v, grating_period, v);
    const auto h = power_evolution(design_h.kappa_at(v), g.delta_h, 1.0, 0.0, design_h.length);
    const auto vv = power_evolution(design_v.kappa_at(v), g.delta_v, 0.0, 1.0, design_v.length);
    rows.push_back({v, h.p00, h.p10, vv.p00, vv.p10});
  }
  return rows;
}

ConverterSection solve_converter_section(const Material& material, const WaveguideGeometry& geometry,
                                         Polarization pol, double wavelength_um, const GridOptions& grid,
                                         const SolveOptions& solve) {
  ConverterSection s;
  s.polarization = pol;
  s.wavelength_um = wavelength_um;
  s.n_profile = build_index_profile(material, geometry, pol, wavelength_um, grid);
  auto modes = solve_modes(s.n_profile, pol, wavelength_um, 4, solve);
  s.guided_count = static_cast<int>(modes.size());
  bool have00 = false;
  bool have10 = false;
  for (auto& m : modes) {
    if (!have00 && m.order == ModeOrder{0, 0}) {
      s.mode00 = m;
      have00 = true;
    } else if (!have10 && m.order == ModeOrder{1, 0}) {
      s.mode10 = m;
      have10 = true;
    }
  }
  if (!have00 || !have10) {
    std::ostringstream os;
    os << "converter section does not guide both 00 and 10 " << polarization_label(pol) << " modes at "
       << wavelength_um << " um (" << modes.size() << " guided)";
    throw NumericError(os.str());
  }
  return s;
}

CouplingDesign design_coupler(const ConverterSection& section, const ElectrodeConfig& electrode,
                              const ElectroOpticTensor& eo) {
  ElectrodeConfig unit = electrode;
  unit.voltage = 1.0;
  const Grid2D modulation = index_modulation(unit, eo, section.polarization, section.n_profile);
  const auto c = coupling_coefficients(section.mode00, section.mode10, modulation, section.n_profile);
  CouplingDesign d;
  d.polarization = section.polarization;
  d.kappa_per_volt = c.kappa;
  d.delta_beta = section.delta_beta();
  d.grating_period = design_grating_period(d.delta_beta);
  d.length = electrode.length_um;
  return d;
}

std::vector<KappaSweepRow> kappa_sweep(const ConverterSection& section_h, const ConverterSection& section_v,
                                       const ElectroOpticTensor& eo, std::span<const double> half_gaps,
                                       std::span<const double> offsets) {
  std::vector<KappaSweepRow> rows;
  rows.reserve(half_gaps.size() * offsets.size());
  for (double a : half_gaps) {
    for (double d : offsets) {
      ElectrodeConfig e;
      e.half_gap_um = a;
      e.offset_um = d;
      e.voltage = 1.0;
      const auto mh = index_modulation(e, eo, Polarization::H, section_h.n_profile);
      const auto mv = index_modulation(e, eo, Polarization::V, section_v.n_profile);
      const double kh = coupling_coefficients(section_h.mode00, section_h.mode10, mh, section_h.n_profile).kappa;
      const double kv = coupling_coefficients(section_v.mode00, section_v.mode10, mv, section_v.n_profile).kappa;
      rows.push_back({a, d, kh, kv});
    }
  }
  return rows;
}

}  // namespace modeconv
