#include "modeconv/spdc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "modeconv/errors.hpp"

namespace modeconv {

ProcessModes process_modes(Process process) {
  if (process == Process::One) return {{0, 0}, {1, 0}};
  return {{1, 0}, {0, 0}};
}

void QpmSourceConfig::validate() const {
  geometry.validate();
  if (!(pump_wavelength_um > 0.0)) throw std::invalid_argument("pump wavelength must be positive");
  if (!(qpm_period_um > 0.0)) throw std::invalid_argument("QPM period must be positive");
  if (!(crystal_length_um > 0.0)) throw std::invalid_argument("crystal length must be positive");
}

double idler_wavelength(double pump_um, double signal_um) {
  const double inv = 1.0 / pump_um - 1.0 / signal_um;
  if (!(inv > 0.0)) {
    std::ostringstream os;
    os << "no positive idler wavelength for pump " << pump_um << " um and signal " << signal_um << " um";
    throw RangeError(os.str());
  }
  return 1.0 / inv;
}

std::vector<double> uniform_grid(double first, double last, int points) {
  if (points < 2) throw std::invalid_argument("uniform_grid: need at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = first + (last - first) * k / (points - 1);
  return g;
}

namespace {

int order_slot(ModeOrder order) {
  if (order == ModeOrder{0, 0}) return 0;
  if (order == ModeOrder{1, 0}) return 1;
  throw std::invalid_argument("only 00 and 10 signal/idler modes are modelled");
}

GuidedMode pick(std::vector<GuidedMode>& modes, ModeOrder order, Polarization pol, double wavelength) {
  for (auto& m : modes)
    if (m.order == order) return m;
  std::ostringstream os;
  os << "source waveguide has no guided " << polarization_label(pol) << order_label(order) << " mode at "
     << wavelength << " um";
  throw NumericError(os.str());
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

SpdcModel::SpdcModel(const Material& material, QpmSourceConfig config, SpectralWindow window,
                     const GridOptions& grid, const SolveOptions& solve)
    : config_(config), window_(window) {
  config_.validate();
  if (!(window_.signal_max_um > window_.signal_min_um) || window_.nodes < 2)
    throw std::invalid_argument("spectral window must be non-empty with at least two nodes");
  if (!(window_.signal_min_um > config_.pump_wavelength_um))
    throw RangeError("spectral window must lie above the pump wavelength");

  const auto& geom = config_.geometry;
  const double lp = config_.pump_wavelength_um;
  {
    const auto profile = build_index_profile(material, geom, Polarization::H, lp, grid);
    auto modes = solve_modes(profile, Polarization::H, lp, 8, solve);
    pump_ = pick(modes, kPumpOrder, Polarization::H, lp);
  }

  // Chebyshev points of the second kind, ascending, with barycentric weights.
  const int n = window_.nodes;
  const double mid = 0.5 * (window_.signal_min_um + window_.signal_max_um);
  const double half = 0.5 * (window_.signal_max_um - window_.signal_min_um);
  for (int k = 0; k < n; ++k) {
    nodes_.push_back(mid - half * std::cos(std::numbers::pi * k / (n - 1)));
    double w = (k % 2 == 0) ? 1.0 : -1.0;
    if (k == 0 || k == n - 1) w *= 0.5;
    weights_.push_back(w);
  }

  for (double ls : nodes_) {
    const double li = idler_wavelength(lp, ls);
    const auto prof_s = build_index_profile(material, geom, Polarization::H, ls, grid);
    const auto prof_i = build_index_profile(material, geom, Polarization::V, li, grid);
    auto sig = solve_modes(prof_s, Polarization::H, ls, 4, solve);
    auto idl = solve_modes(prof_i, Polarization::V, li, 4, solve);
    const GuidedMode s00 = pick(sig, {0, 0}, Polarization::H, ls);
    const GuidedMode s10 = pick(sig, {1, 0}, Polarization::H, ls);
    const GuidedMode i00 = pick(idl, {0, 0}, Polarization::V, li);
    const GuidedMode i10 = pick(idl, {1, 0}, Polarization::V, li);
    signal_beta_[0].push_back(s00.beta);
    signal_beta_[1].push_back(s10.beta);
    idler_beta_[0].push_back(i00.beta);
    idler_beta_[1].push_back(i10.beta);
    overlap_[0].push_back(mode_overlap(pump_, s00, i10));
    overlap_[1].push_back(mode_overlap(pump_, s10, i00));
  }
}

void SpdcModel::set_qpm_period(double period_um) {
  if (!(period_um > 0.0)) throw std::invalid_argument("QPM period must be positive");
  config_.qpm_period_um = period_um;
}

void SpdcModel::check_in_window(double signal_um) const {
  const double slack = 1e-12;
  if (signal_um < window_.signal_min_um - slack || signal_um > window_.signal_max_um + slack) {
    std::ostringstream os;
    os << "signal wavelength " << signal_um << " um outside the solved window [" << window_.signal_min_um << ", "
       << window_.signal_max_um << "]";
    throw RangeError(os.str());
  }
}

double SpdcModel::interpolate(const std::vector<double>& values, double x) const {
  check_in_window(x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double diff = x - nodes_[k];
    if (diff == 0.0) return values[k];
    const double t = weights_[k] / diff;
    num += t * values[k];
    den += t;
  }
  return num / den;
}

double SpdcModel::signal_beta(ModeOrder order, double signal_um) const {
  return interpolate(signal_beta_[static_cast<std::size_t>(order_slot(order))], signal_um);
}

double SpdcModel::idler_beta(ModeOrder order, double signal_um) const {
  return interpolate(idler_beta_[static_cast<std::size_t>(order_slot(order))], signal_um);
}

double SpdcModel::overlap(Process process, double signal_um) const {
  return interpolate(overlap_[process == Process::One ? 0 : 1], signal_um);
}

double SpdcModel::raw_mismatch(Process process, double signal_um) const {
  const auto modes = process_modes(process);
  return pump_.beta - signal_beta(modes.signal, signal_um) - idler_beta(modes.idler, signal_um);
}

double SpdcModel::qpm_mismatch(Process process, double signal_um) const {
  return raw_mismatch(process, signal_um) - 2.0 * std::numbers::pi / config_.qpm_period_um;
}

double SpdcModel::qpm_period_for(Process process, double signal_um) const {
  const double k = raw_mismatch(process, signal_um);
  if (!(k > 0.0)) throw NumericError("process is not phase-matchable with a first-order grating");
  return 2.0 * std::numbers::pi / k;
}

double SpdcModel::balanced_qpm_period(double signal_um) const {
  const double k = 0.5 * (raw_mismatch(Process::One, signal_um) + raw_mismatch(Process::Two, signal_um));
  if (!(k > 0.0)) throw NumericError("processes are not phase-matchable with a first-order grating");
  return 2.0 * std::numbers::pi / k;
}

double SpdcModel::phase_matched_signal(Process process) const {
  double lo = window_.signal_min_um;
  double hi = window_.signal_max_um;
  double flo = qpm_mismatch(process, lo);
  const double fhi = qpm_mismatch(process, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream os;
    os << "QPM mismatch of process " << static_cast<int>(process) << " does not change sign over ["
       << lo << ", " << hi << "] um (" << flo << ", " << fhi << " rad/um)";
    throw NumericError(os.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = qpm_mismatch(process, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ProcessSpectrum SpdcModel::process_spectrum(Process process, std::span<const double> signal_grid) const {
  ProcessSpectrum s;
  s.process = process;
  const double half_length = 0.5 * config_.crystal_length_um;
  for (double ls : signal_grid) {
    s.signal_um.push_back(ls);
    s.idler_um.push_back(idler_wavelength(config_.pump_wavelength_um, ls));
    s.amplitude.push_back(overlap(process, ls) * sinc(qpm_mismatch(process, ls) * half_length));
  }
  return s;
}

double TwoPhotonState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool TwoPhotonState::is_hermitian(double tol) const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff() <= tol; }

TwoPhotonState build_density_matrix(double w, double v) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("build_density_matrix: w must lie in [0, 1]");
  const double bound = std::sqrt(w * (1.0 - w));
  if (!(v >= 0.0) || v > bound + 1e-9) {
    std::ostringstream os;
    os.precision(12);
    os << "build_density_matrix: coherence v = " << v << " violates positivity bound 0 <= v <= sqrt(w(1-w)) = "
       << bound;
    throw std::invalid_argument(os.str());
  }
  TwoPhotonState s;
  s.w = w;
  s.v = v;
  s.rho(1, 1) = w;
  s.rho(2, 2) = 1.0 - w;
  s.rho(1, 2) = v;
  s.rho(2, 1) = v;
  return s;
}

StateParameters estimate_wv(const ProcessSpectrum& first, const ProcessSpectrum& second) {
  const auto& g = first.signal_um;
  if (g.size() != second.signal_um.size() || g.size() < 2)
    throw std::invalid_argument("estimate_wv: spectra must share a grid of at least two points");
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(g[k] - second.signal_um[k]) > 1e-12) throw std::invalid_argument("estimate_wv: spectra grids differ");

  double n1 = 0.0;
  double n2 = 0.0;
  double cross = 0.0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double h = 0.5 * (g[k + 1] - g[k]);
    n1 += h * (first.intensity(k) + first.intensity(k + 1));
    n2 += h * (second.intensity(k) + second.intensity(k + 1));
    cross += h * (first.amplitude[k] * second.amplitude[k] + first.amplitude[k + 1] * second.amplitude[k + 1]);
  }
  const double total = n1 + n2;
  if (!(total > 0.0)) throw std::invalid_argument("estimate_wv: spectra carry zero total norm");
  StateParameters p;
  p.w = n1 / total;
  // Cauchy-Schwarz holds for the discrete inner product; clamp only rounding excess.
  p.v = std::min(std::abs(cross) / total, std::sqrt(n1 * n2) / total);
  return p;
}

}  // namespace modeconv
