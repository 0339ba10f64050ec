#include "modeconv/modesolver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "modeconv/errors.hpp"
#include "shift_invert.hpp"

namespace modeconv {

Polarization parse_polarization(std::string_view label) {
  if (label == "H" || label == "h") return Polarization::H;
  if (label == "V" || label == "v") return Polarization::V;
  throw std::invalid_argument("unknown polarization '" + std::string(label) + "'");
}

char polarization_label(Polarization pol) { return pol == Polarization::H ? 'H' : 'V'; }

Axis polarization_axis(Polarization pol) { return pol == Polarization::H ? Axis::Y : Axis::Z; }

void WaveguideGeometry::validate() const {
  if (!(width_um > 0.0)) throw std::invalid_argument("waveguide width must be positive");
  if (!(depth_um > 0.0)) throw std::invalid_argument("waveguide depth must be positive");
  if (!(delta_n > 0.0 && delta_n < 0.1)) throw std::invalid_argument("index step must lie in (0, 0.1)");
  if (!(cover_index >= 1.0)) throw std::invalid_argument("cover index must be >= 1");
}

std::string order_label(ModeOrder order) { return std::to_string(order.m) + std::to_string(order.n); }

double GuidedMode::effective_index() const { return beta * wavelength_um / (2.0 * std::numbers::pi); }

GridSpec make_grid_spec(const WaveguideGeometry& geometry, const GridOptions& options) {
  geometry.validate();
  const double h = options.spacing_um;
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (options.side_margin_um < 0 || options.bottom_margin_um < 0 || options.cover_margin_um < 0)
    throw std::invalid_argument("grid margins must be non-negative");
  // Even node count symmetric about y = 0 so the core walls fall between nodes when b/2 is a
  // multiple of h; z nodes at (k + 1/2) h for the same reason at z = 0 and z = c.
  const int half_y = static_cast<int>(std::ceil((0.5 * geometry.width_um + options.side_margin_um) / h - 1e-9));
  const int above = static_cast<int>(std::ceil(options.cover_margin_um / h - 1e-9));
  const int below = static_cast<int>(std::ceil((geometry.depth_um + options.bottom_margin_um) / h - 1e-9));
  GridSpec spec;
  spec.dy = h;
  spec.dz = h;
  spec.ny = 2 * half_y;
  spec.y0 = -(half_y - 0.5) * h;
  spec.nz = above + below;
  spec.z0 = -(above - 0.5) * h;
  return spec;
}

Grid2D build_index_profile(const Material& material, const WaveguideGeometry& geometry, Polarization pol,
                           double wavelength_um, const GridOptions& options) {
  const GridSpec spec = make_grid_spec(geometry, options);
  const double ns = material.refractive_index(polarization_axis(pol), wavelength_um);
  Grid2D profile(spec);
  const double half_b = 0.5 * geometry.width_um;
  for (int i = 0; i < spec.ny; ++i) {
    const double y = spec.y(i);
    for (int j = 0; j < spec.nz; ++j) {
      const double z = spec.z(j);
      double n = ns;
      if (z < 0.0)
        n = geometry.cover_index;
      else if (std::abs(y) < half_b && z < geometry.depth_um)
        n = ns + geometry.delta_n;
      profile.at(i, j) = n;
    }
  }
  return profile;
}

namespace {

detail::SparseMatrix helmholtz_operator(const Grid2D& profile, double k0, Polarization pol, bool semivectorial) {
  const GridSpec& s = profile.spec;
  const double inv_hy2 = 1.0 / (s.dy * s.dy);
  const double inv_hz2 = 1.0 / (s.dz * s.dz);
  // The dominant field component is normal to interfaces crossed along this axis.
  const bool normal_y = semivectorial && pol == Polarization::H;
  const bool normal_z = semivectorial && pol == Polarization::V;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(s.size() * 5);
  for (int i = 0; i < s.ny; ++i) {
    for (int j = 0; j < s.nz; ++j) {
      const auto p = static_cast<int>(s.index(i, j));
      const double np2 = profile.at(i, j) * profile.at(i, j);
      double diag = k0 * k0 * np2;
      auto couple = [&](int ii, int jj, double inv_h2, bool normal) {
        if (ii < 0 || jj < 0 || ii >= s.ny || jj >= s.nz) {
          diag -= inv_h2;
          return;
        }
        const double nq2 = profile.at(ii, jj) * profile.at(ii, jj);
        double to_q = 1.0;
        double self = 1.0;
        if (normal) {
          to_q = 2.0 * nq2 / (np2 + nq2);
          self = 2.0 * np2 / (np2 + nq2);
        }
        triplets.emplace_back(p, static_cast<int>(s.index(ii, jj)), to_q * inv_h2);
        diag -= self * inv_h2;
      };
      couple(i - 1, j, inv_hy2, normal_y);
      couple(i + 1, j, inv_hy2, normal_y);
      couple(i, j - 1, inv_hz2, normal_z);
      couple(i, j + 1, inv_hz2, normal_z);
      triplets.emplace_back(p, p, diag);
    }
  }
  detail::SparseMatrix a(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(s.size()));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

double boundary_index(const Grid2D& profile) {
  const GridSpec& s = profile.spec;
  double n = 0.0;
  for (int i = 0; i < s.ny; ++i) n = std::max({n, profile.at(i, 0), profile.at(i, s.nz - 1)});
  for (int j = 0; j < s.nz; ++j) n = std::max({n, profile.at(0, j), profile.at(s.ny - 1, j)});
  return n;
}

int sign_changes(const std::vector<double>& line, double threshold) {
  int changes = 0;
  int last = 0;
  for (double v : line) {
    if (std::abs(v) < threshold) continue;
    const int sgn = v > 0 ? 1 : -1;
    if (last != 0 && sgn != last) ++changes;
    last = sgn;
  }
  return changes;
}

void normalize_field(Grid2D& field) {
  double sum = 0.0;
  for (double v : field.values) sum += v * v;
  const double scale = 1.0 / std::sqrt(sum * field.spec.cell_area());
  double peak = 0.0;
  for (double v : field.values) peak = std::max(peak, std::abs(v));
  // Sign convention: the first node (in storage order) within 1% of the peak magnitude is positive.
  double first = 0.0;
  for (double v : field.values)
    if (std::abs(v) >= 0.99 * peak) {
      first = v;
      break;
    }
  const double signed_scale = first < 0 ? -scale : scale;
  for (double& v : field.values) v *= signed_scale;
}

double boundary_ratio(const Grid2D& field) {
  const GridSpec& s = field.spec;
  double peak = 0.0;
  for (double v : field.values) peak = std::max(peak, std::abs(v));
  double edge = 0.0;
  for (int i = 0; i < s.ny; ++i) edge = std::max({edge, std::abs(field.at(i, 0)), std::abs(field.at(i, s.nz - 1))});
  for (int j = 0; j < s.nz; ++j) edge = std::max({edge, std::abs(field.at(0, j)), std::abs(field.at(s.ny - 1, j))});
  return peak > 0 ? edge / peak : 0.0;
}

}  // namespace

ModeOrder classify_order(const Grid2D& field) {
  const GridSpec& s = field.spec;
  std::size_t peak_idx = 0;
  double peak = 0.0;
  for (std::size_t k = 0; k < field.values.size(); ++k)
    if (std::abs(field.values[k]) > peak) {
      peak = std::abs(field.values[k]);
      peak_idx = k;
    }
  const int ip = static_cast<int>(peak_idx / static_cast<std::size_t>(s.nz));
  const int jp = static_cast<int>(peak_idx % static_cast<std::size_t>(s.nz));
  std::vector<double> row(static_cast<std::size_t>(s.ny));
  std::vector<double> col(static_cast<std::size_t>(s.nz));
  for (int i = 0; i < s.ny; ++i) row[static_cast<std::size_t>(i)] = field.at(i, jp);
  for (int j = 0; j < s.nz; ++j) col[static_cast<std::size_t>(j)] = field.at(ip, j);
  const double threshold = 1e-3 * peak;
  return {sign_changes(row, threshold), sign_changes(col, threshold)};
}

std::vector<GuidedMode> solve_modes(const Grid2D& profile, Polarization pol, double wavelength_um, int max_modes,
                                    const SolveOptions& options) {
  if (max_modes <= 0) return {};
  if (!(wavelength_um > 0.0)) throw std::invalid_argument("wavelength must be positive");
  const double k0 = 2.0 * std::numbers::pi / wavelength_um;
  const double n_max = *std::max_element(profile.values.begin(), profile.values.end());
  const double n_edge = options.cutoff_index ? *options.cutoff_index : boundary_index(profile);
  const double cutoff = k0 * k0 * n_edge * n_edge;

  const auto a = helmholtz_operator(profile, k0, pol, options.semivectorial);
  detail::ShiftInvertOptions eig;
  eig.wanted = max_modes;
  eig.krylov_dim = options.krylov_dim > 0 ? options.krylov_dim : std::max(3 * max_modes + 20, 40);
  eig.tolerance = options.tolerance;
  eig.max_restarts = options.max_restarts;
  eig.must_converge = [cutoff](double value) { return value > cutoff; };
  const auto pairs = detail::shift_invert_eigs(a, k0 * k0 * n_max * n_max, eig);

  std::vector<GuidedMode> modes;
  for (const auto& pair : pairs) {
    if (!(pair.value > cutoff)) continue;
    GuidedMode mode;
    mode.polarization = pol;
    mode.wavelength_um = wavelength_um;
    mode.beta = std::sqrt(pair.value);
    mode.residual = pair.residual;
    mode.field = Grid2D(profile.spec);
    std::copy(pair.vector.data(), pair.vector.data() + pair.vector.size(), mode.field.values.begin());
    normalize_field(mode.field);
    mode.order = classify_order(mode.field);
    mode.boundary_field_ratio = boundary_ratio(mode.field);
    modes.push_back(std::move(mode));
  }
  return modes;
}

GuidedMode find_mode(const Grid2D& profile, Polarization pol, double wavelength_um, ModeOrder order, int max_modes,
                     const SolveOptions& options) {
  auto modes = solve_modes(profile, pol, wavelength_um, max_modes, options);
  for (auto& mode : modes)
    if (mode.order == order) return std::move(mode);
  std::ostringstream os;
  os << "no guided " << polarization_label(pol) << " mode of order " << order_label(order) << " at "
     << wavelength_um << " um among " << modes.size() << " guided modes found";
  throw NumericError(os.str());
}

double mode_overlap(std::span<const GuidedMode* const> modes) {
  if (modes.size() < 2 || modes.size() > 3) throw std::invalid_argument("mode_overlap takes 2 or 3 modes");
  const GridSpec& spec = modes[0]->field.spec;
  std::vector<Grid2D> resampled;
  resampled.reserve(modes.size());
  for (const GuidedMode* m : modes) {
    try {
      resampled.push_back(resample(m->field, spec));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("mode_overlap: incompatible grids: ") + e.what());
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    double prod = 1.0;
    for (const auto& g : resampled) prod *= g.values[k];
    sum += prod;
  }
  return sum * spec.cell_area();
}

double mode_overlap(const GuidedMode& a, const GuidedMode& b) {
  const GuidedMode* list[] = {&a, &b};
  return mode_overlap(std::span<const GuidedMode* const>(list));
}

double mode_overlap(const GuidedMode& a, const GuidedMode& b, const GuidedMode& c) {
  const GuidedMode* list[] = {&a, &b, &c};
  return mode_overlap(std::span<const GuidedMode* const>(list));
}

ConvergenceReport check_convergence(const Material& material, const WaveguideGeometry& geometry, Polarization pol,
                                    double wavelength_um, ModeOrder order, const GridOptions& coarse,
                                    const SolveOptions& options) {
  GridOptions fine = coarse;
  fine.spacing_um = 0.5 * coarse.spacing_um;
  const int count = order.m + order.n + 2;
  const auto coarse_mode =
      find_mode(build_index_profile(material, geometry, pol, wavelength_um, coarse), pol, wavelength_um, order, count, options);
  const auto fine_mode =
      find_mode(build_index_profile(material, geometry, pol, wavelength_um, fine), pol, wavelength_um, order, count, options);
  ConvergenceReport r;
  r.beta_coarse = coarse_mode.beta;
  r.beta_fine = fine_mode.beta;
  // second-order scheme: beta(h) ~ beta0 + C h^2
  r.beta_extrapolated = (4.0 * r.beta_fine - r.beta_coarse) / 3.0;
  r.change = std::abs(r.beta_fine - r.beta_coarse);
  return r;
}

}  // namespace modeconv
