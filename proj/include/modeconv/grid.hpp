#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace modeconv {

// Uniform node layout over the waveguide cross-section (y lateral, z depth, um).
// Nodes sit at y0 + i*dy, z0 + j*dz. The Dirichlet walls lie one spacing beyond the
// outermost nodes, so y_min()/y_max() describe the enclosing box.
struct GridSpec {
  double y0 = 0.0;
  double z0 = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  int ny = 0;
  int nz = 0;

  double y(int i) const { return y0 + i * dy; }
  double z(int j) const { return z0 + j * dz; }
  double y_min() const { return y0 - dy; }
  double y_max() const { return y0 + ny * dy; }
  double z_min() const { return z0 - dz; }
  double z_max() const { return z0 + nz * dz; }
  double cell_area() const { return dy * dz; }
  std::size_t size() const { return static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(nz) + static_cast<std::size_t>(j);
  }

  bool same_layout(const GridSpec& o, double tol = 1e-9) const {
    return ny == o.ny && nz == o.nz && std::abs(y0 - o.y0) < tol && std::abs(z0 - o.z0) < tol &&
           std::abs(dy - o.dy) < tol && std::abs(dz - o.dz) < tol;
  }
};

struct Grid2D {
  GridSpec spec;
  std::vector<double> values;

  Grid2D() = default;
  explicit Grid2D(const GridSpec& s, double fill = 0.0) : spec(s), values(s.size(), fill) {}

  double& at(int i, int j) { return values[spec.index(i, j)]; }
  double at(int i, int j) const { return values[spec.index(i, j)]; }

  // Bilinear interpolation; zero outside the node hull (matches the Dirichlet walls).
  double sample(double y, double z) const {
    const double fy = (y - spec.y0) / spec.dy;
    const double fz = (z - spec.z0) / spec.dz;
    if (fy < -1.0 || fz < -1.0 || fy > spec.ny || fz > spec.nz) return 0.0;
    const int i = static_cast<int>(std::floor(fy));
    const int j = static_cast<int>(std::floor(fz));
    const double ty = fy - i;
    const double tz = fz - j;
    auto v = [&](int a, int b) {
      if (a < 0 || b < 0 || a >= spec.ny || b >= spec.nz) return 0.0;
      return at(a, b);
    };
    return (1 - ty) * (1 - tz) * v(i, j) + ty * (1 - tz) * v(i + 1, j) + (1 - ty) * tz * v(i, j + 1) +
           ty * tz * v(i + 1, j + 1);
  }
};

// Resample `src` onto the node layout of `target`. Throws if the boxes do not intersect.
inline Grid2D resample(const Grid2D& src, const GridSpec& target) {
  if (src.spec.same_layout(target)) return src;
  const bool disjoint = src.spec.y_max() <= target.y_min() || target.y_max() <= src.spec.y_min() ||
                        src.spec.z_max() <= target.z_min() || target.z_max() <= src.spec.z_min();
  if (disjoint) throw std::invalid_argument("resample: grids do not overlap");
  Grid2D out(target);
  for (int i = 0; i < target.ny; ++i)
    for (int j = 0; j < target.nz; ++j) out.at(i, j) = src.sample(target.y(i), target.z(j));
  return out;
}

}  // namespace modeconv
