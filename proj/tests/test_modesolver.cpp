#include <cmath>
#include <numbers>

#include "doctest.h"
#include "modeconv/errors.hpp"
#include "modeconv/modesolver.hpp"

using namespace modeconv;

namespace {

const Material& ktp() {
  static const Material m = load_material(MODECONV_SOURCE_DIR "/data/ktp_fan1987.yaml");
  return m;
}

GridOptions coarse() {
  GridOptions g;
  g.spacing_um = 0.05;
  return g;
}

const WaveguideGeometry kSource{5.0, 2.0, 0.02, 1.0};
const WaveguideGeometry kConverter{3.0, 2.0, 0.02, 1.0};
constexpr double kSignal = 0.750776;
constexpr double kIdler = 0.820435;

std::vector<GuidedMode> solve(const WaveguideGeometry& g, Polarization pol, double lambda, int max_modes = 4,
                              const GridOptions& grid = coarse()) {
  return solve_modes(build_index_profile(ktp(), g, pol, lambda, grid), pol, lambda, max_modes);
}

// Even fundamental mode of a symmetric slab by bisection on the transcendental equation
//   kt tan(kt w/2) = r gamma,  r = 1 (TE) or n1^2/n2^2 (TM).
double slab_beta(double n1, double n2, double width, double lambda, bool tm) {
  const double k0 = 2.0 * std::numbers::pi / lambda;
  const double r = tm ? (n1 * n1) / (n2 * n2) : 1.0;
  auto f = [&](double beta) {
    const double kt = std::sqrt(k0 * k0 * n1 * n1 - beta * beta);
    const double g = std::sqrt(beta * beta - k0 * k0 * n2 * n2);
    return kt * std::tan(kt * width / 2.0) - r * g;
  };
  // Fundamental branch: kt w/2 in (0, pi/2).
  double lo = std::max(k0 * n2, std::sqrt(k0 * k0 * n1 * n1 - std::pow(std::numbers::pi / width, 2))) + 1e-12;
  double hi = k0 * n1 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("index profile of the step-index channel") {
  GridOptions g = coarse();
  g.bottom_margin_um = 12.0;
  const auto p = build_index_profile(ktp(), kSource, Polarization::V, kIdler, g);
  const double ns = ktp().refractive_index(Axis::Z, kIdler);
  const double core = p.sample(0.0, 1.0);
  CHECK(core == doctest::Approx(ns + 0.02).epsilon(1e-12));
  CHECK(p.sample(0.0, 12.0) == doctest::Approx(ns).epsilon(1e-12));
  CHECK(p.sample(0.0, -0.5) == doctest::Approx(1.0).epsilon(1e-12));
  const auto ph = build_index_profile(ktp(), kSource, Polarization::H, kSignal, g);
  CHECK(ph.sample(4.0, 1.0) == doctest::Approx(ktp().refractive_index(Axis::Y, kSignal)).epsilon(1e-12));
}

TEST_CASE("source section guides 00 and 10 in both polarizations") {
  for (auto [pol, lambda] : {std::pair{Polarization::H, kSignal}, std::pair{Polarization::V, kIdler}}) {
    const auto modes = solve(kSource, pol, lambda);
    REQUIRE(modes.size() >= 2);
    CHECK(modes[0].order == ModeOrder{0, 0});
    CHECK(modes[1].order == ModeOrder{1, 0});
    CHECK(modes[0].beta > modes[1].beta);
    const double k0 = 2.0 * std::numbers::pi / lambda;
    const double ns = ktp().refractive_index(pol == Polarization::H ? Axis::Y : Axis::Z, lambda);
    for (const auto& m : modes) {
      CHECK(m.beta > k0 * ns);
      CHECK(m.beta < k0 * (ns + 0.02));
      CHECK(m.residual < 1e-9);
      CHECK(mode_overlap(m, m) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("two-mode converter section") {
  const auto h = solve(kConverter, Polarization::H, kSignal);
  const auto v = solve(kConverter, Polarization::V, kIdler);
  REQUIRE(h.size() == 2);
  REQUIRE(v.size() == 2);
  CHECK(h[1].order == ModeOrder{1, 0});
  CHECK(v[1].order == ModeOrder{1, 0});
  const double dbh = h[0].beta - h[1].beta;
  const double dbv = v[0].beta - v[1].beta;
  CHECK(std::abs(dbh - dbv) / dbh > 1e-2);

  SUBCASE("parity and overlaps") {
    CHECK(std::abs(mode_overlap(h[0], h[1])) < 1e-8);
    CHECK(std::abs(mode_overlap(v[0], v[1])) < 1e-8);
    // 10 mode is odd in y about the core centre, 00 even.
    const auto& f10 = h[1].field;
    const auto& f00 = h[0].field;
    for (double z : {0.5, 1.0, 1.5}) {
      CHECK(f10.sample(0.7, z) == doctest::Approx(-f10.sample(-0.7, z)).epsilon(1e-6));
      CHECK(f00.sample(0.7, z) == doctest::Approx(f00.sample(-0.7, z)).epsilon(1e-6));
    }
  }
}

TEST_CASE("labels are stable under grid refinement") {
  GridOptions fine = coarse();
  fine.spacing_um = 0.025;
  const auto a = solve(kConverter, Polarization::V, kIdler, 4, coarse());
  const auto b = solve(kConverter, Polarization::V, kIdler, 4, fine);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].order == b[k].order);
}

TEST_CASE("triple overlap of pump, signal and idler is nonzero") {
  const double pump = 0.392;
  const auto p = find_mode(build_index_profile(ktp(), kSource, Polarization::H, pump, coarse()), Polarization::H,
                           pump, {1, 0}, 8);
  const auto s = solve(kSource, Polarization::H, kSignal);
  const auto i = solve(kSource, Polarization::V, kIdler);
  const double o = mode_overlap(p, s[0], i[1]);
  CHECK(std::abs(o) > 0.1);
}

TEST_CASE("quasi-one-dimensional limit matches the analytic slab") {
  // Core uniform along z: the 2-D operator separates into the slab operator along y and a
  // Dirichlet second difference along z whose lowest eigenvalue is known in closed form.
  const double n1 = 1.87;
  const double n2 = 1.85;
  const double width = 2.0;
  const double lambda = 0.82;
  const double h = 0.01;
  const int half = 800;
  const int nz = 4;
  const double hz = 5.0;  // coarse along z keeps the separable z term small
  GridSpec s{-(half - 0.5) * h, 0.0, h, hz, 2 * half, nz};
  Grid2D profile(s, n2);
  for (int i = 0; i < s.ny; ++i)
    if (std::abs(s.y(i)) < width / 2.0)
      for (int j = 0; j < nz; ++j) profile.at(i, j) = n1;

  const double lambda_z = 4.0 / (hz * hz) * std::pow(std::sin(std::numbers::pi / (2.0 * (nz + 1))), 2);
  SolveOptions opt;
  opt.cutoff_index = n2;
  for (auto [pol, tm] : {std::pair{Polarization::V, false}, std::pair{Polarization::H, true}}) {
    const auto modes = solve_modes(profile, pol, lambda, 1, opt);
    REQUIRE(modes.size() == 1);
    const double beta_y = std::sqrt(modes[0].beta * modes[0].beta + lambda_z);
    const double exact = slab_beta(n1, n2, width, lambda, tm);
    CHECK(std::abs(beta_y - exact) / exact < 1e-4);
  }
}

TEST_CASE("grid convergence of the extrapolated propagation constant") {
  // Contract: Richardson estimates from (50, 25) nm and (25, 12.5) nm agree to 1e-5 rad/um.
  GridOptions g = coarse();
  g.side_margin_um = 3.0;
  g.bottom_margin_um = 3.0;
  g.cover_margin_um = 0.5;
  GridOptions half = g;
  half.spacing_um = 0.025;
  const auto a = check_convergence(ktp(), kConverter, Polarization::H, kSignal, {0, 0}, g);
  const auto b = check_convergence(ktp(), kConverter, Polarization::H, kSignal, {0, 0}, half);
  CHECK(b.beta_coarse == doctest::Approx(a.beta_fine).epsilon(1e-12));
  // Raw beta moves monotonically as the grid is refined.
  CHECK((a.beta_fine - a.beta_coarse) * (b.beta_fine - b.beta_coarse) > 0.0);
  CHECK(std::abs(b.beta_fine - b.beta_coarse) < std::abs(a.beta_fine - a.beta_coarse));
  CHECK(std::abs(b.beta_extrapolated - a.beta_extrapolated) < 1e-5);
}

TEST_CASE("no guided mode gives an empty list") {
  const WaveguideGeometry weak{0.3, 0.3, 0.001, 1.0};
  CHECK(solve(weak, Polarization::V, 1.5).empty());
}

TEST_CASE("argument and solver errors") {
  CHECK_THROWS_AS(WaveguideGeometry({5.0, 2.0, 0.2, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(build_index_profile(ktp(), kSource, Polarization::H, 2.5, coarse()), RangeError);
  const auto p = build_index_profile(ktp(), kConverter, Polarization::H, kSignal, coarse());
  SolveOptions opt;
  opt.max_restarts = 0;
  opt.krylov_dim = 4;
  opt.tolerance = 1e-15;
  CHECK_THROWS_AS(solve_modes(p, Polarization::H, kSignal, 3, opt), NumericError);
  CHECK_THROWS_AS(find_mode(p, Polarization::H, kSignal, {2, 0}), NumericError);
}
