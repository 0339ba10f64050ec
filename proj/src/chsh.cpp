#include "modeconv/chsh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace modeconv {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double t) {
  double r = std::fmod(t, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;
  return r;
}

double deg(double rad) { return rad * 180.0 / kPi; }
double rad(double d) { return d * kPi / 180.0; }

Eigen::Vector4d product(const Eigen::Vector2d& h, const Eigen::Vector2d& v) {
  // index = 2 * (H mode) + (V mode)
  return {h[0] * v[0], h[0] * v[1], h[1] * v[0], h[1] * v[1]};
}

double expectation(const Eigen::Matrix4cd& rho, const Eigen::Vector4d& psi) {
  const Eigen::Vector4cd c = psi.cast<std::complex<double>>();
  return (c.adjoint() * rho * c)(0, 0).real();
}

void check_unitary(const Eigen::Matrix2cd& m, const char* name) {
  const double err = (m.adjoint() * m - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-9)) {
    std::ostringstream os;
    os << "apply_converters: " << name << " is not unitary (max |M^dagger M - I| = " << err << ")";
    throw std::invalid_argument(os.str());
  }
}

using Point = Eigen::Vector4d;

MeasurementSettings to_settings(const Point& x) { return MeasurementSettings{x[0], x[1], x[2], x[3]}.wrapped(); }

struct LocalResult {
  Point x;
  double s = 0.0;
  bool converged = false;
};

// Nelder-Mead maximizing S, standard coefficients (1, 2, 0.5, 0.5).
LocalResult nelder_mead(const TwoPhotonState& state, const Point& start, const OptimizerOptions& opt,
                        int& iterations) {
  auto f = [&](const Point& p) { return -chsh_value(state, to_settings(p)).s_value; };
  std::array<Point, 5> simplex;
  std::array<double, 5> values{};
  simplex[0] = start;
  for (int k = 0; k < 4; ++k) {
    simplex[static_cast<std::size_t>(k + 1)] = start;
    simplex[static_cast<std::size_t>(k + 1)][k] += opt.initial_step;
  }
  for (std::size_t k = 0; k < 5; ++k) values[k] = f(simplex[k]);

  std::array<std::size_t, 5> order{0, 1, 2, 3, 4};
  while (iterations < opt.max_iterations) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[4];
    const std::size_t second = order[3];
    if (values[worst] - values[best] <= opt.tolerance) return {simplex[best], -values[best], true};
    ++iterations;

    Point centroid = Point::Zero();
    for (std::size_t k = 0; k < 4; ++k) centroid += simplex[order[k]];
    centroid /= 4.0;

    const Point reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const Point expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Point contracted = outside ? centroid + 0.5 * (reflected - centroid)
                                     : centroid + 0.5 * (simplex[worst] - centroid);
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k < 5; ++k) {
      const std::size_t idx = order[k];
      simplex[idx] = simplex[best] + 0.5 * (simplex[idx] - simplex[best]);
      values[idx] = f(simplex[idx]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(it - values.begin());
  return {simplex[idx], -values[idx], false};
}

// Degrees, in (theta1, theta1', theta2, theta2') order.
constexpr std::array<std::array<double, 4>, 8> kStarts{{
    {90.0, 45.0, 22.5, 67.5},
    {87.850, 42.832, 24.598, 69.720},
    {0.0, 45.0, 22.5, 157.5},
    {30.0, 120.0, 60.0, 150.0},
    {10.0, 55.0, 100.0, 145.0},
    {135.0, 0.0, 157.5, 112.5},
    {170.0, 80.0, 40.0, 5.0},
    {60.0, 15.0, 120.0, 75.0},
}};

}  // namespace

Eigen::Vector2d projection_state(double theta, int outcome) {
  if (outcome == 0) return {std::cos(theta), std::sin(theta)};
  return {-std::sin(theta), std::cos(theta)};
}

CoincidenceProbabilities coincidence_probabilities(const TwoPhotonState& state, double theta1, double theta2) {
  std::array<double, 4> p{};
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n)
      p[static_cast<std::size_t>(2 * m + n)] =
          expectation(state.rho, product(projection_state(theta1, m), projection_state(theta2, n)));
  return {p[0], p[1], p[2], p[3]};
}

double correlation(const TwoPhotonState& state, double theta1, double theta2) {
  return coincidence_probabilities(state, theta1, theta2).correlation();
}

MeasurementSettings MeasurementSettings::from_degrees(double t1, double t1p, double t2, double t2p) {
  return MeasurementSettings{rad(t1), rad(t1p), rad(t2), rad(t2p)}.wrapped();
}

std::array<double, 4> MeasurementSettings::degrees() const {
  return {deg(theta1), deg(theta1p), deg(theta2), deg(theta2p)};
}

MeasurementSettings MeasurementSettings::wrapped() const {
  return {wrap_angle(theta1), wrap_angle(theta1p), wrap_angle(theta2), wrap_angle(theta2p)};
}

ChshResult chsh_value(const TwoPhotonState& state, const MeasurementSettings& settings) {
  ChshResult r;
  r.settings = settings;
  r.correlations = {correlation(state, settings.theta1, settings.theta2),
                    correlation(state, settings.theta1p, settings.theta2),
                    correlation(state, settings.theta1p, settings.theta2p),
                    correlation(state, settings.theta1, settings.theta2p)};
  r.s_value = r.correlations[0] + r.correlations[1] + r.correlations[2] - r.correlations[3];
  return r;
}

PlanarCorrelation planar_correlation(const TwoPhotonState& state) {
  Eigen::Matrix2cd sx;
  sx << 0, 1, 1, 0;
  Eigen::Matrix2cd sz;
  sz << 1, 0, 0, -1;
  auto t = [&](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd op;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) op.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return (state.rho * op).trace().real();
  };
  return {t(sx, sx), t(sz, sz), t(sx, sz), t(sz, sx)};
}

double analytic_planar_bound(const TwoPhotonState& state) {
  const auto c = planar_correlation(state);
  Eigen::Matrix2d t;
  t << c.t_xx, c.t_xz, c.t_zx, c.t_zz;
  const Eigen::Vector2d s = Eigen::JacobiSVD<Eigen::Matrix2d>(t).singularValues();
  return 2.0 * s.norm();
}

ChshResult optimize_settings(const TwoPhotonState& state, const OptimizerOptions& options) {
  std::optional<ChshResult> best;
  bool any_converged = false;
  int total_iterations = 0;
  for (const auto& start_deg : kStarts) {
    Point x{rad(start_deg[0]), rad(start_deg[1]), rad(start_deg[2]), rad(start_deg[3])};
    int iterations = 0;
    LocalResult local = nelder_mead(state, x, options, iterations);
    // Restart from the converged point to guard against a collapsed simplex.
    while (local.converged && iterations < options.max_iterations) {
      LocalResult again = nelder_mead(state, local.x, options, iterations);
      const bool stalled = again.s - local.s <= options.tolerance;
      if (again.s > local.s) local = again;
      if (stalled) break;
    }
    total_iterations += iterations;
    any_converged = any_converged || local.converged;
    ChshResult r = chsh_value(state, to_settings(local.x));
    if (!best || r.s_value > best->s_value) best = r;
  }
  if (!any_converged) {
    std::ostringstream os;
    os.precision(10);
    os << "optimize_settings: no start converged within " << options.max_iterations << " iterations (best S = "
       << best->s_value << ", " << total_iterations << " iterations in total)";
    throw OptimizerError(os.str(), *best);
  }
  return *best;
}

TwoPhotonState apply_converters(const TwoPhotonState& state, const Eigen::Matrix2cd& m_h, const Eigen::Matrix2cd& m_v) {
  check_unitary(m_h, "H converter matrix");
  check_unitary(m_v, "V converter matrix");
  Eigen::Matrix4cd u;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) u.block<2, 2>(2 * i, 2 * j) = m_h(i, j) * m_v;
  TwoPhotonState out = state;
  out.rho = u * state.rho * u.adjoint();
  return out;
}

DriveVoltages settings_to_voltages(const MeasurementSettings& settings, const CouplingDesign& design_h,
                                   const CouplingDesign& design_v) {
  const auto s = settings.wrapped();
  return {voltage_for_angle(s.theta1, design_h), voltage_for_angle(s.theta1p, design_h),
          voltage_for_angle(s.theta2, design_v), voltage_for_angle(s.theta2p, design_v)};
}

}  // namespace modeconv
