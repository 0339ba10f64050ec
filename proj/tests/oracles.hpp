#pragma once

// Independent reference computations shared by unit tests and the acceptance suite.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace oracle {

// Classical RK4 on dA/dx = kappa B e^{2i delta x}, dB/dx = -kappa A e^{-2i delta x}; columns are
// the responses to unit inputs in A and B.
inline Eigen::Matrix2cd integrate_coupled(double kappa, double delta, double length, int steps) {
  using cd = std::complex<double>;
  auto rhs = [&](double x, const Eigen::Vector2cd& y) {
    const cd ph = std::exp(cd(0.0, 2.0 * delta * x));
    return Eigen::Vector2cd(kappa * y[1] * ph, -kappa * y[0] * std::conj(ph));
  };
  Eigen::Matrix2cd out;
  for (int col = 0; col < 2; ++col) {
    Eigen::Vector2cd y = Eigen::Vector2cd::Zero();
    y[col] = 1.0;
    const double h = length / steps;
    for (int k = 0; k < steps; ++k) {
      const double x = k * h;
      const Eigen::Vector2cd k1 = rhs(x, y);
      const Eigen::Vector2cd k2 = rhs(x + h / 2, y + h / 2 * k1);
      const Eigen::Vector2cd k3 = rhs(x + h / 2, y + h / 2 * k2);
      const Eigen::Vector2cd k4 = rhs(x + h, y + h * k3);
      y += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.col(col) = y;
  }
  return out;
}

// Analyser correlation for states supported on |01>, |10>; independent of w.
inline double correlation(double v, double t1, double t2) {
  return -std::cos(2 * t1) * std::cos(2 * t2) + 2 * v * std::sin(2 * t1) * std::sin(2 * t2);
}

// Maximal S over real analyser angles.
inline double planar_bound(double v) { return 2.0 * std::sqrt(1.0 + 4.0 * v * v); }

}  // namespace oracle
