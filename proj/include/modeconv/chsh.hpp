#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "modeconv/coupler.hpp"
#include "modeconv/errors.hpp"
#include "modeconv/spdc.hpp"

namespace modeconv {

// |theta> = cos(theta)|00> + sin(theta)|10>; outcome 1 is the orthogonal state |theta + pi/2>.
Eigen::Vector2d projection_state(double theta, int outcome);

struct CoincidenceProbabilities {
  double p00 = 0.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;

  double sum() const { return p00 + p01 + p10 + p11; }
  double correlation() const { return p00 + p11 - p01 - p10; }
};

// theta1 rotates the H photon's analyser, theta2 the V photon's.
CoincidenceProbabilities coincidence_probabilities(const TwoPhotonState& state, double theta1, double theta2);
double correlation(const TwoPhotonState& state, double theta1, double theta2);

// Radians, each wrapped into [0, pi). theta1/theta1p act on H, theta2/theta2p on V.
struct MeasurementSettings {
  double theta1 = 0.0;
  double theta1p = 0.0;
  double theta2 = 0.0;
  double theta2p = 0.0;

  static MeasurementSettings from_degrees(double t1, double t1p, double t2, double t2p);
  std::array<double, 4> degrees() const;
  MeasurementSettings wrapped() const;
};

struct DriveVoltages {
  double theta1 = 0.0;
  double theta1p = 0.0;
  double theta2 = 0.0;
  double theta2p = 0.0;
};

struct ChshResult {
  MeasurementSettings settings;
  // E(t1,t2), E(t1',t2), E(t1',t2'), E(t1,t2')
  std::array<double, 4> correlations{};
  double s_value = 0.0;
  std::optional<DriveVoltages> voltages;
};

// S = E(t1,t2) + E(t1',t2) + E(t1',t2') - E(t1,t2')
ChshResult chsh_value(const TwoPhotonState& state, const MeasurementSettings& settings);

// Correlation tensor restricted to the real measurement plane (sigma_x, sigma_z on each qubit).
struct PlanarCorrelation {
  double t_xx = 0.0;
  double t_zz = 0.0;
  double t_xz = 0.0;
  double t_zx = 0.0;
};

PlanarCorrelation planar_correlation(const TwoPhotonState& state);
// 2 sqrt(s1^2 + s2^2) from the singular values of the planar correlation matrix.
double analytic_planar_bound(const TwoPhotonState& state);

struct OptimizerOptions {
  int max_iterations = 4000;
  double tolerance = 1e-13;  // spread of S over the simplex
  double initial_step = 0.3;  // radians
};

class OptimizerError : public NumericError {
 public:
  OptimizerError(const std::string& what, ChshResult best) : NumericError(what), best_(std::move(best)) {}
  const ChshResult& best() const { return best_; }

 private:
  ChshResult best_;
};

// Nelder-Mead from eight fixed starts, best S wins. Throws OptimizerError with the best
// result when no start converges.
ChshResult optimize_settings(const TwoPhotonState& state, const OptimizerOptions& options = {});

// rho' = (mH x mV) rho (mH x mV)^dagger. Throws std::invalid_argument unless both are unitary to 1e-9.
TwoPhotonState apply_converters(const TwoPhotonState& state, const Eigen::Matrix2cd& m_h, const Eigen::Matrix2cd& m_v);

// Drive voltages realizing each analyser angle as a phase-matched rotation kappa L = theta.
DriveVoltages settings_to_voltages(const MeasurementSettings& settings, const CouplingDesign& design_h,
                                   const CouplingDesign& design_v);

}  // namespace modeconv
