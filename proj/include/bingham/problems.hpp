#pragma once

#include "bingham/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace bingham {

/// Closed-form velocity field with its gradient (row = component).
struct ExactSolution {
  VelocityField velocity;
  std::function<Eigen::Matrix2d(double x, double y)> gradient;
  ScalarField pressure;
};

enum class CornerPolicy {
  lid_wins,    // lid corners move with the lid
  watertight,  // lid corners stay at rest
};

struct ProblemSpec {
  std::string name;
  int n = 0;  // subdivisions per side of the unit square
  BinghamParameters params;
  VelocityField dirichlet;
  VelocityField forcing;  // empty means f = 0
  std::optional<ExactSolution> exact;
};

struct ChannelProfile {
  double u1 = 0.0;
  double du1_dy = 0.0;
};

/// Plane Bingham flow between plates y = 0 and y = 1 with a rigid plug on
/// [1/2 - tau_s, 1/2 + tau_s]; u2 = 0.
inline ChannelProfile channel_exact(double y, double tau_s) {
  if (!(tau_s >= 0.0 && tau_s < 0.5)) throw std::invalid_argument("channel_exact: tau_s must lie in [0, 1/2)");
  if (y < 0.0 || y > 1.0) throw std::invalid_argument("channel_exact: y must lie in [0, 1]");
  const double a = 1.0 - 2.0 * tau_s;
  if (y < 0.5 - tau_s) {
    const double s = a - 2.0 * y;
    return {(a * a - s * s) / 8.0, s / 2.0};
  }
  if (y <= 0.5 + tau_s) return {a * a / 8.0, 0.0};
  // Mirror image of the lower branch; evaluating at 1 - y keeps u1(1) = 0 exact.
  const double s = a - 2.0 * (1.0 - y);
  return {(a * a - s * s) / 8.0, -s / 2.0};
}

/// Channel flow on the unit square with the exact profile imposed on the
/// whole boundary. The closed-form profile is the exact fully developed flow
/// under the `invariant` strain measure; with the default Frobenius measure
/// the plug is held by the end data and the two discrete solutions agree to
/// well below the discretization error.
inline ProblemSpec make_channel_problem(int n, double epsilon, double tau_s = 0.3, double mu = 1.0,
                                        StrainMeasure measure = StrainMeasure::frobenius) {
  if (n < 2) throw std::invalid_argument("make_channel_problem: n must be >= 2");
  // Validates tau_s up front.
  (void)channel_exact(0.0, tau_s);
  ProblemSpec spec;
  spec.name = "channel";
  spec.n = n;
  spec.params = {mu, tau_s, epsilon, measure};
  spec.params.validate();
  spec.dirichlet = [tau_s](double, double y) {
    return Eigen::Vector2d(channel_exact(std::clamp(y, 0.0, 1.0), tau_s).u1, 0.0);
  };
  ExactSolution exact;
  exact.velocity = spec.dirichlet;
  exact.gradient = [tau_s](double, double y) {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    g(0, 1) = channel_exact(std::clamp(y, 0.0, 1.0), tau_s).du1_dy;
    return g;
  };
  exact.pressure = [](double, double) { return 0.0; };
  spec.exact = std::move(exact);
  return spec;
}

/// Lid-driven cavity: u = (1, 0) on y = 1, u = 0 on the other walls.
inline ProblemSpec make_cavity_problem(int n, double epsilon, double tau_s, double mu = 1.0,
                                       CornerPolicy corners = CornerPolicy::lid_wins,
                                       StrainMeasure measure = StrainMeasure::frobenius) {
  if (n < 2) throw std::invalid_argument("make_cavity_problem: n must be >= 2");
  ProblemSpec spec;
  spec.name = "cavity";
  spec.n = n;
  spec.params = {mu, tau_s, epsilon, measure};
  spec.params.validate();
  spec.dirichlet = [corners](double x, double y) {
    const bool on_lid = y == 1.0;
    const bool corner = x == 0.0 || x == 1.0;
    if (on_lid && (corners == CornerPolicy::lid_wins || !corner)) return Eigen::Vector2d(1.0, 0.0);
    return Eigen::Vector2d(0.0, 0.0);
  };
  return spec;
}

/// Discrete fixed-point problem for `spec` on a uniform mesh of the unit square.
inline FixedPointProblem build_fixed_point_problem(const ProblemSpec& spec, int quadrature_degree = 5) {
  auto space = std::make_shared<const TaylorHoodSpace>(build_uniform_unit_square(spec.n), quadrature_degree);
  FixedPointProblem problem;
  problem.dirichlet = space->dirichlet_data(spec.dirichlet);
  problem.space = std::move(space);
  problem.params = spec.params;
  problem.forcing = spec.forcing;
  return problem;
}

}  // namespace bingham
