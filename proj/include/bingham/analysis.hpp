#pragma once

#include "bingham/anderson.hpp"
#include "bingham/problems.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bingham {

/// ||D(u - u_h)||, integrated element-wise with a rule of degree
/// max(assembly degree + 2, 8).
inline double h1_seminorm_error(const TaylorHoodSpace& space, const Vector& u, const ExactSolution& exact) {
  if (!exact.gradient) throw std::invalid_argument("h1_seminorm_error: exact solution has no gradient");
  const QuadratureRule rule = triangle_rule(std::max(space.quadrature().degree + 2, 8));
  std::vector<BasisValues> tables;
  for (const auto& qp : rule.points) tables.push_back(eval_basis(qp.bary));
  double total = 0.0;
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const AffineMap map = space.mesh().element_geometry(t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = map.to_physical(rule.points[q].bary[1], rule.points[q].bary[2]);
      const SymTensor2 diff = symmetric_part(exact.gradient(x.x, x.y)) -
                              symmetric_part(space.velocity_gradient(u, t, tables[q], map.inverse_transpose));
      total += rule.points[q].weight * map.det * diff.contract(diff);
    }
  }
  return std::sqrt(total);
}

/// ||u - u_h||_{L2} with the same rule as h1_seminorm_error.
inline double l2_velocity_error(const TaylorHoodSpace& space, const Vector& u, const ExactSolution& exact) {
  if (!exact.velocity) throw std::invalid_argument("l2_velocity_error: exact solution has no velocity");
  const QuadratureRule rule = triangle_rule(std::max(space.quadrature().degree + 2, 8));
  double total = 0.0;
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const AffineMap map = space.mesh().element_geometry(t);
    for (const auto& qp : rule.points) {
      const Point x = map.to_physical(qp.bary[1], qp.bary[2]);
      const Eigen::Vector2d diff = exact.velocity(x.x, x.y) - space.evaluate_velocity(u, t, qp.bary);
      total += qp.weight * map.det * diff.squaredNorm();
    }
  }
  return std::sqrt(total);
}

struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  std::optional<double> rate;  // log(e_prev / e) / log(h_prev / h), from the second row on
};

inline std::vector<ConvergenceRow> rate_table(const std::vector<std::pair<double, double>>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("rate_table: need at least two rows");
  std::vector<ConvergenceRow> table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ConvergenceRow row{rows[i].first, rows[i].second, std::nullopt};
    if (i > 0) {
      const auto& [h_prev, e_prev] = rows[i - 1];
      if (!(row.h < h_prev)) throw std::invalid_argument("rate_table: h must be strictly decreasing");
      row.rate = std::log(e_prev / row.error) / std::log(h_prev / row.h);
    }
    table.push_back(row);
  }
  return table;
}

/// Arithmetic mean of the defined rates.
inline double average_rate(const std::vector<ConvergenceRow>& table) {
  double sum = 0.0;
  int count = 0;
  for (const auto& row : table)
    if (row.rate) {
      sum += *row.rate;
      ++count;
    }
  if (count == 0) throw std::invalid_argument("average_rate: no rates");
  return sum / count;
}

struct RigidRegionMap {
  std::vector<bool> rigid;  // per element
  double area_fraction = 0.0;
};

/// Elements whose strain-rate magnitude |Du| (Frobenius, at the centroid)
/// lies below `threshold`.
inline RigidRegionMap rigid_region(const TaylorHoodSpace& space, const Vector& u, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("rigid_region: threshold must be > 0");
  RigidRegionMap map;
  const Mesh& mesh = space.mesh();
  map.rigid.resize(mesh.triangle_count());
  double rigid_area = 0.0;
  double total_area = 0.0;
  const std::array<double, 3> centroid = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const double area = mesh.triangle_area(t);
    total_area += area;
    map.rigid[t] = space.symmetric_gradient(u, t, centroid).frobenius() < threshold;
    if (map.rigid[t]) rigid_area += area;
  }
  map.area_fraction = rigid_area / total_area;
  return map;
}

enum class ProfileAxis {
  vertical,    // along x = position, reports (y, u1)
  horizontal,  // along y = position, reports (x, u2)
};

struct ProfileSample {
  double coordinate = 0.0;
  double value = 0.0;
};

/// Point evaluations of the P2 velocity along a line through the unit square.
inline std::vector<ProfileSample> centerline_profile(const TaylorHoodSpace& space, const Vector& u, ProfileAxis axis,
                                                     double position = 0.5, int samples = 129) {
  if (samples < 2) throw std::invalid_argument("centerline_profile: need at least two samples");
  if (position < 0.0 || position > 1.0) throw std::invalid_argument("centerline_profile: line outside the domain");
  std::vector<ProfileSample> profile;
  profile.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double s = (i == samples - 1) ? 1.0 : static_cast<double>(i) / (samples - 1);
    const Point pt = axis == ProfileAxis::vertical ? Point{position, s} : Point{s, position};
    const auto hit = space.locate(pt);
    if (!hit) throw std::runtime_error("centerline_profile: sample point not found in mesh");
    const Eigen::Vector2d v = space.evaluate_velocity(u, hit->first, hit->second);
    profile.push_back({s, axis == ProfileAxis::vertical ? v[0] : v[1]});
  }
  return profile;
}

struct TraceSummary {
  int iterations = 0;
  double final_relative_residual = 0.0;
  double mean_theta = 1.0;
  double min_theta = 1.0;
  int columns_dropped = 0;
};

inline TraceSummary summarize_trace(const std::vector<AAStepReport>& trace) {
  TraceSummary s;
  if (trace.empty()) return s;
  s.iterations = trace.back().k;
  s.final_relative_residual = trace.back().relative_residual;
  double sum = 0.0;
  int count = 0;
  for (const auto& r : trace) {
    if (r.k < 2) continue;
    sum += r.theta;
    ++count;
    s.min_theta = std::min(s.min_theta, r.theta);
    s.columns_dropped += r.columns_dropped;
  }
  if (count > 0) s.mean_theta = sum / count;
  return s;
}

}  // namespace bingham
