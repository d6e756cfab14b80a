#pragma once

#include "bingham/mesh.hpp"
#include "bingham/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bingham {

using Vector = Eigen::VectorXd;

/// Symmetric 2x2 tensor stored by its three independent entries.
struct SymTensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  /// Double contraction A:B.
  [[nodiscard]] double contract(const SymTensor2& other) const {
    return xx * other.xx + yy * other.yy + 2.0 * xy * other.xy;
  }
  [[nodiscard]] double frobenius() const { return std::sqrt(contract(*this)); }

  SymTensor2& operator-=(const SymTensor2& o) {
    xx -= o.xx;
    xy -= o.xy;
    yy -= o.yy;
    return *this;
  }
  friend SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
};

/// Symmetric part of a velocity gradient, (G + G^T) / 2.
inline SymTensor2 symmetric_part(const Eigen::Matrix2d& grad) {
  return {grad(0, 0), 0.5 * (grad(0, 1) + grad(1, 0)), grad(1, 1)};
}

/// How the strain-rate magnitude |Du| is measured. `frobenius` is
/// sqrt(Du:Du); `invariant` is the second-invariant form sqrt(Du:Du / 2),
/// under which simple shear u = (g y, 0) has magnitude |g|/2 = |Du_xy|.
enum class StrainMeasure { frobenius, invariant };

[[nodiscard]] constexpr double contraction_scale(StrainMeasure measure) {
  return measure == StrainMeasure::frobenius ? 1.0 : 0.5;
}

/// Regularized magnitude |Du|_eps = sqrt(s * Du:Du + eps^2), s = 1 for the
/// Frobenius measure.
inline double regularized_modulus(const SymTensor2& strain, double epsilon,
                                  StrainMeasure measure = StrainMeasure::frobenius) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("regularized_modulus: epsilon must be > 0");
  return std::sqrt(contraction_scale(measure) * strain.contract(strain) + epsilon * epsilon);
}

/// Values of the reference P2 and P1 Lagrange bases at one point.
/// P2 ordering: vertices 0,1,2 then edges (0,1), (1,2), (2,0).
/// Gradients are with respect to reference coordinates (xi, eta).
struct BasisValues {
  std::array<double, 6> p2{};
  std::array<Eigen::Vector2d, 6> p2_grad{};
  std::array<double, 3> p1{};
  std::array<Eigen::Vector2d, 3> p1_grad{};
};

inline BasisValues eval_basis(const std::array<double, 3>& lambda) {
  // d(lambda_i)/d(xi, eta) for lambda0 = 1 - xi - eta, lambda1 = xi, lambda2 = eta
  static const std::array<Eigen::Vector2d, 3> dl = {Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d(1.0, 0.0),
                                                    Eigen::Vector2d(0.0, 1.0)};
  BasisValues b;
  for (int i = 0; i < 3; ++i) {
    b.p1[i] = lambda[i];
    b.p1_grad[i] = dl[i];
    b.p2[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
    b.p2_grad[i] = (4.0 * lambda[i] - 1.0) * dl[i];
    const int j = (i + 1) % 3;
    b.p2[3 + i] = 4.0 * lambda[i] * lambda[j];
    b.p2_grad[3 + i] = 4.0 * (lambda[j] * dl[i] + lambda[i] * dl[j]);
  }
  return b;
}

using VelocityField = std::function<Eigen::Vector2d(double x, double y)>;
using ScalarField = std::function<double(double x, double y)>;

/// Prescribed values for a set of velocity degrees of freedom.
struct DirichletData {
  std::vector<int> dofs;  // sorted ascending
  std::vector<double> values;

  /// Full-length velocity vector holding the prescribed values, zero elsewhere.
  [[nodiscard]] Vector lift(std::size_t velocity_dofs) const {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(velocity_dofs));
    for (std::size_t i = 0; i < dofs.size(); ++i) g[dofs[i]] = values[i];
    return g;
  }
};

/// One nonlinear iterate: velocity and pressure coefficient vectors.
struct State {
  Vector u;
  Vector p;
};

/// Taylor-Hood P2 velocity / P1 pressure pair on a triangular mesh.
///
/// Scalar P2 nodes are the mesh vertices (0..V-1) followed by the edge
/// midpoints (V..V+E-1). Velocity dofs are blocked by component:
/// dof = component * (V + E) + node. Pressure dofs are the vertices.
/// Every velocity dof on the boundary is constrained.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(Mesh mesh, int quadrature_degree = 5)
      : mesh_(std::move(mesh)), rule_(triangle_rule(quadrature_degree)) {
    const int nv = static_cast<int>(mesh_.vertex_count());
    node_count_ = mesh_.vertex_count() + mesh_.edge_count();
    element_nodes_.resize(mesh_.triangle_count());
    for (std::size_t t = 0; t < mesh_.triangle_count(); ++t) {
      const auto& tri = mesh_.triangles()[t];
      const auto& edges = mesh_.triangle_edges()[t];
      element_nodes_[t] = {tri[0], tri[1], tri[2], nv + edges[0], nv + edges[1], nv + edges[2]};
    }
    boundary_node_.assign(node_count_, false);
    for (int v = 0; v < nv; ++v) boundary_node_[v] = mesh_.boundary_vertex_flags()[v];
    for (std::size_t e = 0; e < mesh_.edge_count(); ++e) boundary_node_[nv + e] = mesh_.boundary_edge_flags()[e];
    for (int c = 0; c < 2; ++c) {
      for (std::size_t node = 0; node < node_count_; ++node) {
        if (boundary_node_[node]) dirichlet_dofs_.push_back(velocity_dof(c, static_cast<int>(node)));
      }
    }
    tables_.reserve(rule_.points.size());
    for (const auto& qp : rule_.points) tables_.push_back(eval_basis(qp.bary));
  }

  [[nodiscard]] const Mesh& mesh() const { return mesh_; }
  [[nodiscard]] const QuadratureRule& quadrature() const { return rule_; }
  /// Reference basis tables at each quadrature point of `quadrature()`.
  [[nodiscard]] const std::vector<BasisValues>& basis_tables() const { return tables_; }

  [[nodiscard]] std::size_t node_count() const { return node_count_; }
  [[nodiscard]] std::size_t velocity_dof_count() const { return 2 * node_count_; }
  [[nodiscard]] std::size_t pressure_dof_count() const { return mesh_.vertex_count(); }

  [[nodiscard]] int velocity_dof(int component, int node) const {
    return component * static_cast<int>(node_count_) + node;
  }

  [[nodiscard]] const std::array<int, 6>& element_nodes(std::size_t t) const { return element_nodes_.at(t); }

  /// x-component dofs of the six nodes, then the y-component dofs.
  [[nodiscard]] std::array<int, 12> element_velocity_dofs(std::size_t t) const {
    const auto& nodes = element_nodes_.at(t);
    std::array<int, 12> dofs{};
    for (int a = 0; a < 6; ++a) {
      dofs[a] = velocity_dof(0, nodes[a]);
      dofs[6 + a] = velocity_dof(1, nodes[a]);
    }
    return dofs;
  }

  [[nodiscard]] const std::array<int, 3>& element_pressure_dofs(std::size_t t) const {
    return mesh_.triangles().at(t);
  }

  [[nodiscard]] Point node_point(std::size_t node) const {
    const std::size_t nv = mesh_.vertex_count();
    return node < nv ? mesh_.vertices()[node] : mesh_.edge_midpoint(node - nv);
  }

  [[nodiscard]] bool is_boundary_node(std::size_t node) const { return boundary_node_.at(node); }

  /// Constrained velocity dofs, ascending.
  [[nodiscard]] const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }

  [[nodiscard]] DirichletData dirichlet_data(const VelocityField& g) const {
    DirichletData data;
    data.dofs = dirichlet_dofs_;
    data.values.reserve(dirichlet_dofs_.size());
    for (int dof : dirichlet_dofs_) {
      const int c = dof / static_cast<int>(node_count_);
      const int node = dof % static_cast<int>(node_count_);
      const Point pt = node_point(node);
      data.values.push_back(g(pt.x, pt.y)[c]);
    }
    return data;
  }

  /// Nodal P2 interpolant of a vector field.
  [[nodiscard]] Vector interpolate(const VelocityField& f) const {
    Vector u(static_cast<Eigen::Index>(velocity_dof_count()));
    for (std::size_t node = 0; node < node_count_; ++node) {
      const Point pt = node_point(node);
      const Eigen::Vector2d v = f(pt.x, pt.y);
      u[velocity_dof(0, static_cast<int>(node))] = v[0];
      u[velocity_dof(1, static_cast<int>(node))] = v[1];
    }
    return u;
  }

  /// Nodal P1 interpolant of a scalar field.
  [[nodiscard]] Vector interpolate_pressure(const ScalarField& f) const {
    Vector p(static_cast<Eigen::Index>(pressure_dof_count()));
    for (std::size_t v = 0; v < mesh_.vertex_count(); ++v) p[v] = f(mesh_.vertices()[v].x, mesh_.vertices()[v].y);
    return p;
  }

  /// Physical gradients of the six P2 basis functions of triangle t.
  [[nodiscard]] std::array<Eigen::Vector2d, 6> physical_gradients(const BasisValues& b,
                                                                  const Eigen::Matrix2d& inv_t) const {
    std::array<Eigen::Vector2d, 6> g;
    for (int a = 0; a < 6; ++a) g[a] = inv_t * b.p2_grad[a];
    return g;
  }

  [[nodiscard]] Eigen::Vector2d evaluate_velocity(const Vector& u, std::size_t t,
                                                  const std::array<double, 3>& bary) const {
    const BasisValues b = eval_basis(bary);
    const auto& nodes = element_nodes_.at(t);
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int a = 0; a < 6; ++a) {
      v[0] += b.p2[a] * u[velocity_dof(0, nodes[a])];
      v[1] += b.p2[a] * u[velocity_dof(1, nodes[a])];
    }
    return v;
  }

  [[nodiscard]] double evaluate_pressure(const Vector& p, std::size_t t, const std::array<double, 3>& bary) const {
    const auto& tri = mesh_.triangles().at(t);
    return bary[0] * p[tri[0]] + bary[1] * p[tri[1]] + bary[2] * p[tri[2]];
  }

  /// Velocity gradient (row = component, column = derivative direction).
  [[nodiscard]] Eigen::Matrix2d velocity_gradient(const Vector& u, std::size_t t, const BasisValues& b,
                                                  const Eigen::Matrix2d& inv_t) const {
    const auto& nodes = element_nodes_.at(t);
    Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 6; ++a) {
      const Eigen::Vector2d g = inv_t * b.p2_grad[a];
      grad.row(0) += u[velocity_dof(0, nodes[a])] * g.transpose();
      grad.row(1) += u[velocity_dof(1, nodes[a])] * g.transpose();
    }
    return grad;
  }

  [[nodiscard]] SymTensor2 symmetric_gradient(const Vector& u, std::size_t t,
                                              const std::array<double, 3>& bary) const {
    const AffineMap map = mesh_.element_geometry(t);
    return symmetric_part(velocity_gradient(u, t, eval_basis(bary), map.inverse_transpose));
  }

  /// Triangle containing `pt` and its barycentric coordinates, by linear search.
  [[nodiscard]] std::optional<std::pair<std::size_t, std::array<double, 3>>> locate(Point pt,
                                                                                     double tol = 1e-12) const {
    for (std::size_t t = 0; t < mesh_.triangle_count(); ++t) {
      const AffineMap map = mesh_.element_geometry(t);
      const Eigen::Vector2d ref =
          map.jacobian.inverse() * Eigen::Vector2d(pt.x - map.origin.x, pt.y - map.origin.y);
      const std::array<double, 3> bary = {1.0 - ref[0] - ref[1], ref[0], ref[1]};
      if (bary[0] >= -tol && bary[1] >= -tol && bary[2] >= -tol) return std::make_pair(t, bary);
    }
    return std::nullopt;
  }

 private:
  Mesh mesh_;
  QuadratureRule rule_;
  std::vector<BasisValues> tables_;
  std::size_t node_count_ = 0;
  std::vector<std::array<int, 6>> element_nodes_;
  std::vector<bool> boundary_node_;
  std::vector<int> dirichlet_dofs_;
};

/// Du at quadrature point `q` of triangle `t`.
inline SymTensor2 symmetric_gradient_at_point(const TaylorHoodSpace& space, const Vector& u, std::size_t t,
                                              std::size_t q) {
  const AffineMap map = space.mesh().element_geometry(t);
  return symmetric_part(space.velocity_gradient(u, t, space.basis_tables().at(q), map.inverse_transpose));
}

}  // namespace bingham
