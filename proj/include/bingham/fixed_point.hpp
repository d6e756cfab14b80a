#pragma once

#include "bingham/assembly.hpp"
#include "bingham/linsolve.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace bingham {

/// Norm used for residuals and for the Anderson least-squares problem.
enum class NormKind {
  dof,  // Euclidean norm of the coefficient vector
  l2,   // L2 norm of the velocity field (P2 mass matrix)
  h1,   // ||Dv|| through the symmetric-gradient Gram matrix
};

inline std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::dof: return "dof";
    case NormKind::l2: return "l2";
    case NormKind::h1: return "h1";
  }
  return "?";
}

inline NormKind parse_norm_kind(std::string_view s) {
  if (s == "dof") return NormKind::dof;
  if (s == "l2") return NormKind::l2;
  if (s == "h1") return NormKind::h1;
  throw std::invalid_argument("unknown norm kind '" + std::string(s) + "' (expected dof, l2 or h1)");
}

/// Inner product <a, b> = a^T W b on velocity coefficient vectors, with W
/// the identity, the mass matrix or the strain Gram matrix.
class InnerProduct {
 public:
  InnerProduct() = default;
  InnerProduct(NormKind kind, std::shared_ptr<const SparseMatrix> weight) : kind_(kind), weight_(std::move(weight)) {
    if (kind_ != NormKind::dof && !weight_) throw std::invalid_argument("InnerProduct: weighted norm needs a matrix");
  }

  static InnerProduct for_space(NormKind kind, const TaylorHoodSpace& space) {
    switch (kind) {
      case NormKind::dof: return {};
      case NormKind::l2: return {kind, std::make_shared<const SparseMatrix>(velocity_mass_matrix(space))};
      case NormKind::h1: return {kind, std::make_shared<const SparseMatrix>(strain_gram_matrix(space))};
    }
    return {};
  }

  [[nodiscard]] NormKind kind() const { return kind_; }

  [[nodiscard]] double dot(const Vector& a, const Vector& b) const {
    if (!weight_) return a.dot(b);
    return a.dot(*weight_ * b);
  }
  [[nodiscard]] double norm(const Vector& a) const { return std::sqrt(std::max(0.0, dot(a, a))); }

  /// W a
  [[nodiscard]] Vector apply(const Vector& a) const {
    if (!weight_) return a;
    return *weight_ * a;
  }

 private:
  NormKind kind_ = NormKind::dof;
  std::shared_ptr<const SparseMatrix> weight_;
};

/// Discrete regularized Bingham problem posed as a fixed point u = G(u).
struct FixedPointProblem {
  std::shared_ptr<const TaylorHoodSpace> space;
  BinghamParameters params;
  DirichletData dirichlet;
  VelocityField forcing;  // empty means f = 0
};

/// The Picard solution operator G and its directional derivative G'.
///
/// G(u) solves the Stokes-like problem with viscosity frozen at u:
///   2 mu (D G(u), Dv) + tau_s (D G(u) / |Du|_eps, Dv) = (f, v),  div G(u) = 0.
/// Not safe for concurrent use (the cached factorization is mutated).
class PicardOperator {
 public:
  explicit PicardOperator(FixedPointProblem problem)
      : problem_(std::move(problem)), assembler_(problem_.space) {
    problem_.params.validate();
    if (problem_.dirichlet.dofs != problem_.space->dirichlet_dofs())
      throw std::invalid_argument("PicardOperator: Dirichlet data does not match the space's boundary dofs");
    lift_ = problem_.dirichlet.lift(problem_.space->velocity_dof_count());
  }

  [[nodiscard]] const FixedPointProblem& problem() const { return problem_; }
  [[nodiscard]] const TaylorHoodSpace& space() const { return *problem_.space; }
  [[nodiscard]] const SaddleAssembler& assembler() const { return assembler_; }

  /// Zero field with the Dirichlet values applied.
  [[nodiscard]] State initial_state() const {
    return {lift_, Vector::Zero(static_cast<Eigen::Index>(space().pressure_dof_count()))};
  }

  [[nodiscard]] SaddleSolution apply_full(const Vector& u) {
    check_velocity(u);
    const SaddleSystem system = assembler_.assemble(u, problem_.params, problem_.dirichlet, problem_.forcing);
    return solver_.solve(system);
  }

  [[nodiscard]] State apply(const Vector& u) { return apply_full(u).state; }

  struct Residual {
    Vector w;
    double norm = 0.0;
    State image;  // G(u), kept so callers need not re-apply
  };

  /// w = G(u) - u on the velocity; Dirichlet entries are exactly zero.
  [[nodiscard]] Residual residual(const Vector& u, const InnerProduct& ip) {
    Residual r;
    r.image = apply(u);
    r.w = r.image.u - u;
    for (int d : problem_.dirichlet.dofs) r.w[d] = 0.0;
    r.norm = ip.norm(r.w);
    return r;
  }

  /// G'(u; h): same frozen left-hand side as G at u, right-hand side
  /// s tau_s ((Du:Dh) / |Du|^3_eps DG(u), Dv), homogeneous Dirichlet data.
  /// s is the contraction scale of the strain measure (1 for Frobenius).
  [[nodiscard]] Vector apply_prime(const Vector& u, const Vector& h) {
    check_velocity(u);
    check_velocity(h);
    const State gu = apply(u);
    return apply_prime(u, h, gu.u);
  }

  /// Variant reusing a known G(u).
  [[nodiscard]] Vector apply_prime(const Vector& u, const Vector& h, const Vector& g_of_u) {
    const TaylorHoodSpace& sp = space();
    const BinghamParameters& par = problem_.params;
    const double scale = contraction_scale(par.measure) * par.tau_s;
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(sp.velocity_dof_count()));
    if (scale != 0.0) {
      const auto& rule = sp.quadrature();
      for (std::size_t t = 0; t < sp.mesh().triangle_count(); ++t) {
        const AffineMap map = sp.mesh().element_geometry(t);
        const auto dofs = sp.element_velocity_dofs(t);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          const BasisValues& b = sp.basis_tables()[q];
          const auto g = sp.physical_gradients(b, map.inverse_transpose);
          const SymTensor2 du = symmetric_part(sp.velocity_gradient(u, t, b, map.inverse_transpose));
          const SymTensor2 dh = symmetric_part(sp.velocity_gradient(h, t, b, map.inverse_transpose));
          const SymTensor2 dg = symmetric_part(sp.velocity_gradient(g_of_u, t, b, map.inverse_transpose));
          const double modulus = par.modulus(du);
          const double coef =
              scale * du.contract(dh) / (modulus * modulus * modulus) * rule.points[q].weight * map.det;
          for (int i = 0; i < 12; ++i) rhs[dofs[i]] += coef * dg.contract(detail::basis_strain(g, i));
        }
      }
    }
    const SaddleSystem system = assembler_.assemble_homogeneous(u, par, rhs);
    return solver_.solve(system).state.u;
  }

 private:
  void check_velocity(const Vector& u) const {
    if (u.size() != static_cast<Eigen::Index>(space().velocity_dof_count()))
      throw std::invalid_argument("PicardOperator: velocity vector has wrong length");
  }

  FixedPointProblem problem_;
  SaddleAssembler assembler_;
  SaddleSolver solver_;
  Vector lift_;
};

/// ||Dv|| evaluated by quadrature.
inline double strain_norm(const TaylorHoodSpace& space, const Vector& v) {
  const auto& rule = space.quadrature();
  double total = 0.0;
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const AffineMap map = space.mesh().element_geometry(t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const SymTensor2 d = symmetric_part(space.velocity_gradient(v, t, space.basis_tables()[q], map.inverse_transpose));
      total += rule.points[q].weight * map.det * d.contract(d);
    }
  }
  return std::sqrt(total);
}

}  // namespace bingham
