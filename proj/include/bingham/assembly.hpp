#pragma once

#include "bingham/spaces.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bingham {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Material and regularization parameters of the regularized Bingham model.
struct BinghamParameters {
  double mu = 1.0;        // plastic viscosity
  double tau_s = 0.0;     // yield stress
  double epsilon = 1e-2;  // regularization
  StrainMeasure measure = StrainMeasure::frobenius;

  void validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
    if (!(tau_s >= 0.0)) throw std::invalid_argument("tau_s must be >= 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  }

  [[nodiscard]] double modulus(const SymTensor2& strain) const { return regularized_modulus(strain, epsilon, measure); }

  /// nu = 2 mu + tau_s / |Du|_eps
  [[nodiscard]] double effective_viscosity(const SymTensor2& strain) const { return 2.0 * mu + tau_s / modulus(strain); }
};

namespace detail {

/// Local 12x12 matrix of nu (D phi_i : D phi_j) for one quadrature point,
/// accumulated with weight `scale` (= nu * w * |J|).
inline void add_strain_block(const std::array<Eigen::Vector2d, 6>& g, double scale, double* local) {
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      const double gxgx = g[a].x() * g[b].x();
      const double gygy = g[a].y() * g[b].y();
      local[a * 12 + b] += scale * (gxgx + 0.5 * gygy);
      local[(6 + a) * 12 + 6 + b] += scale * (gygy + 0.5 * gxgx);
      local[a * 12 + 6 + b] += scale * 0.5 * g[a].y() * g[b].x();
      local[(6 + a) * 12 + b] += scale * 0.5 * g[a].x() * g[b].y();
    }
  }
}

/// Du of the local vector basis function `i` (0..5: x-component, 6..11: y).
inline SymTensor2 basis_strain(const std::array<Eigen::Vector2d, 6>& g, int i) {
  if (i < 6) return {g[i].x(), 0.5 * g[i].y(), 0.0};
  return {0.0, 0.5 * g[i - 6].x(), g[i - 6].y()};
}

}  // namespace detail

/// Coefficient nu(t, q) evaluated per element and quadrature point.
using PointCoefficient = std::function<double(std::size_t t, std::size_t q, const SymTensor2& strain)>;

/// Full (unconstrained) velocity matrix of (nu Du, Dv) over all velocity dofs.
/// `reference` supplies the strain passed to `coefficient`.
inline SparseMatrix assemble_strain_matrix(const TaylorHoodSpace& space, const Vector& reference,
                                           const PointCoefficient& coefficient) {
  const auto n = static_cast<Eigen::Index>(space.velocity_dof_count());
  std::vector<Triplet> triplets;
  triplets.reserve(space.mesh().triangle_count() * 144);
  const auto& rule = space.quadrature();
  std::array<double, 144> local{};
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const AffineMap map = space.mesh().element_geometry(t);
    local.fill(0.0);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const BasisValues& b = space.basis_tables()[q];
      const auto g = space.physical_gradients(b, map.inverse_transpose);
      const SymTensor2 strain = symmetric_part(space.velocity_gradient(reference, t, b, map.inverse_transpose));
      detail::add_strain_block(g, coefficient(t, q, strain) * rule.points[q].weight * map.det, local.data());
    }
    const auto dofs = space.element_velocity_dofs(t);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) triplets.emplace_back(dofs[i], dofs[j], local[i * 12 + j]);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Gram matrix of (Du, Dv); u^T S u = ||Du||^2.
inline SparseMatrix strain_gram_matrix(const TaylorHoodSpace& space) {
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(space.velocity_dof_count()));
  return assemble_strain_matrix(space, zero, [](std::size_t, std::size_t, const SymTensor2&) { return 1.0; });
}

/// Vector P2 mass matrix; u^T M u = ||u||_{L2}^2.
inline SparseMatrix velocity_mass_matrix(const TaylorHoodSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.velocity_dof_count());
  // Mass integrands are degree 4; use at least that.
  const QuadratureRule rule = triangle_rule(std::max(4, space.quadrature().degree));
  std::vector<Triplet> triplets;
  triplets.reserve(space.mesh().triangle_count() * 72);
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const double det = space.mesh().element_geometry(t).det;
    std::array<double, 36> local{};
    for (const auto& qp : rule.points) {
      const BasisValues b = eval_basis(qp.bary);
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 6; ++c) local[a * 6 + c] += qp.weight * det * b.p2[a] * b.p2[c];
    }
    const auto& nodes = space.element_nodes(t);
    for (int comp = 0; comp < 2; ++comp)
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 6; ++c)
          triplets.emplace_back(space.velocity_dof(comp, nodes[a]), space.velocity_dof(comp, nodes[c]), local[a * 6 + c]);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Pressure-by-velocity matrix with entries (div phi_j, q_i), integrated exactly.
inline SparseMatrix divergence_matrix(const TaylorHoodSpace& space) {
  const QuadratureRule rule = triangle_rule(2);
  std::vector<Triplet> triplets;
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const AffineMap map = space.mesh().element_geometry(t);
    const auto dofs = space.element_velocity_dofs(t);
    const auto& pdofs = space.element_pressure_dofs(t);
    std::array<double, 36> local{};
    for (const auto& qp : rule.points) {
      const BasisValues b = eval_basis(qp.bary);
      const auto g = space.physical_gradients(b, map.inverse_transpose);
      for (int i = 0; i < 3; ++i)
        for (int a = 0; a < 6; ++a) {
          local[i * 12 + a] += qp.weight * map.det * b.p1[i] * g[a].x();
          local[i * 12 + 6 + a] += qp.weight * map.det * b.p1[i] * g[a].y();
        }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 12; ++j) triplets.emplace_back(pdofs[i], dofs[j], local[i * 12 + j]);
  }
  SparseMatrix m(static_cast<Eigen::Index>(space.pressure_dof_count()),
                 static_cast<Eigen::Index>(space.velocity_dof_count()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Integrals of the P1 pressure basis functions; c . p is the integral of p.
inline Vector pressure_mean_weights(const TaylorHoodSpace& space) {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(space.pressure_dof_count()));
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const double third_area = space.mesh().triangle_area(t) / 3.0;
    for (int v : space.element_pressure_dofs(t)) c[v] += third_area;
  }
  return c;
}

/// Nonlinear form a_eps(u, w) = ((2 mu + tau_s / |Du|_eps) Du, Dw) with the
/// modulus evaluated at u itself.
inline double apply_a_eps(const TaylorHoodSpace& space, const Vector& u, const Vector& w,
                          const BinghamParameters& params) {
  params.validate();
  const auto& rule = space.quadrature();
  double total = 0.0;
  for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
    const AffineMap map = space.mesh().element_geometry(t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const BasisValues& b = space.basis_tables()[q];
      const SymTensor2 du = symmetric_part(space.velocity_gradient(u, t, b, map.inverse_transpose));
      const SymTensor2 dw = symmetric_part(space.velocity_gradient(w, t, b, map.inverse_transpose));
      total += rule.points[q].weight * map.det * params.effective_viscosity(du) * du.contract(dw);
    }
  }
  return total;
}

/// Linearized saddle-point system with Dirichlet dofs eliminated.
///
/// Unknown layout: free velocity dofs, then pressure dofs. The matrix is
///
///     [ A  B^T ]
///     [ B  0   ]
///
/// with B = -(q, div v), symmetric but indefinite. When the pressure is only
/// defined up to a constant, pressure dof `pinned_pressure` is fixed to zero
/// (its row and column are replaced by the identity); the solver then shifts
/// the pressure to zero mean.
struct SaddleSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::size_t free_velocity_count = 0;
  std::size_t pressure_count = 0;
  bool pressure_constraint = false;
  int pinned_pressure = 0;
  std::shared_ptr<const std::vector<int>> free_dofs;  // free index -> global velocity dof
  Vector lift;                                        // full-length Dirichlet values
  Vector pressure_weights;

  [[nodiscard]] Eigen::Index size() const { return matrix.rows(); }

  [[nodiscard]] SparseMatrix velocity_block() const {
    const auto nf = static_cast<Eigen::Index>(free_velocity_count);
    return matrix.topLeftCorner(nf, nf);
  }
  [[nodiscard]] SparseMatrix divergence_block() const {
    const auto nf = static_cast<Eigen::Index>(free_velocity_count);
    return matrix.block(nf, 0, static_cast<Eigen::Index>(pressure_count), nf);
  }
  [[nodiscard]] Vector rhs_u() const { return rhs.head(static_cast<Eigen::Index>(free_velocity_count)); }
  [[nodiscard]] Vector rhs_p() const {
    return rhs.segment(static_cast<Eigen::Index>(free_velocity_count), static_cast<Eigen::Index>(pressure_count));
  }
};

/// Assembles the frozen-coefficient (Picard) saddle system of one space.
///
/// The sparsity pattern and the element-to-matrix scatter map are built once;
/// each call to `assemble` only refills values, in a fixed element order.
class SaddleAssembler {
 public:
  explicit SaddleAssembler(std::shared_ptr<const TaylorHoodSpace> space) : space_(std::move(space)) {
    if (!space_) throw std::invalid_argument("SaddleAssembler: null space");
    build_pattern();
  }

  [[nodiscard]] const TaylorHoodSpace& space() const { return *space_; }
  [[nodiscard]] std::size_t free_velocity_count() const { return free_dofs_->size(); }
  [[nodiscard]] const std::vector<int>& free_index() const { return free_index_; }

  /// Frozen-coefficient system: viscosity nu_q = 2 mu + tau_s / |Du_prev(x_q)|_eps,
  /// load (f, v) and the Dirichlet lift.
  [[nodiscard]] SaddleSystem assemble(const Vector& u_prev, const BinghamParameters& params,
                                      const DirichletData& dirichlet, const VelocityField& forcing = {}) const {
    params.validate();
    const Vector lift = dirichlet.lift(space_->velocity_dof_count());
    Vector load;
    if (forcing) load = load_vector(forcing);
    return assemble_impl(
        u_prev, lift, load,
        [&](const SymTensor2& prev) {
          const double nu = params.effective_viscosity(prev);
          if (!std::isfinite(nu)) throw std::runtime_error("assemble: non-finite effective viscosity (corrupted state)");
          return nu;
        });
  }

  /// Same left-hand side as `assemble`, but with a caller-supplied velocity
  /// right-hand side (full-length, in dof space) and homogeneous Dirichlet data.
  [[nodiscard]] SaddleSystem assemble_homogeneous(const Vector& u_prev, const BinghamParameters& params,
                                                  const Vector& velocity_rhs) const {
    params.validate();
    const Vector lift = Vector::Zero(static_cast<Eigen::Index>(space_->velocity_dof_count()));
    return assemble_impl(u_prev, lift, velocity_rhs,
                         [&](const SymTensor2& prev) { return params.effective_viscosity(prev); });
  }

  /// (f, v) over all velocity dofs.
  [[nodiscard]] Vector load_vector(const VelocityField& f) const {
    Vector load = Vector::Zero(static_cast<Eigen::Index>(space_->velocity_dof_count()));
    const auto& rule = space_->quadrature();
    for (std::size_t t = 0; t < space_->mesh().triangle_count(); ++t) {
      const AffineMap map = space_->mesh().element_geometry(t);
      const auto dofs = space_->element_velocity_dofs(t);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const BasisValues& b = space_->basis_tables()[q];
        const double xi = rule.points[q].bary[1];
        const double eta = rule.points[q].bary[2];
        const Point x = map.to_physical(xi, eta);
        const Eigen::Vector2d fv = f(x.x, x.y);
        const double wdet = rule.points[q].weight * map.det;
        for (int a = 0; a < 6; ++a) {
          load[dofs[a]] += wdet * fv.x() * b.p2[a];
          load[dofs[6 + a]] += wdet * fv.y() * b.p2[a];
        }
      }
    }
    return load;
  }

 private:
  template <class Viscosity>
  SaddleSystem assemble_impl(const Vector& u_prev, const Vector& lift, const Vector& velocity_rhs,
                             Viscosity&& viscosity) const {
    const TaylorHoodSpace& space = *space_;
    if (u_prev.size() != static_cast<Eigen::Index>(space.velocity_dof_count()))
      throw std::invalid_argument("assemble: velocity vector has wrong length");
    SaddleSystem sys;
    sys.matrix = pattern_;
    std::fill_n(sys.matrix.valuePtr(), sys.matrix.nonZeros(), 0.0);
    sys.rhs = Vector::Zero(pattern_.rows());
    sys.free_velocity_count = free_dofs_->size();
    sys.pressure_count = space.pressure_dof_count();
    sys.pressure_constraint = true;
    sys.pinned_pressure = kPinnedPressure;
    sys.free_dofs = free_dofs_;
    sys.lift = lift;
    sys.pressure_weights = pressure_weights_;

    double* values = sys.matrix.valuePtr();
    const auto& rule = space.quadrature();
    const auto nf = static_cast<Eigen::Index>(free_dofs_->size());
    std::array<double, 144> local_a{};
    std::array<double, 36> local_b{};
    for (std::size_t t = 0; t < space.mesh().triangle_count(); ++t) {
      const AffineMap map = space.mesh().element_geometry(t);
      local_a.fill(0.0);
      local_b.fill(0.0);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const BasisValues& b = space.basis_tables()[q];
        const auto g = space.physical_gradients(b, map.inverse_transpose);
        const SymTensor2 prev = symmetric_part(space.velocity_gradient(u_prev, t, b, map.inverse_transpose));
        const double wdet = rule.points[q].weight * map.det;
        detail::add_strain_block(g, viscosity(prev) * wdet, local_a.data());
        for (int i = 0; i < 3; ++i)
          for (int a = 0; a < 6; ++a) {
            local_b[i * 12 + a] -= wdet * b.p1[i] * g[a].x();
            local_b[i * 12 + 6 + a] -= wdet * b.p1[i] * g[a].y();
          }
      }
      const auto dofs = space.element_velocity_dofs(t);
      const int* pos_a = &a_positions_[t * 144];
      for (int i = 0; i < 12; ++i) {
        const int fi = free_index_[dofs[i]];
        if (fi < 0) continue;
        for (int j = 0; j < 12; ++j) {
          const int pos = pos_a[i * 12 + j];
          if (pos >= 0)
            values[pos] += local_a[i * 12 + j];
          else
            sys.rhs[fi] -= local_a[i * 12 + j] * lift[dofs[j]];
        }
      }
      const auto& pdofs = space.element_pressure_dofs(t);
      const int* pos_b = &b_positions_[t * 72];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 12; ++j) {
          const double v = local_b[i * 12 + j];
          const int pos = pos_b[2 * (i * 12 + j)];
          if (pos >= 0) {
            values[pos] += v;
            values[pos_b[2 * (i * 12 + j) + 1]] += v;
          } else {
            sys.rhs[nf + pdofs[i]] -= v * lift[dofs[j]];
          }
        }
      }
    }
    for (int pos : pinned_offdiagonal_) values[pos] = 0.0;
    values[pinned_diagonal_] = 1.0;
    if (velocity_rhs.size() > 0) {
      for (Eigen::Index f = 0; f < nf; ++f) sys.rhs[f] += velocity_rhs[(*free_dofs_)[f]];
    }
    sys.rhs[nf + kPinnedPressure] = 0.0;
    return sys;
  }

  void build_pattern() {
    const TaylorHoodSpace& space = *space_;
    const std::size_t nvel = space.velocity_dof_count();
    free_index_.assign(nvel, 0);
    for (int d : space.dirichlet_dofs()) free_index_[d] = -1;
    auto free = std::make_shared<std::vector<int>>();
    for (std::size_t d = 0; d < nvel; ++d) {
      if (free_index_[d] >= 0) {
        free_index_[d] = static_cast<int>(free->size());
        free->push_back(static_cast<int>(d));
      }
    }
    free_dofs_ = free;
    pressure_weights_ = pressure_mean_weights(space);

    const auto nf = static_cast<int>(free_dofs_->size());
    const auto np = static_cast<int>(space.pressure_dof_count());
    const int n = nf + np;
    std::vector<Triplet> triplets;
    const std::size_t nt = space.mesh().triangle_count();
    triplets.reserve(nt * 216 + 2 * static_cast<std::size_t>(np));
    for (std::size_t t = 0; t < nt; ++t) {
      const auto dofs = space.element_velocity_dofs(t);
      const auto& pdofs = space.element_pressure_dofs(t);
      for (int i = 0; i < 12; ++i) {
        const int fi = free_index_[dofs[i]];
        if (fi < 0) continue;
        for (int j = 0; j < 12; ++j) {
          const int fj = free_index_[dofs[j]];
          if (fj >= 0) triplets.emplace_back(fi, fj, 1.0);
        }
        for (int p : pdofs) {
          triplets.emplace_back(nf + p, fi, 1.0);
          triplets.emplace_back(fi, nf + p, 1.0);
        }
      }
    }
    triplets.emplace_back(nf + kPinnedPressure, nf + kPinnedPressure, 1.0);
    pattern_ = SparseMatrix(n, n);
    pattern_.setFromTriplets(triplets.begin(), triplets.end());
    pattern_.makeCompressed();

    a_positions_.assign(nt * 144, -1);
    b_positions_.assign(nt * 72, -1);
    for (std::size_t t = 0; t < nt; ++t) {
      const auto dofs = space.element_velocity_dofs(t);
      const auto& pdofs = space.element_pressure_dofs(t);
      for (int i = 0; i < 12; ++i) {
        const int fi = free_index_[dofs[i]];
        for (int j = 0; j < 12; ++j) {
          const int fj = free_index_[dofs[j]];
          if (fi >= 0 && fj >= 0) a_positions_[t * 144 + i * 12 + j] = position(fi, fj);
        }
      }
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 12; ++j) {
          const int fj = free_index_[dofs[j]];
          if (fj < 0) continue;
          b_positions_[t * 72 + 2 * (i * 12 + j)] = position(nf + pdofs[i], fj);
          b_positions_[t * 72 + 2 * (i * 12 + j) + 1] = position(fj, nf + pdofs[i]);
        }
      }
    }
    const int pinned = nf + kPinnedPressure;
    pinned_diagonal_ = position(pinned, pinned);
    for (int k = pattern_.outerIndexPtr()[pinned]; k < pattern_.outerIndexPtr()[pinned + 1]; ++k) {
      const int row = pattern_.innerIndexPtr()[k];
      if (row == pinned) continue;
      pinned_offdiagonal_.push_back(k);
      pinned_offdiagonal_.push_back(position(pinned, row));
    }
  }

  [[nodiscard]] int position(int row, int col) const {
    const int* begin = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[col];
    const int* end = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) throw std::logic_error("SaddleAssembler: entry missing from pattern");
    return static_cast<int>(it - pattern_.innerIndexPtr());
  }

  std::shared_ptr<const TaylorHoodSpace> space_;
  std::vector<int> free_index_;
  std::shared_ptr<const std::vector<int>> free_dofs_;
  Vector pressure_weights_;
  SparseMatrix pattern_;
  std::vector<int> a_positions_;
  std::vector<int> b_positions_;
  static constexpr int kPinnedPressure = 0;
  int pinned_diagonal_ = -1;
  std::vector<int> pinned_offdiagonal_;
};

/// One-shot convenience wrapper around SaddleAssembler.
inline SaddleSystem assemble_linearized(std::shared_ptr<const TaylorHoodSpace> space, const Vector& u_prev,
                                        const BinghamParameters& params, const DirichletData& dirichlet,
                                        const VelocityField& forcing = {}) {
  return SaddleAssembler(std::move(space)).assemble(u_prev, params, dirichlet, forcing);
}

}  // namespace bingham
