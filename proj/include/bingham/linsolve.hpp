#pragma once

#include "bingham/assembly.hpp"

#include <Eigen/UmfPackSupport>

#include <stdexcept>
#include <string>

namespace bingham {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SaddleSolution {
  State state;
  double linear_residual = 0.0;  // ||K x - b|| / ||b|| (absolute when b = 0)
  bool pressure_constraint_active = false;
};

/// Direct LU solver for SaddleSystem. The symbolic analysis is computed on
/// the first solve and reused while the sparsity pattern stays the same.
class SaddleSolver {
 public:
  SaddleSolver() {
    // Nested dissection on the symmetrized pattern roughly halves the
    // factorization time of the default AMD ordering on these systems.
    lu_.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
    lu_.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
  }
  SaddleSolver(const SaddleSolver&) = delete;
  SaddleSolver& operator=(const SaddleSolver&) = delete;

  [[nodiscard]] SaddleSolution solve(const SaddleSystem& system) {
    const SparseMatrix& k = system.matrix;
    if (!analyzed_ || k.rows() != size_ || k.nonZeros() != nnz_) {
      lu_.analyzePattern(k);
      if (lu_.info() != Eigen::Success) throw SingularSystemError("saddle solve: symbolic analysis failed");
      analyzed_ = true;
      size_ = k.rows();
      nnz_ = k.nonZeros();
    }
    lu_.factorize(k);
    if (lu_.info() != Eigen::Success)
      throw SingularSystemError("saddle solve: factorization failed (singular system; check LBB pair or assembly)");
    const Vector x = lu_.solve(system.rhs);
    if (lu_.info() != Eigen::Success || !x.allFinite())
      throw SingularSystemError("saddle solve: back substitution produced non-finite values");
    return unpack(system, x);
  }

  /// Scatters a raw solution vector of `system` back to a State, projecting
  /// the pressure to zero mean.
  [[nodiscard]] static SaddleSolution unpack(const SaddleSystem& system, const Vector& x) {
    SaddleSolution sol;
    const auto nf = static_cast<Eigen::Index>(system.free_velocity_count);
    const auto np = static_cast<Eigen::Index>(system.pressure_count);
    sol.state.u = system.lift;
    const auto& free = *system.free_dofs;
    for (Eigen::Index f = 0; f < nf; ++f) sol.state.u[free[f]] += x[f];
    sol.state.p = x.segment(nf, np);
    const double area = system.pressure_weights.sum();
    sol.state.p.array() -= system.pressure_weights.dot(sol.state.p) / area;
    const double bnorm = system.rhs.norm();
    const double rnorm = (system.matrix * x - system.rhs).norm();
    sol.linear_residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
    sol.pressure_constraint_active = system.pressure_constraint;
    return sol;
  }

 private:
  Eigen::UmfPackLU<SparseMatrix> lu_;
  bool analyzed_ = false;
  Eigen::Index size_ = 0;
  Eigen::Index nnz_ = 0;
};

inline SaddleSolution solve_saddle(const SaddleSystem& system) {
  SaddleSolver solver;
  return solver.solve(system);
}

/// (div u_h, q_i) for every pressure basis function q_i.
inline Vector divergence_residuals(const TaylorHoodSpace& space, const Vector& u) {
  return divergence_matrix(space) * u;
}

}  // namespace bingham
