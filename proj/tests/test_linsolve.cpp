#include "bingham/analysis.hpp"

#include <gtest/gtest.h>

using namespace bingham;

namespace {

FixedPointProblem problem_for(const ProblemSpec& spec) { return build_fixed_point_problem(spec); }

SaddleSolution solve_once(const FixedPointProblem& fp, const Vector& u_prev) {
  return solve_saddle(assemble_linearized(fp.space, u_prev, fp.params, fp.dirichlet, fp.forcing));
}

}  // namespace

TEST(SolveSaddle, StokesChannelIsExactParabola) {
  const ProblemSpec spec = make_channel_problem(4, 1e-2, 0.0);
  const FixedPointProblem fp = problem_for(spec);
  const SaddleSolution sol = solve_once(fp, fp.dirichlet.lift(fp.space->velocity_dof_count()));
  EXPECT_LT(h1_seminorm_error(*fp.space, sol.state.u, *spec.exact), 1e-10);
  EXPECT_LT(l2_velocity_error(*fp.space, sol.state.u, *spec.exact), 1e-10);
  // u1 = y(1 - y)/2 with p = -x + const.
  const auto hit = fp.space->locate({0.37, 0.61});
  ASSERT_TRUE(hit);
  EXPECT_NEAR(fp.space->evaluate_velocity(sol.state.u, hit->first, hit->second)[0], 0.5 * 0.61 * 0.39, 1e-12);
  const double p1 = fp.space->evaluate_pressure(sol.state.p, hit->first, hit->second);
  const auto hit2 = fp.space->locate({0.87, 0.61});
  const double p2 = fp.space->evaluate_pressure(sol.state.p, hit2->first, hit2->second);
  EXPECT_NEAR(p2 - p1, -0.5, 1e-10);
  EXPECT_LT(sol.linear_residual, 1e-12);
}

TEST(SolveSaddle, PressureHasZeroMean) {
  const ProblemSpec spec = make_cavity_problem(6, 1e-2, 1.0);
  const FixedPointProblem fp = problem_for(spec);
  const SaddleSolution sol = solve_once(fp, fp.dirichlet.lift(fp.space->velocity_dof_count()));
  EXPECT_TRUE(sol.pressure_constraint_active);
  EXPECT_LT(std::abs(pressure_mean_weights(*fp.space).dot(sol.state.p)), 1e-12);
  EXPECT_LT(sol.linear_residual, 1e-12);
}

TEST(SolveSaddle, DiscretelyDivergenceFree) {
  for (double tau : {0.0, 2.0}) {
    const ProblemSpec spec = make_cavity_problem(8, 1e-3, tau);
    const FixedPointProblem fp = problem_for(spec);
    const SaddleSolution sol = solve_once(fp, fp.dirichlet.lift(fp.space->velocity_dof_count()));
    EXPECT_LE(divergence_residuals(*fp.space, sol.state.u).cwiseAbs().maxCoeff(), 1e-10) << tau;
  }
}

TEST(SolveSaddle, DirichletValuesKept) {
  const ProblemSpec spec = make_cavity_problem(4, 1e-2, 0.0);
  const FixedPointProblem fp = problem_for(spec);
  const SaddleSolution sol = solve_once(fp, fp.dirichlet.lift(fp.space->velocity_dof_count()));
  for (std::size_t i = 0; i < fp.dirichlet.dofs.size(); ++i)
    EXPECT_EQ(sol.state.u[fp.dirichlet.dofs[i]], fp.dirichlet.values[i]);
}

TEST(SolveSaddle, StokesCavityIsBitReproducible) {
  const ProblemSpec spec = make_cavity_problem(8, 1e-2, 0.0);
  const FixedPointProblem fp = problem_for(spec);
  const Vector lift = fp.dirichlet.lift(fp.space->velocity_dof_count());
  const SaddleSolution a = solve_once(fp, lift);
  const SaddleSolution b = solve_once(fp, lift);
  EXPECT_EQ(a.state.u, b.state.u);
  EXPECT_EQ(a.state.p, b.state.p);
  // Reusing one solver (cached analysis) gives the same bits too.
  SaddleSolver solver;
  const SaddleSystem sys = assemble_linearized(fp.space, lift, fp.params, fp.dirichlet);
  const SaddleSolution c = solver.solve(sys);
  const SaddleSolution d = solver.solve(sys);
  EXPECT_EQ(c.state.u, a.state.u);
  EXPECT_EQ(d.state.u, a.state.u);
}

TEST(SolveSaddle, HomogeneousProblemHasZeroSolution) {
  auto space = std::make_shared<const TaylorHoodSpace>(build_uniform_unit_square(4));
  const DirichletData zero = space->dirichlet_data([](double, double) { return Eigen::Vector2d(0, 0); });
  const Vector u0 = Vector::Zero(static_cast<Eigen::Index>(space->velocity_dof_count()));
  const SaddleSolution sol = solve_saddle(assemble_linearized(space, u0, {1.0, 0.5, 1e-2}, zero));
  EXPECT_EQ(sol.state.u.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sol.state.p.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SolveSaddle, MatchesGenericDenseSolve) {
  const ProblemSpec spec = make_cavity_problem(3, 1e-2, 1.5);
  const FixedPointProblem fp = problem_for(spec);
  const SaddleSystem sys =
      assemble_linearized(fp.space, fp.dirichlet.lift(fp.space->velocity_dof_count()), fp.params, fp.dirichlet);
  const SaddleSolution sparse = solve_saddle(sys);
  const Vector x = Eigen::MatrixXd(sys.matrix).fullPivLu().solve(sys.rhs);
  const SaddleSolution dense = SaddleSolver::unpack(sys, x);
  EXPECT_LT((sparse.state.u - dense.state.u).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((sparse.state.p - dense.state.p).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveSaddle, SingularSystemReported) {
  const ProblemSpec spec = make_cavity_problem(2, 1e-2, 0.0);
  const FixedPointProblem fp = problem_for(spec);
  SaddleSystem sys =
      assemble_linearized(fp.space, fp.dirichlet.lift(fp.space->velocity_dof_count()), fp.params, fp.dirichlet);
  sys.matrix = SparseMatrix(sys.matrix.rows(), sys.matrix.cols());
  EXPECT_THROW((void)solve_saddle(sys), SingularSystemError);
}
