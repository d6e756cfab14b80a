#include "bingham/problems.hpp"

#include <gtest/gtest.h>

using namespace bingham;

TEST(ChannelExact, Values) {
  EXPECT_NEAR(channel_exact(0.5, 0.3).u1, 0.02, 1e-15);
  EXPECT_EQ(channel_exact(0.0, 0.3).u1, 0.0);
  EXPECT_NEAR(channel_exact(0.1, 0.3).u1, 0.015, 1e-15);
  EXPECT_NEAR(channel_exact(1.0, 0.3).u1, 0.0, 1e-15);
  EXPECT_NEAR(channel_exact(0.3, 0.0).u1, 0.5 * 0.3 * 0.7, 1e-15);
}

TEST(ChannelExact, Rejects) {
  EXPECT_THROW(channel_exact(0.5, 0.5), std::invalid_argument);
  EXPECT_THROW(channel_exact(0.5, -0.1), std::invalid_argument);
  EXPECT_THROW(channel_exact(1.2, 0.3), std::invalid_argument);
}

TEST(ChannelExact, SymmetricAndSmoothAcrossPlugEdges) {
  const double tau = 0.3;
  for (double y = 0.0; y <= 0.5; y += 0.01)
    EXPECT_NEAR(channel_exact(y, tau).u1, channel_exact(1.0 - y, tau).u1, 1e-15);
  for (double edge : {0.5 - tau, 0.5 + tau}) {
    const double h = 1e-7;
    EXPECT_NEAR(channel_exact(edge - h, tau).u1, channel_exact(edge + h, tau).u1, 1e-12);
    EXPECT_NEAR(channel_exact(edge - h, tau).du1_dy, 0.0, 1e-6);
    EXPECT_NEAR(channel_exact(edge + h, tau).du1_dy, 0.0, 1e-6);
  }
  // Derivative agrees with a central difference away from the plug edges.
  for (double y : {0.05, 0.13, 0.91}) {
    const double h = 1e-6;
    EXPECT_NEAR(channel_exact(y, tau).du1_dy, (channel_exact(y + h, tau).u1 - channel_exact(y - h, tau).u1) / (2 * h),
                1e-8);
  }
}

TEST(ChannelProblem, BoundaryData) {
  const ProblemSpec spec = make_channel_problem(8, 1e-2);
  EXPECT_EQ(spec.params.tau_s, 0.3);
  EXPECT_EQ(spec.params.mu, 1.0);
  EXPECT_FALSE(spec.forcing);
  ASSERT_TRUE(spec.exact);
  EXPECT_EQ(spec.dirichlet(0.3, 0.0), Eigen::Vector2d(0, 0));
  EXPECT_EQ(spec.dirichlet(0.7, 1.0), Eigen::Vector2d(0, 0));
  EXPECT_NEAR(spec.dirichlet(0.0, 0.5)[0], 0.02, 1e-15);
  EXPECT_THROW(make_channel_problem(1, 1e-2), std::invalid_argument);
  EXPECT_THROW(make_channel_problem(4, 0.0), std::invalid_argument);
}

TEST(ChannelProblem, ExactSolutionMatchesBoundaryDofs) {
  const ProblemSpec spec = make_channel_problem(8, 1e-2);
  const TaylorHoodSpace space(build_uniform_unit_square(spec.n));
  const DirichletData data = space.dirichlet_data(spec.dirichlet);
  const Vector exact = space.interpolate(spec.exact->velocity);
  for (std::size_t i = 0; i < data.dofs.size(); ++i) EXPECT_NEAR(exact[data.dofs[i]], data.values[i], 1e-14);
}

TEST(CavityProblem, BoundaryData) {
  const ProblemSpec spec = make_cavity_problem(8, 1e-4, 2.0);
  EXPECT_FALSE(spec.exact);
  EXPECT_EQ(spec.dirichlet(0.5, 1.0), Eigen::Vector2d(1, 0));
  EXPECT_EQ(spec.dirichlet(0.5, 0.0), Eigen::Vector2d(0, 0));
  EXPECT_EQ(spec.dirichlet(0.0, 0.5), Eigen::Vector2d(0, 0));
  EXPECT_EQ(spec.dirichlet(0.0, 1.0), Eigen::Vector2d(1, 0));
  EXPECT_EQ(spec.dirichlet(1.0, 1.0), Eigen::Vector2d(1, 0));
  const ProblemSpec tight = make_cavity_problem(8, 1e-4, 2.0, 1.0, CornerPolicy::watertight);
  EXPECT_EQ(tight.dirichlet(0.0, 1.0), Eigen::Vector2d(0, 0));
  EXPECT_EQ(tight.dirichlet(0.5, 1.0), Eigen::Vector2d(1, 0));
  EXPECT_THROW(make_cavity_problem(1, 1e-2, 1.0), std::invalid_argument);
}

TEST(CavityProblem, LidDofsOnMesh) {
  const ProblemSpec spec = make_cavity_problem(4, 1e-2, 1.0);
  const TaylorHoodSpace space(build_uniform_unit_square(spec.n));
  const DirichletData data = space.dirichlet_data(spec.dirichlet);
  const Vector g = data.lift(space.velocity_dof_count());
  for (std::size_t node = 0; node < space.node_count(); ++node) {
    if (!space.is_boundary_node(node)) continue;
    const Point p = space.node_point(node);
    EXPECT_EQ(g[space.velocity_dof(0, static_cast<int>(node))], p.y == 1.0 ? 1.0 : 0.0);
    EXPECT_EQ(g[space.velocity_dof(1, static_cast<int>(node))], 0.0);
  }
}
