#include "bingham/analysis.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bingham;

namespace {

Vector randn(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> N;
  Vector v(n);
  for (auto& x : v) x = N(rng);
  return v;
}

AndersonLeastSquares least_squares(const Vector& w, const std::vector<Vector>& cols, const InnerProduct& ip,
                                   double c_s = 0.0) {
  std::vector<Vector> wcols;
  for (const auto& c : cols) wcols.push_back(ip.apply(c));
  std::vector<const Vector*> pc, pw;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    pc.push_back(&cols[i]);
    pw.push_back(&wcols[i]);
  }
  return solve_anderson_least_squares(w, ip.apply(w), pc, pw, c_s);
}

}  // namespace

TEST(Anderson, DepthZeroIsPicardBitForBit) {
  const ProblemSpec spec = make_channel_problem(8, 1e-2);
  PicardOperator op(build_fixed_point_problem(spec));
  AcceleratedSolverConfig cfg;
  cfg.depth = 0;
  cfg.max_iter = 25;
  cfg.keep_iterates = true;
  const AcceleratedSolveResult aa = solve_accelerated(op, cfg);
  ASSERT_GE(aa.iterates.size(), 10u);

  PicardOperator plain(build_fixed_point_problem(spec));
  Vector x = plain.initial_state().u;
  for (std::size_t k = 0; k < aa.iterates.size(); ++k) {
    ASSERT_EQ(aa.iterates[k], x) << "iterate " << k;
    x = plain.apply(x).u;
  }
  EXPECT_EQ(aa.state.u, x);
}

TEST(Anderson, FirstStepIsUndamped) {
  AndersonAccelerator aa(3);
  const Vector x = Vector::Constant(4, 1.0), g = Vector::Constant(4, 3.0);
  const auto s = aa.step(x, g, 0.25);
  EXPECT_EQ(s.x_next, g);
}

TEST(Anderson, DepthOneMatchesClosedForm) {
  std::mt19937 rng(42);
  for (double beta : {1.0, 0.6}) {
    AndersonAccelerator aa(1);
    const Vector x0 = randn(6, rng), g0 = randn(6, rng);
    const auto s1 = aa.step(x0, g0, beta);
    const Vector x1 = s1.x_next, g1 = randn(6, rng);
    const auto s2 = aa.step(x1, g1, beta);
    const Vector w1 = g0 - x0, w2 = g1 - x1, f = w2 - w1;
    const double gamma = w2.dot(f) / f.squaredNorm();
    ASSERT_EQ(s2.report.gamma.size(), 1);
    EXPECT_NEAR(s2.report.gamma[0], gamma, 1e-12 * std::max(1.0, std::abs(gamma)));
    const double theta2 = 1.0 - std::pow(w2.dot(f), 2) / (w2.squaredNorm() * f.squaredNorm());
    EXPECT_NEAR(s2.report.theta, std::sqrt(theta2), 1e-12);
    const Vector expected = x1 + beta * w2 - gamma * ((x1 - x0) + beta * f);
    EXPECT_LT((s2.x_next - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Anderson, OrthogonalResidualGivesPicardStep) {
  AndersonAccelerator aa(1);
  const Vector x0 = Vector::Zero(3);
  const Vector x1 = aa.step(x0, Vector::Unit(3, 0), 1.0).x_next;  // w1 = e1
  Vector w2(3);
  w2 << 0.5, 0.5, 0;  // w2 - w1 = (-0.5, 0.5, 0) is orthogonal to w2
  const auto s = aa.step(x1, x1 + w2, 0.7);
  EXPECT_NEAR(s.report.gamma[0], 0.0, 1e-15);
  EXPECT_NEAR(s.report.theta, 1.0, 1e-15);
  EXPECT_LT((s.x_next - (x1 + 0.7 * w2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Anderson, LeastSquaresOptimalityAndGain) {
  std::mt19937 rng(5);
  const TaylorHoodSpace space(build_uniform_unit_square(3));
  const auto n = static_cast<Eigen::Index>(space.velocity_dof_count());
  for (NormKind kind : {NormKind::dof, NormKind::l2, NormKind::h1}) {
    const InnerProduct ip = InnerProduct::for_space(kind, space);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector w = randn(n, rng);
      std::vector<Vector> cols;
      for (int j = 0; j < 1 + trial % 10; ++j) cols.push_back(randn(n, rng));
      const AndersonLeastSquares ls = least_squares(w, cols, ip);
      EXPECT_LE(ls.theta, 1.0 + 1e-12);
      const double scale = ip.norm(w);
      for (int j : ls.retained) EXPECT_LE(std::abs(ip.dot(ls.optimal_residual, cols[j])) / (scale * ip.norm(cols[j])), 1e-10);
      EXPECT_NEAR(ls.theta, ip.norm(ls.optimal_residual) / ip.norm(w), 1e-10);
    }
  }
}

TEST(Anderson, DeeperHistoryNeverRaisesGain) {
  std::mt19937 rng(6);
  const Vector w = randn(40, rng);
  std::vector<Vector> cols;
  for (int j = 0; j < 10; ++j) cols.push_back(randn(40, rng));
  double prev = 1.0;
  for (int m = 0; m <= 10; ++m) {
    const std::vector<Vector> prefix(cols.begin(), cols.begin() + m);
    const double theta = least_squares(w, prefix, InnerProduct{}).theta;
    EXPECT_LE(theta, prev + 1e-12) << "m = " << m;
    prev = theta;
  }
}

TEST(Safeguard, IdenticalColumnsDropSecond) {
  Vector a(3);
  a << 1, 2, 3;
  EXPECT_EQ(safeguard_columns({a, a}, 0.01), std::vector<int>{0});
  EXPECT_EQ(safeguard_columns({a, a}, 0.0), std::vector<int>{0});
}

TEST(Safeguard, OrthogonalColumnsKept) {
  const std::vector<Vector> cols = {Vector::Unit(4, 0), Vector::Unit(4, 2), Vector::Unit(4, 3)};
  EXPECT_EQ(safeguard_columns(cols, 0.99), (std::vector<int>{0, 1, 2}));
}

TEST(Safeguard, SmallSineDropped) {
  const double s = 0.05, c = std::sqrt(1 - s * s);
  Vector a(2), b(2);
  a << 1, 0;
  b << c, s;
  EXPECT_EQ(safeguard_columns({a, b}, 0.1), std::vector<int>{0});
  EXPECT_EQ(safeguard_columns({a, b}, 0.04), (std::vector<int>{0, 1}));
  EXPECT_THROW(safeguard_columns({a, b}, 1.0), std::invalid_argument);
}

TEST(Safeguard, RetainedColumnsMeetThreshold) {
  std::mt19937 rng(8);
  std::vector<Vector> cols;
  const Vector base = randn(5, rng);
  for (int j = 0; j < 8; ++j) cols.push_back(base + 0.2 * randn(5, rng));
  const double cs = 0.3;
  const auto kept = safeguard_columns(cols, cs);
  for (std::size_t i = 1; i < kept.size(); ++i) {
    Eigen::MatrixXd span(5, static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < i; ++j) span.col(static_cast<Eigen::Index>(j)) = cols[kept[j]];
    const Vector f = cols[kept[i]];
    const Vector proj = span * span.colPivHouseholderQr().solve(f);
    EXPECT_GE((f - proj).norm() / f.norm(), cs - 1e-12);
  }
}

TEST(Anderson, HistoryWindowAndOrdering) {
  AndersonAccelerator aa(2);
  std::mt19937 rng(9);
  Vector x = randn(4, rng);
  std::vector<Vector> xs{x}, ws;
  for (int k = 1; k <= 5; ++k) {
    const Vector g = 0.5 * x + randn(4, rng);
    ws.push_back(g - x);
    x = aa.step(x, g, 1.0).x_next;
    xs.push_back(x);
    EXPECT_EQ(aa.history_size(), static_cast<std::size_t>(std::min(k - 1, 2)));
  }
  // Newest first: F_0 = w_5 - w_4, E_0 = x_4 - x_3.
  EXPECT_LT((aa.residual_differences()[0] - (ws[4] - ws[3])).norm(), 1e-14);
  EXPECT_LT((aa.iterate_differences()[0] - (xs[4] - xs[3])).norm(), 1e-14);
}

TEST(Anderson, SolvesLinearProblemLikeGmres) {
  // g(x) = M x + b with dim 6: AA with m >= 6 terminates in at most 8 steps.
  std::mt19937 rng(10);
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(6, 6) * 0.2;
  const Vector b = randn(6, rng);
  AndersonAccelerator aa(6);
  Vector x = Vector::Zero(6);
  const Vector exact = (Eigen::MatrixXd::Identity(6, 6) - m).lu().solve(b);
  for (int k = 0; k < 8; ++k) x = aa.step(x, m * x + b, 1.0).x_next;
  EXPECT_LT((x - exact).norm(), 1e-10);
}

TEST(Anderson, TraceInvariantsOnChannel) {
  const ProblemSpec spec = make_channel_problem(8, 1e-2);
  for (int depth : {1, 5}) {
    for (NormKind norm : {NormKind::dof, NormKind::l2, NormKind::h1}) {
      PicardOperator op(build_fixed_point_problem(spec));
      AcceleratedSolverConfig cfg;
      cfg.depth = depth;
      cfg.optimization_norm = norm;
      cfg.keep_iterates = true;
      const AcceleratedSolveResult r = solve_accelerated(op, cfg);
      EXPECT_TRUE(r.converged);
      ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations));
      const InnerProduct stop = InnerProduct::for_space(cfg.stopping_norm, op.space());
      PicardOperator check(build_fixed_point_problem(spec));
      for (std::size_t k = 0; k < r.trace.size(); ++k) {
        EXPECT_LE(r.trace[k].theta, 1.0 + 1e-12);
        EXPECT_EQ(r.trace[k].k, static_cast<int>(k) + 1);
        if (k % 5 == 0) {
          const auto res = check.residual(r.iterates[k], stop);
          EXPECT_NEAR(res.norm, r.trace[k].residual_norm, 1e-12 * std::max(1.0, res.norm));
        }
      }
      EXPECT_LE(r.final_relative_residual, cfg.tol);
    }
  }
}

TEST(Anderson, StokesConvergesInTwoIterations) {
  for (int depth : {0, 1, 5, 10}) {
    PicardOperator op(build_fixed_point_problem(make_cavity_problem(6, 1e-2, 0.0)));
    AcceleratedSolverConfig cfg;
    cfg.depth = depth;
    const auto r = solve_accelerated(op, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 2);
  }
}

TEST(Anderson, NonConvergenceIsAnOutcome) {
  PicardOperator op(build_fixed_point_problem(make_channel_problem(4, 1e-4)));
  AcceleratedSolverConfig cfg;
  cfg.max_iter = 3;
  const auto r = solve_accelerated(op, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_EQ(r.trace.size(), 3u);
}

TEST(Anderson, SafeguardAndDampingRun) {
  PicardOperator op(build_fixed_point_problem(make_channel_problem(8, 1e-3)));
  AcceleratedSolverConfig cfg;
  cfg.depth = 5;
  cfg.c_s = 0.1;
  cfg.beta_schedule = [](int k) { return k < 5 ? 0.5 : 1.0; };
  const auto r = solve_accelerated(op, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_DOUBLE_EQ(r.trace[2].beta, 0.5);
  EXPECT_DOUBLE_EQ(r.trace[6].beta, 1.0);
}

TEST(Anderson, ConfigValidation) {
  AcceleratedSolverConfig cfg;
  cfg.depth = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.beta = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iter = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(AndersonAccelerator(1).step(Vector::Zero(2), Vector::Zero(2), 1.5), std::invalid_argument);
}
