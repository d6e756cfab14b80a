#pragma once

#include "bingham/fixed_point.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bingham {

/// Columns whose direction sine falls below this are treated as linearly
/// dependent even when the safeguard is off.
inline constexpr double kRankDropTolerance = 1e-12;

/// Solution of min_gamma ||w - F gamma|| in a weighted inner product.
struct AndersonLeastSquares {
  std::vector<int> retained;  // indices into the input columns, input order
  Vector gamma;               // one coefficient per retained column
  Vector optimal_residual;    // w - F_retained gamma
  double theta = 1.0;         // ||w - F gamma|| / ||w||
  int dropped = 0;
};

namespace detail {

/// Weighted Gram-Schmidt with one reorthogonalization pass. Columns are
/// visited in input order (newest first); a column is kept when its sine
/// against the span of the previously kept columns is at least `threshold`.
struct WeightedQR {
  std::vector<Vector> q;   // W-orthonormal basis
  std::vector<Vector> wq;  // W * q
  std::vector<int> retained;
  Eigen::MatrixXd r;       // upper triangular, retained x retained

  WeightedQR(const std::vector<const Vector*>& columns, const std::vector<const Vector*>& weighted_columns,
             double threshold) {
    const auto n = columns.size();
    r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      Vector v = *columns[i];
      Vector wv = *weighted_columns[i];
      const double fnorm = std::sqrt(std::max(0.0, v.dot(wv)));
      if (!(fnorm > 0.0)) continue;
      const auto kept = static_cast<Eigen::Index>(q.size());
      Vector coeff = Vector::Zero(kept);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < kept; ++j) {
          const double c = wq[j].dot(v);
          coeff[j] += c;
          v -= c * q[j];
          wv -= c * wq[j];
        }
      }
      const double rnorm = std::sqrt(std::max(0.0, v.dot(wv)));
      if (rnorm / fnorm < threshold) continue;
      r.col(kept).head(kept) = coeff;
      r(kept, kept) = rnorm;
      q.push_back(v / rnorm);
      wq.push_back(wv / rnorm);
      retained.push_back(static_cast<int>(i));
    }
    const auto k = static_cast<Eigen::Index>(q.size());
    r.conservativeResize(k, k);
  }
};

}  // namespace detail

/// Indices of the columns kept by the direction-sine safeguard: column i is
/// retained iff |sin(f_i, span of retained preceding columns)| >= c_s.
inline std::vector<int> safeguard_columns(const std::vector<Vector>& columns, double c_s,
                                          const InnerProduct& ip = {}) {
  if (!(c_s >= 0.0 && c_s < 1.0)) throw std::invalid_argument("safeguard_columns: c_s must lie in [0, 1)");
  std::vector<Vector> weighted;
  weighted.reserve(columns.size());
  for (const auto& c : columns) weighted.push_back(ip.apply(c));
  std::vector<const Vector*> cols, wcols;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    cols.push_back(&columns[i]);
    wcols.push_back(&weighted[i]);
  }
  return detail::WeightedQR(cols, wcols, std::max(c_s, kRankDropTolerance)).retained;
}

/// Solves the Anderson coefficient problem for residual `w` against the
/// residual-difference columns (`weighted_columns[i]` = W * columns[i]).
inline AndersonLeastSquares solve_anderson_least_squares(const Vector& w, const Vector& weighted_w,
                                                         const std::vector<const Vector*>& columns,
                                                         const std::vector<const Vector*>& weighted_columns,
                                                         double c_s) {
  AndersonLeastSquares out;
  const detail::WeightedQR qr(columns, weighted_columns, std::max(c_s, kRankDropTolerance));
  out.retained = qr.retained;
  out.dropped = static_cast<int>(columns.size() - qr.retained.size());
  const auto k = static_cast<Eigen::Index>(qr.q.size());
  Vector rhs(k);
  for (Eigen::Index j = 0; j < k; ++j) rhs[j] = qr.wq[j].dot(w);
  out.gamma = k > 0 ? Vector(qr.r.triangularView<Eigen::Upper>().solve(rhs)) : Vector();
  out.optimal_residual = w;
  for (Eigen::Index j = 0; j < k; ++j) out.optimal_residual -= out.gamma[j] * *columns[qr.retained[j]];
  const double wnorm = std::sqrt(std::max(0.0, w.dot(weighted_w)));
  if (wnorm > 0.0) {
    double rnorm2 = out.optimal_residual.dot(weighted_w);
    for (Eigen::Index j = 0; j < k; ++j) rnorm2 -= out.gamma[j] * out.optimal_residual.dot(*weighted_columns[qr.retained[j]]);
    out.theta = std::min(1.0, std::sqrt(std::max(0.0, rnorm2)) / wnorm);
  }
  return out;
}

/// Diagnostics of one accelerated iteration.
struct AAStepReport {
  int k = 0;
  double residual_norm = 0.0;  // ||w_k|| in the stopping norm
  double relative_residual = 0.0;
  double theta = 1.0;
  Vector gamma;
  double beta = 1.0;
  int columns_used = 0;
  int columns_dropped = 0;
  double wall_time_ms = 0.0;
};

/// Windowed Anderson acceleration with depth m and damping beta_k.
///
/// History columns are stored newest first:
///   E_k = (e_{k-1}, ..., e_{k-m_k}),  e_j = x_j - x_{j-1}
///   F_k = (w_k - w_{k-1}, ..., w_{k-m_k+1} - w_{k-m_k})
/// and the update is x_k = x_{k-1} + beta w_k - (E_k + beta F_k) gamma.
class AndersonAccelerator {
 public:
  struct Step {
    Vector x_next;
    AAStepReport report;
  };

  explicit AndersonAccelerator(int depth, InnerProduct ip = {}, double c_s = 0.0)
      : depth_(depth), ip_(std::move(ip)), c_s_(c_s) {
    if (depth_ < 0) throw std::invalid_argument("AndersonAccelerator: depth must be >= 0");
    if (!(c_s_ >= 0.0 && c_s_ < 1.0)) throw std::invalid_argument("AndersonAccelerator: c_s must lie in [0, 1)");
  }

  [[nodiscard]] int depth() const { return depth_; }
  [[nodiscard]] int iteration() const { return k_; }
  [[nodiscard]] std::size_t history_size() const { return f_.size(); }
  [[nodiscard]] const std::deque<Vector>& iterate_differences() const { return e_; }
  [[nodiscard]] const std::deque<Vector>& residual_differences() const { return f_; }

  void reset() {
    k_ = 0;
    e_.clear();
    f_.clear();
    wf_.clear();
  }

  /// Advances from x_{k-1} given g(x_{k-1}). The first call returns
  /// x_1 = x_0 + w_1 regardless of beta.
  Step step(const Vector& x_prev, const Vector& g_of_x_prev, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("AndersonAccelerator: beta must lie in (0, 1]");
    ++k_;
    Vector w = g_of_x_prev - x_prev;
    Vector ww = weighted(w);
    Step out;
    out.report.k = k_;
    out.report.beta = beta;
    if (k_ == 1) {
      out.x_next = g_of_x_prev;
      out.report.beta = 1.0;
    } else {
      if (depth_ > 0) {
        e_.push_front(x_prev - last_x_);
        f_.push_front(w - last_w_);
        wf_.push_front(ww - last_ww_);
        while (static_cast<int>(f_.size()) > depth_) {
          e_.pop_back();
          f_.pop_back();
          wf_.pop_back();
        }
      }
      std::vector<const Vector*> cols, wcols;
      for (std::size_t i = 0; i < f_.size(); ++i) {
        cols.push_back(&f_[i]);
        wcols.push_back(&wf_[i]);
      }
      const AndersonLeastSquares ls = solve_anderson_least_squares(w, ww, cols, wcols, c_s_);
      out.report.theta = ls.theta;
      out.report.gamma = ls.gamma;
      out.report.columns_used = static_cast<int>(ls.retained.size());
      out.report.columns_dropped = ls.dropped;
      // (1 - beta) x + beta g equals x + beta w, and is exactly g when beta = 1.
      out.x_next = (1.0 - beta) * x_prev + beta * g_of_x_prev;
      for (std::size_t j = 0; j < ls.retained.size(); ++j) {
        const auto i = static_cast<std::size_t>(ls.retained[j]);
        out.x_next -= ls.gamma[static_cast<Eigen::Index>(j)] * (e_[i] + beta * f_[i]);
      }
      if (ls.dropped > 0) keep_only(ls.retained);
    }
    last_x_ = x_prev;
    last_w_ = std::move(w);
    last_ww_ = std::move(ww);
    return out;
  }

 private:
  [[nodiscard]] Vector weighted(const Vector& v) const { return ip_.apply(v); }

  void keep_only(const std::vector<int>& retained) {
    std::deque<Vector> e, f, wf;
    for (int i : retained) {
      e.push_back(std::move(e_[i]));
      f.push_back(std::move(f_[i]));
      wf.push_back(std::move(wf_[i]));
    }
    e_ = std::move(e);
    f_ = std::move(f);
    wf_ = std::move(wf);
  }

  int depth_;
  InnerProduct ip_;
  double c_s_;
  int k_ = 0;
  std::deque<Vector> e_, f_, wf_;
  Vector last_x_, last_w_, last_ww_;
};

/// Settings of the accelerated Picard driver.
struct AcceleratedSolverConfig {
  int depth = 0;                                    // m
  double beta = 1.0;                                // constant damping
  std::function<double(int k)> beta_schedule;       // overrides `beta` when set
  NormKind optimization_norm = NormKind::dof;       // norm of the coefficient problem
  NormKind stopping_norm = NormKind::l2;            // norm of ||w_k|| / ||w_1||
  double tol = 1e-8;
  int max_iter = 500;
  double c_s = 0.0;                                 // direction-sine threshold, 0 = off
  bool record_timing = false;
  bool keep_iterates = false;

  void validate() const {
    if (depth < 0) throw std::invalid_argument("m must be >= 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(c_s >= 0.0 && c_s < 1.0)) throw std::invalid_argument("cs must lie in [0, 1)");
  }
};

struct AcceleratedSolveResult {
  State state;  // G(x) at the accepted iterate x
  std::vector<AAStepReport> trace;
  bool converged = false;
  int iterations = 0;
  double final_relative_residual = 0.0;
  std::vector<Vector> iterates;  // x_0, x_1, ... when keep_iterates is set
};

/// Anderson-accelerated Picard iteration for u = G(u).
///
/// Iteration k evaluates w_k = G(x_{k-1}) - x_{k-1} and stops once
/// ||w_k|| <= tol ||w_1||; the count reported is that k. On convergence the
/// returned state is G(x_{k-1}), which is discretely divergence free.
inline AcceleratedSolveResult solve_accelerated(PicardOperator& op, const AcceleratedSolverConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const TaylorHoodSpace& space = op.space();
  const InnerProduct stop_ip = InnerProduct::for_space(config.stopping_norm, space);
  const InnerProduct opt_ip = config.optimization_norm == config.stopping_norm
                                  ? stop_ip
                                  : InnerProduct::for_space(config.optimization_norm, space);
  AndersonAccelerator aa(config.depth, opt_ip, config.c_s);
  const auto& dirichlet = op.problem().dirichlet;

  AcceleratedSolveResult result;
  Vector x = op.initial_state().u;
  double w1 = 0.0;
  for (int k = 1; k <= config.max_iter; ++k) {
    const auto start = Clock::now();
    PicardOperator::Residual r = op.residual(x, stop_ip);
    if (config.keep_iterates) result.iterates.push_back(x);
    if (k == 1) w1 = r.norm;
    const double rel = w1 > 0.0 ? r.norm / w1 : 0.0;
    const double beta = config.beta_schedule ? config.beta_schedule(k) : config.beta;
    AndersonAccelerator::Step step = aa.step(x, r.image.u, beta);
    for (std::size_t i = 0; i < dirichlet.dofs.size(); ++i) step.x_next[dirichlet.dofs[i]] = dirichlet.values[i];
    step.report.residual_norm = r.norm;
    step.report.relative_residual = rel;
    if (config.record_timing)
      step.report.wall_time_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    result.trace.push_back(std::move(step.report));
    result.iterations = k;
    result.final_relative_residual = rel;
    result.state = std::move(r.image);
    if (rel <= config.tol) {
      result.converged = true;
      break;
    }
    x = std::move(step.x_next);
  }
  return result;
}

}  // namespace bingham
