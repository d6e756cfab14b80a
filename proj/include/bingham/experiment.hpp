#pragma once

#include "bingham/analysis.hpp"
#include "bingham/config.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace bingham {

/// Floats in output tables: scientific, 6 significant digits.
inline std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline ProblemSpec make_problem(const SolverConfig& cfg) {
  if (cfg.problem == "channel") return make_channel_problem(cfg.n, cfg.epsilon, cfg.tau_s, cfg.mu, cfg.strain_measure);
  if (cfg.problem == "cavity")
    return make_cavity_problem(cfg.n, cfg.epsilon, cfg.tau_s, cfg.mu, cfg.corner_policy, cfg.strain_measure);
  throw ConfigError("problem", "expected channel or cavity, got '" + cfg.problem + "'");
}

inline AcceleratedSolverConfig solver_settings(const SolverConfig& cfg) {
  AcceleratedSolverConfig s;
  s.depth = cfg.m;
  s.beta = cfg.beta;
  s.optimization_norm = cfg.norm;
  s.stopping_norm = cfg.stop_norm;
  s.tol = cfg.tol;
  s.max_iter = cfg.max_iter;
  s.c_s = cfg.cs;
  s.record_timing = cfg.timing;
  return s;
}

struct RunOutcome {
  std::shared_ptr<const TaylorHoodSpace> space;
  AcceleratedSolveResult solve;
  std::optional<double> h1_error;
  RigidRegionMap rigid;
  double max_divergence = 0.0;  // max_q |(div u_h, q)|
};

/// Builds the problem described by `cfg`, solves it and post-processes.
inline RunOutcome solve_case(const SolverConfig& cfg) {
  validate(cfg);
  const ProblemSpec spec = make_problem(cfg);
  PicardOperator op(build_fixed_point_problem(spec, cfg.quad_degree));
  RunOutcome out;
  out.space = op.problem().space;
  out.solve = solve_accelerated(op, solver_settings(cfg));
  const Vector& u = out.solve.state.u;
  if (spec.exact) out.h1_error = h1_seminorm_error(*out.space, u, *spec.exact);
  out.rigid = rigid_region(*out.space, u, cfg.rigid_threshold);
  out.max_divergence = divergence_residuals(*out.space, u).cwiseAbs().maxCoeff();
  return out;
}

inline void write_trace_csv(std::ostream& os, const std::vector<AAStepReport>& trace) {
  os << "# bingham_aa iteration trace, written " << utc_timestamp() << "\n";
  os << "k,residual_norm,theta,beta,columns_dropped,wall_time_ms\n";
  for (const auto& r : trace)
    os << r.k << ',' << format_float(r.residual_norm) << ',' << format_float(r.theta) << ','
       << format_float(r.beta) << ',' << r.columns_dropped << ',' << format_float(r.wall_time_ms) << '\n';
}

/// Legacy ASCII VTK of the P2 field on quadratic triangles. Pressure is the
/// P1 field at every P2 node; |Du| (Frobenius) is averaged over the elements
/// sharing a node. Elements additionally carry their rigid flag.
inline void write_vtk(std::ostream& os, const TaylorHoodSpace& space, const State& state, const RigidRegionMap& rigid,
                      const std::string& title) {
  const Mesh& mesh = space.mesh();
  const std::size_t nodes = space.node_count();
  const std::size_t cells = mesh.triangle_count();
  std::vector<double> pressure(nodes, 0.0), strain(nodes, 0.0);
  std::vector<int> touches(nodes, 0);
  static constexpr std::array<std::array<double, 3>, 6> node_bary = {{
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}}};
  for (std::size_t t = 0; t < cells; ++t) {
    const auto& en = space.element_nodes(t);
    for (int i = 0; i < 6; ++i) {
      const auto node = static_cast<std::size_t>(en[i]);
      if (touches[node] == 0) pressure[node] = space.evaluate_pressure(state.p, t, node_bary[i]);
      strain[node] += space.symmetric_gradient(state.u, t, node_bary[i]).frobenius();
      ++touches[node];
    }
  }
  for (std::size_t i = 0; i < nodes; ++i) strain[i] /= touches[i];

  const auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return std::string(buf);
  };
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nodes << " double\n";
  for (std::size_t i = 0; i < nodes; ++i) {
    const Point p = space.node_point(i);
    os << fmt(p.x) << ' ' << fmt(p.y) << " 0\n";
  }
  os << "CELLS " << cells << ' ' << cells * 7 << '\n';
  for (std::size_t t = 0; t < cells; ++t) {
    os << 6;
    for (int node : space.element_nodes(t)) os << ' ' << node;
    os << '\n';
  }
  os << "CELL_TYPES " << cells << '\n';
  for (std::size_t t = 0; t < cells; ++t) os << "22\n";  // VTK_QUADRATIC_TRIANGLE
  os << "POINT_DATA " << nodes << "\nVECTORS velocity double\n";
  for (std::size_t i = 0; i < nodes; ++i)
    os << fmt(state.u[space.velocity_dof(0, static_cast<int>(i))]) << ' '
       << fmt(state.u[space.velocity_dof(1, static_cast<int>(i))]) << " 0\n";
  os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (double v : pressure) os << fmt(v) << '\n';
  os << "SCALARS strain_rate double 1\nLOOKUP_TABLE default\n";
  for (double v : strain) os << fmt(v) << '\n';
  os << "CELL_DATA " << cells << "\nSCALARS rigid int 1\nLOOKUP_TABLE default\n";
  for (bool r : rigid.rigid) os << (r ? 1 : 0) << '\n';
}

inline std::string summary_line(const SolverConfig& cfg, const RunOutcome& r) {
  std::string s = "problem=" + cfg.problem + " n=" + std::to_string(cfg.n) + " epsilon=" + format_float(cfg.epsilon) +
                  " tau_s=" + format_float(cfg.tau_s) + " m=" + std::to_string(cfg.m) +
                  " converged=" + (r.solve.converged ? "true" : "false") +
                  " iterations=" + std::to_string(r.solve.iterations) +
                  " final_residual=" + format_float(r.solve.final_relative_residual);
  if (r.h1_error) s += " h1_error=" + format_float(*r.h1_error);
  s += " rigid_fraction=" + format_float(r.rigid.area_fraction);
  return s;
}

/// One solve; writes trace.csv, summary.txt and solution.vtk into cfg.out.
inline RunOutcome run_single(const SolverConfig& cfg, std::ostream& log = std::cout) {
  RunOutcome r = solve_case(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out);
  {
    std::ofstream os(fs::path(cfg.out) / "trace.csv");
    write_trace_csv(os, r.solve.trace);
  }
  const std::string line = summary_line(cfg, r);
  {
    std::ofstream os(fs::path(cfg.out) / "summary.txt");
    os << line << '\n';
  }
  {
    std::ofstream os(fs::path(cfg.out) / "solution.vtk");
    write_vtk(os, *r.space, r.solve.state, r.rigid, "bingham_aa " + cfg.problem + " n=" + std::to_string(cfg.n));
  }
  log << line << '\n';
  return r;
}

struct SweepRow {
  SolverConfig config;
  bool ok = false;
  std::string error;
  int iterations = 0;
  bool converged = false;
  double final_residual = std::nan("");
  double h1_error = std::nan("");
  double rigid_fraction = std::nan("");
};

/// All combinations of the sweep axes in lexicographic order (n, epsilon,
/// tau_s, m); axes that are not swept take the base value.
inline std::vector<SolverConfig> expand_sweep(const SolverConfig& base) {
  const std::vector<int> ns = base.sweep_n.empty() ? std::vector<int>{base.n} : base.sweep_n;
  const std::vector<double> eps = base.sweep_epsilon.empty() ? std::vector<double>{base.epsilon} : base.sweep_epsilon;
  const std::vector<double> taus = base.sweep_tau_s.empty() ? std::vector<double>{base.tau_s} : base.sweep_tau_s;
  const std::vector<int> ms = base.sweep_m.empty() ? std::vector<int>{base.m} : base.sweep_m;
  std::vector<SolverConfig> out;
  for (int n : ns)
    for (double e : eps)
      for (double t : taus)
        for (int m : ms) {
          SolverConfig c = base;
          c.sweep_n.clear();
          c.sweep_epsilon.clear();
          c.sweep_tau_s.clear();
          c.sweep_m.clear();
          c.n = n;
          c.epsilon = e;
          c.tau_s = t;
          c.m = m;
          out.push_back(std::move(c));
        }
  return out;
}

/// Worker count: BINGHAM_AA_THREADS if set and positive, else the hardware
/// concurrency.
inline unsigned sweep_workers() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BINGHAM_AA_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs every combination; per-run failures are recorded, not thrown.
/// Rows come back in expansion order whatever the completion order.
inline std::vector<SweepRow> run_sweep(const SolverConfig& base, unsigned workers = sweep_workers()) {
  validate(base);
  const std::vector<SolverConfig> cases = expand_sweep(base);
  std::vector<SweepRow> rows(cases.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      SweepRow& row = rows[i];
      row.config = cases[i];
      try {
        const RunOutcome r = solve_case(cases[i]);
        row.ok = true;
        row.iterations = r.solve.iterations;
        row.converged = r.solve.converged;
        row.final_residual = r.solve.final_relative_residual;
        row.h1_error = r.h1_error.value_or(std::nan(""));
        row.rigid_fraction = r.rigid.area_fraction;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cases.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

/// Failed runs have converged=false, iterations=0 and nan measurements; the
/// error text goes to the comment lines at the end.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "# bingham_aa sweep, written " << utc_timestamp() << "\n";
  os << "n,h,epsilon,tau_s,m,iterations,converged,final_residual,h1_error,rigid_fraction\n";
  for (const auto& r : rows) {
    const SolverConfig& c = r.config;
    os << c.n << ',' << format_float(std::sqrt(2.0) / c.n) << ',' << format_float(c.epsilon) << ','
       << format_float(c.tau_s) << ',' << c.m << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << ','
       << format_float(r.final_residual) << ',' << format_float(r.h1_error) << ',' << format_float(r.rigid_fraction)
       << '\n';
  }
  for (const auto& r : rows)
    if (!r.ok)
      os << "# failed n=" << r.config.n << " epsilon=" << format_float(r.config.epsilon)
         << " tau_s=" << format_float(r.config.tau_s) << " m=" << r.config.m << ": " << r.error << '\n';
}

}  // namespace bingham
