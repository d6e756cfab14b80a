#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace bingham {

/// Quadrature node on the reference triangle in barycentric coordinates.
/// Weights are scaled so that they sum to the reference area 1/2.
struct QuadraturePoint {
  std::array<double, 3> bary{};
  double weight = 0.0;
};

struct QuadratureRule {
  int degree = 0;
  std::vector<QuadraturePoint> points;
};

namespace detail {

/// Gauss-Legendre nodes and weights on [0, 1].
inline void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

inline void push_s3(QuadratureRule& rule, double w) { rule.points.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.5 * w}); }

inline void push_s21(QuadratureRule& rule, double a, double b, double w) {
  rule.points.push_back({{a, b, b}, 0.5 * w});
  rule.points.push_back({{b, a, b}, 0.5 * w});
  rule.points.push_back({{b, b, a}, 0.5 * w});
}

inline void push_s111(QuadratureRule& rule, double a, double b, double c, double w) {
  rule.points.push_back({{a, b, c}, 0.5 * w});
  rule.points.push_back({{a, c, b}, 0.5 * w});
  rule.points.push_back({{b, a, c}, 0.5 * w});
  rule.points.push_back({{b, c, a}, 0.5 * w});
  rule.points.push_back({{c, a, b}, 0.5 * w});
  rule.points.push_back({{c, b, a}, 0.5 * w});
}

/// Collapsed (Duffy) tensor Gauss rule, exact to `degree`.
inline QuadratureRule collapsed_gauss(int degree) {
  const int n = (degree + 3) / 2;
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = x[i];
      const double eta = x[j] * (1.0 - x[i]);
      rule.points.push_back({{1.0 - xi - eta, xi, eta}, w[i] * w[j] * (1.0 - x[i])});
    }
  }
  return rule;
}

}  // namespace detail

/// Symmetric rule on the reference triangle exact for polynomials of total
/// degree <= `degree`. Degrees 1-6 use the classical Dunavant rules; higher
/// degrees fall back to a collapsed Gauss product rule.
inline QuadratureRule triangle_rule(int degree) {
  if (degree < 1) throw std::invalid_argument("triangle_rule: degree must be >= 1");
  QuadratureRule rule;
  rule.degree = degree;
  switch (degree) {
    case 1:
      detail::push_s3(rule, 1.0);
      return rule;
    case 2:
      detail::push_s21(rule, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
      return rule;
    case 3:
    case 4:
      rule.degree = 4;
      detail::push_s21(rule, 0.108103018168070, 0.445948490915965, 0.223381589678011);
      detail::push_s21(rule, 0.816847572980459, 0.091576213509771, 0.109951743655322);
      return rule;
    case 5:
      detail::push_s3(rule, 0.225);
      detail::push_s21(rule, 0.059715871789770, 0.470142064105115, 0.132394152788506);
      detail::push_s21(rule, 0.797426985353087, 0.101286507323456, 0.125939180544827);
      return rule;
    case 6:
      detail::push_s21(rule, 0.501426509658179, 0.249286745170910, 0.116786275726379);
      detail::push_s21(rule, 0.873821971016996, 0.063089014491502, 0.050844906370207);
      detail::push_s111(rule, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
      return rule;
    default:
      return detail::collapsed_gauss(degree);
  }
}

}  // namespace bingham
