#include "qbcmr/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "qbcmr/errors.hpp"

namespace qbcmr {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw invalid_argument_error("gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on the Legendre polynomial, symmetric roots.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  rule.nodes = (rule.nodes.array() * half + mid).matrix();
  rule.weights *= half;
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const QuadratureRule rule = gauss_legendre(n, a, b);
  double sum = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
  return sum;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, int initial_nodes, int max_nodes) {
  double prev = integrate(f, a, b, initial_nodes);
  for (int n = 2 * initial_nodes; n <= max_nodes; n *= 2) {
    const double cur = integrate(f, a, b, n);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw numerical_error("integrate_adaptive: quadrature did not converge to tolerance");
}

}  // namespace qbcmr
