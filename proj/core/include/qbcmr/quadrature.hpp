#pragma once

#include <Eigen/Core>
#include <functional>

namespace qbcmr {

/// Nodes and weights of a quadrature rule on some interval.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n = 200);

/// Integrate with successive refinement: doubles the node count until two
/// consecutive estimates differ by at most tol. Throws numerical_error if the
/// tolerance is not reached before max_nodes.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10, int initial_nodes = 64, int max_nodes = 4096);

}  // namespace qbcmr
