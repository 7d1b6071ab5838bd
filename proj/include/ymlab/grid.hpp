#pragma once

#include <Eigen/Dense>
#include <memory>

namespace ymlab {

/// Chebyshev-Gauss-Lobatto collocation grid on [0, R], nodes ascending with
/// rho_0 = 0 and rho_n = R (clustered at both endpoints). Carries the dense
/// spectral differentiation matrix, the cumulative integration matrix
/// (integral of the degree-n interpolant from 0 to each node, exact for
/// polynomial integrands of degree <= n) and the induced quadrature weights.
struct ChebyshevGrid {
  int n = 0;                 // polynomial degree; n+1 nodes
  double radius = 1.0;       // R
  Eigen::VectorXd nodes;     // (n+1), ascending
  Eigen::MatrixXd deriv;     // (n+1)x(n+1) differentiation matrix
  Eigen::MatrixXd cumint;    // (n+1)x(n+1), (cumint f)_j = int_0^{rho_j} p_f
  Eigen::RowVectorXd quad;   // Clenshaw-Curtis weights (= last row of cumint)
  Eigen::MatrixXd div_rho;   // f -> f/rho with the spectral limit at rho = 0
};

ChebyshevGrid make_grid(int n, double radius);
std::shared_ptr<const ChebyshevGrid> make_shared_grid(int n, double radius);

/// f/rho using node values for rho > 0 and the interpolant's derivative at 0
/// (valid when f(0) = 0; the caller guarantees the parity).
Eigen::VectorXd divide_by_rho(const ChebyshevGrid& g, const Eigen::VectorXd& f);

/// Evaluate the interpolant of `values` at arbitrary points (barycentric).
Eigen::VectorXd interpolate(const ChebyshevGrid& g, const Eigen::VectorXd& values,
                            const Eigen::VectorXd& where);
double interpolate_at(const ChebyshevGrid& g, const Eigen::VectorXd& values, double x);

/// Dense values -> values map that damps the Chebyshev coefficient tail by
/// exp(-strength (k/n)^16); identity for strength = 0.
Eigen::MatrixXd spectral_filter_matrix(const ChebyshevGrid& g, double strength);

/// Row functional evaluating the interpolant at x (barycentric weights).
Eigen::RowVectorXd evaluation_row(const ChebyshevGrid& g, double x);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace ymlab
