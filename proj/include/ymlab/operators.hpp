#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <utility>

#include "ymlab/grid.hpp"

namespace ymlab {

/// A scalar field sampled on a collocation grid over [0, R]. `parity_hint` is
/// the expected leading power of rho at the origin; operations that divide by
/// rho rely on it for their analytic limits.
struct GridFunction {
  std::shared_ptr<const ChebyshevGrid> grid;
  Eigen::VectorXd values;
  int parity_hint = 0;
};

GridFunction sample(std::shared_ptr<const ChebyshevGrid> grid,
                    const std::function<double(double)>& f, int parity_hint);

/// Throws ConfigError when values/rho^p blows up on the three smallest
/// positive nodes (wrong declared parity).
void check_parity(const GridFunction& f);

struct NormReport {
  double norm1 = 0.0;     // ||u1||_1 = || D^2 u1 ||_{L^2}
  double norm2 = 0.0;     // ||u2||_2 = || u2' ||_{L^2}
  double total = 0.0;     // sqrt(norm1^2 + norm2^2)
  double energy_R = 0.0;  // the E(R) norm of the encoded data pair
};

/// Kf(rho) = int_0^rho s f(s) ds; exact for polynomial f of degree <= n-1.
GridFunction apply_K(const GridFunction& f);
GridFunction apply_K2(const GridFunction& f);

/// Au = rho^{-3} K^2 u with A u(0) = 0; requires parity_hint >= 1.
GridFunction apply_A(const GridFunction& u);

/// D^2 f = r f'' + 5 f' + 3 f/r (the weighted radial operator); parity >= 1.
GridFunction apply_D2_weighted(const GridFunction& f);

/// phi-hat = (1/r d_r)^2 (r^3 phi); requires phi(0) = phi'(0) = 0.
GridFunction hat_transform(const GridFunction& phi);

/// Pair norm of Lemma-basicH type: boundary conditions u1(0)=u1'(0)=u2(0)=0.
NormReport pair_norm(const GridFunction& u1, const GridFunction& u2);

/// E(R) norm with both integrands coded literally:
///   |r f''' + 6 f'' + 3 f'/r - 3 f/r^2|^2 + |r g'' + 5 g' + 3 g/r|^2.
double energy_norm(const GridFunction& f, const GridFunction& g, double R);

/// Both sides of the Hardy inequality
///   int u^2/rho^alpha <= (2/(alpha-1))^2 int (u')^2 / rho^{alpha-2}.
std::pair<double, double> hardy_check(const GridFunction& u, double alpha);

// Raw-vector versions used when composing operators (values include the
// pinned node 0).
Eigen::VectorXd apply_K_vec(const ChebyshevGrid& g, const Eigen::VectorXd& f);
Eigen::VectorXd apply_K2_vec(const ChebyshevGrid& g, const Eigen::VectorXd& f);
Eigen::VectorXd apply_A_vec(const ChebyshevGrid& g, const Eigen::VectorXd& f);

/// (1/rho d_rho)^2 as a dense matrix (the norm-defining second derivative).
Eigen::MatrixXd d_sq_matrix(const ChebyshevGrid& g);

}  // namespace ymlab
