#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "ymlab/operators.hpp"

// Discretization of the linearized generator L = L0 + L' acting on pairs
// (u1, u2) over [0, 1]:
//
//   L0 u = ( -rho u1' + 2 u1 + rho^2 u2 - 3 K u2 ,  D^2 u1 - rho u2' - u2 )
//   L' u = ( -V K^2 u2 , 0 ),         D f = f'/rho,
//
// with boundary conditions u1(0) = u1'(0) = u2(0) = 0 and no condition at the
// sonic point rho = 1. The first component is carried in the weighted form
// u1 = rho^4 q (matching the rho^4 vanishing of the generator's domain at the
// origin); in the q variable the norm-defining operator is regular,
//   D^2(rho^4 q) = 8q + 7 rho q' + rho^2 q'',
// which keeps the collocation free of spurious stiff modes. Unknowns are the
// values of q at nodes 0..n (rho = 0 is a characteristic point of the
// transport and needs its own unknown) and of u2 at nodes 1..n, so the
// matrix dimension is 2n+1.

namespace ymlab {

struct GeneratorMatrix {
  int n = 0;  // grid degree; q-lane has n+1 unknowns, u2-lane has n
  std::shared_ptr<const ChebyshevGrid> grid;
  Eigen::MatrixXd l0;      // free part, acting on stacked (q, u2)
  Eigen::MatrixXd lprime;  // potential part (component 2 into component 1)
  Eigen::MatrixXd gram;    // block-diagonal inner-product weights
  Eigen::MatrixXd k2_over_rho5;  // (n+1) x n: u2 -> K^2 u2 / rho^5

  int dim() const { return 2 * n + 1; }
  Eigen::MatrixXd full() const { return l0 + lprime; }
  double norm(const Eigen::VectorXd& u) const;
  /// Full-grid component values -> stacked (q, u2) unknowns.
  Eigen::VectorXd reduce_state(const Eigen::VectorXd& phi1,
                               const Eigen::VectorXd& phi2) const;
  /// Stacked unknowns -> full-grid component values (node 0 pinned to 0).
  void expand_state(const Eigen::VectorXd& u, Eigen::VectorXd& phi1,
                    Eigen::VectorXd& phi2) const;
};

GeneratorMatrix assemble_generator(int n);

/// Free generator applied to full-grid component values (node 0 pinned).
/// The rho^2 u2 - 3K u2 combination is computed in the fused form
/// int_0^rho s^3 (u2/s)' ds, which preserves the O(rho^4) cancellation.
void apply_free_generator(const ChebyshevGrid& g, const Eigen::VectorXd& u1,
                          const Eigen::VectorXd& u2, Eigen::VectorXd& out1,
                          Eigen::VectorXd& out2);

/// First component of L'u: -V K^2 u2 (full-grid values).
Eigen::VectorXd apply_potential_term(const ChebyshevGrid& g,
                                     const Eigen::VectorXd& u2);

/// Explicit resolvent of the free generator at lambda = 2:
///   u(rho) = rho^3/(1-rho^2)^2 int_rho^1 (1-s^2)/s^4 [f1 + s^2 K f2] ds,
///   u2 = Du,  u1 = K(rho^2 Du) + K u - K^2 f2.
/// Inputs must vanish fast enough at 0 (compact-support style).
std::pair<GridFunction, GridFunction> free_resolvent_at_2(
    const GridFunction& f1, const GridFunction& f2);

struct ProjectionData {
  Eigen::VectorXd right;  // discretized symmetry mode g (q-weighted lane)
  Eigen::VectorXd left;   // adjoint eigenvector, scaled so left . right = 1
  double gap = 0.0;       // distance from 1 to the rest of the spectrum

  double amplitude(const Eigen::VectorXd& u) const { return left.dot(u); }
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    return right * left.dot(u);
  }
  Eigen::VectorXd remove(const Eigen::VectorXd& u) const {
    return u - apply(u);
  }
};

/// Rank-1 Riesz projection onto the lambda = 1 eigenspace. The adjoint
/// eigenvector is computed from the transposed matrix; the resulting rank-1
/// projection is the spectral projection in the weighted inner product.
ProjectionData build_projection(const GeneratorMatrix& gen);

/// Contour-integral form of the Riesz projection (numerical quadrature of the
/// resolvent on a circle around 1); cross-check for build_projection.
Eigen::MatrixXd riesz_projection_contour(const GeneratorMatrix& gen,
                                         double radius = 0.5, int points = 64);

/// Eigenvalues of the (optionally free) generator matrix.
std::vector<std::complex<double>> discrete_spectrum(const GeneratorMatrix& gen,
                                                    bool with_potential = true);

struct LinearTrace {
  std::vector<double> tau;
  std::vector<double> norm_total;
  std::vector<double> norm_stable;  // with the rank-1 projection removed
  double dtau = 0.0;
};

/// RK4 time stepping of du/dtau = L u (or L0 u); dtau <= 0 selects the step
/// from the spectral radius of the discrete generator.
LinearTrace linear_evolve(const GeneratorMatrix& gen, Eigen::VectorXd u0,
                          double tau_max, double dtau, bool with_potential,
                          const ProjectionData* proj = nullptr,
                          int record_every = 8);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log-residuals
  double slope_stderr = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int points = 0;
};

/// Least squares on log(norm) over tau in [window_lo, window_hi].
RateFit fit_rate(const std::vector<double>& tau,
                 const std::vector<double>& norm, double window_lo,
                 double window_hi);

double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace ymlab
