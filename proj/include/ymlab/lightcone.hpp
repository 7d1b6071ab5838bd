#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ymlab/linear.hpp"

// Physical-space (t, r) solver for
//
//   psi_tt - psi_rr - (2/r) psi_r + (3/r^2) F(psi) = 0,  F(x) = x(x+1)(x+2),
//
// on r in [0, R] in the psi(t,0) = 0 sector, with the singular term split as
// 6 psi/r^2 + 3 psi^2 (3 + psi)/r^2 (the potential part regularized by
// subtracting F'(0) psi). Fourth-order central differences with parity ghosts
// at the origin, an outgoing one-sided update at r = R, RK4 in time.

namespace ymlab {

struct PhysConfig {
  int nr = 2048;          // grid intervals on [0, r_max]
  double r_max = 1.5;
  double cfl = 0.25;      // dt = cfl * dr
  double t_max = 1.4;
  double breakdown_threshold = 1e7;  // sup |psi_t| considered broken down
  int snapshot_every = 64;           // steps between stored slices
};

struct PhysState {
  double t = 0.0;
  Eigen::VectorXd psi, psi_t;
};

struct PhysTrace {
  std::vector<PhysState> slices;
  std::vector<double> sup_t;       // time stamps of the sup|psi_t| samples
  std::vector<double> sup_psi_t;   // sup_r |psi_t|
  bool broke_down = false;
  double t_break = 0.0;
  double dr = 0.0, dt = 0.0;
};

PhysTrace evolve_physical(const std::function<double(double)>& f,
                          const std::function<double(double)>& g,
                          const PhysConfig& cfg);

/// Conserved energy of the full equation over [0, r_max] (d = 5 weights).
double physical_energy(const PhysState& s, double dr);

struct BlowupFit {
  double t_fit = 0.0;
  double ci = 0.0;  // confidence half-width from the linear fit
  double window_lo = 0.0, window_hi = 0.0;
  int points = 0;
};

/// Least-squares fit of 1/sup|psi_t| against t over the last decade of
/// monotone growth, extrapolated to zero. Throws when no blowup is present
/// or the window is not monotone.
BlowupFit detect_blowup(const PhysTrace& trace, double growth_threshold = 50.0);

struct BlowupReport {
  double t_fit = 0.0;
  double t_ci = 0.0;
  double profile_error = 0.0;   // sup over rho in [0, 0.9] at the last
                                // reliable slice of |psi + 1 - W0|
  double profile_time = 0.0;
  RateFit rate_fit;             // power-law fit of (T-t)^{3/2} E-norm diff
  std::vector<double> slice_t_minus_t;  // abscissae of the norm samples
  std::vector<double> slice_norm;       // (T-t)^{3/2} * E(T-t)-norm values
  bool low_confidence = false;
};

/// Theorem-style convergence diagnostics: rescaled profile error against W0
/// and the power law of the (T-t)^{3/2}-normalized E(T-t)-norm difference
/// from psi^{T_fit}.
BlowupReport convergence_report(const PhysTrace& trace, double t_fit);

}  // namespace ymlab
