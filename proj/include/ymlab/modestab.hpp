#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ymlab/operators.hpp"

// Mode-stability eigenvalue problem in the complex lambda plane:
//
//   -(1-rho^2)[u'' + (2/rho)u'] + 2 lambda rho u' + lambda(lambda+1) u
//     + (6/rho^2 + V(rho)) u = 0,   rho in (0, 1),
//
// solved by two-sided Frobenius-seeded shooting. Regular singular points at
// rho = 0 (indices {-3, 2}) and rho = 1 (indices {0, 1-lambda}); eigenvalues
// are the zeros in lambda of the connection coefficient (scaled Wronskian of
// the endpoint-analytic solutions at a matching point).

namespace ymlab {

using Complex = std::complex<double>;

struct ModeStabParams {
  int series_order = 25;     // Frobenius truncation M
  double step_off = 0.05;    // distance delta from each endpoint
  double rho_match = 0.5;    // matching point
  double ode_rtol = 1e-12;
  double ode_atol = 1e-14;
  double refine_tol = 1e-11;  // |connection| at a refined eigenvalue
  int max_refine_iter = 80;
};

struct FrobeniusSeed {
  int endpoint = 0;      // 0 or 1
  int index = 2;         // Frobenius index of the branch used (integer here)
  int order = 0;         // truncation M
  Eigen::VectorXcd coeffs;  // coeffs[0] = 1
  double radius = 0.0;      // step-off distance
  Complex lambda;
  bool degenerate_branch = false;  // used index 1-lambda at rho = 1
};

/// Truncated power series of the endpoint-analytic solution. At rho = 1 with
/// lambda within 1e-9 of {0, -1, -2, ...} the index-0 recurrence divides by a
/// vanishing indicial factor (possible logarithmic case); the seed then
/// switches to the integer index 1-lambda, which is always log-free.
FrobeniusSeed frobenius_seed(Complex lambda, int endpoint, int order,
                             double step_off);

/// Value and derivative of the seeded solution at rho_target (inside (0,1)).
std::array<Complex, 2> shoot(Complex lambda, const FrobeniusSeed& seed,
                             double rho_target, const ModeStabParams& p = {});

struct ConnectionValue {
  Complex lambda;
  Complex value;  // Wronskian / scale; zero iff lambda is an eigenvalue
  double scale;
};

ConnectionValue connection(Complex lambda, double rho_m,
                           const ModeStabParams& p = {});

struct Rectangle {
  double re_lo, re_hi, im_lo, im_hi;
};

/// Number of eigenvalues (with multiplicity) inside the rectangle via the
/// argument principle on the connection value. Adjacent boundary samples are
/// refined until the phase step is < pi/2.
int count_eigenvalues(const Rectangle& rect, int n_boundary,
                      const ModeStabParams& p = {}, int* detours = nullptr);

struct EigenvalueRecord {
  Complex lambda;
  int multiplicity = 1;
  GridFunction eigenfunction;  // max-abs normalized, sampled on [0, 1]
  double residual = 0.0;       // sup ODE residual on the interior
};

/// Secant iteration on the connection value from lambda0, then glue the two
/// shot solutions into an eigenfunction.
EigenvalueRecord refine_eigenvalue(Complex lambda0, const ModeStabParams& p = {},
                                   int eigen_grid_n = 200);

struct SpectrumResult {
  std::vector<EigenvalueRecord> eigenvalues;  // sorted by (Re, Im)
  std::vector<Rectangle> inconclusive;        // cells whose count failed
  double stable_bound = 0.0;  // max Re lambda excluding lambda = 1
  bool stable_bound_valid = false;
  int detours = 0;
};

/// Subdivide the rectangle into contour cells, count, bisect and refine.
SpectrumResult spectrum_scan(const Rectangle& rect, double cell_size,
                             const ModeStabParams& p = {}, int jobs = 1);

/// |connection| on an nre x nim grid over the rectangle (row = Im index).
Eigen::MatrixXd connection_heatmap(const Rectangle& rect, int nre, int nim,
                                   const ModeStabParams& p = {}, int jobs = 1);

/// Minimum |connection| over a sample grid (used for eigenvalue exclusion).
double connection_floor(const Rectangle& rect, int nre, int nim,
                        const ModeStabParams& p = {}, int jobs = 1);

}  // namespace ymlab
