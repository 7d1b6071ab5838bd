#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ymlab/linear.hpp"
#include "ymlab/operators.hpp"

// Nonlinear evolution of the similarity-variable system
//
//   d_tau phi1 = -rho d_rho phi1 + 2 phi1 + rho^2 phi2 - 3 K phi2
//                - V K^2 phi2 - rho Ntilde(rho^-3 K^2 phi2, rho)
//   d_tau phi2 = (1/rho d_rho)(1/rho d_rho phi1) - rho d_rho phi2 - phi2
//
// with data built by U(v, T) from physical-space data v on [0, 3/2], and
// blowup-time tuning that zeroes the unstable symmetry-mode amplitude.

namespace ymlab {

struct FieldState {
  double tau = 0.0;   // slow time, tau = -log(T - t)
  GridFunction phi1;  // parity hint 3
  GridFunction phi2;  // parity hint 1
};

struct EvolutionConfig {
  int n = 96;                   // collocation nodes per component
  double dtau = 0.0;            // <= 0 selects 2/spectral-radius
  double tau_max = 8.0;         // elapsed slow time to integrate
  double filter_strength = 0.0; // spectral tail damping; 0 = off
  int record_every = 16;
  double blowup_threshold = 1e6;
  double fit_window_lo = 2.5;   // elapsed-time window for decay fits
  double fit_window_hi = 5.5;
};

/// Physical-space data pair v = (v1, v2) as functions on [0, 3/2].
struct DataPair {
  std::function<double(double)> v1, v2;
};

DataPair zero_data();
/// Exact data of psi^{T0} relative to psi^1 (closed form).
DataPair relative_selfsimilar_data(double t0);
/// Named perturbation families: "zero", "gauss", "mode", "random",
/// "relative" (param = T0).
DataPair builtin_family(const std::string& name, double amplitude,
                        std::uint64_t seed = 0, double param = 0.0);
/// Natural cubic splines through CSV samples (rho ascending on [0, 3/2]).
DataPair spline_data(const std::vector<double>& r,
                     const std::vector<double>& v1,
                     const std::vector<double>& v2);

/// U(v, T): similarity-variable state at tau = -log T, combining rescaled
/// data with the closed-form psi^1-vs-psi^T difference terms.
FieldState initial_data_U(const DataPair& v, double T,
                          std::shared_ptr<const ChebyshevGrid> grid);

/// Full nonlinear right-hand side on raw component vectors (node 0 pinned).
std::pair<Eigen::VectorXd, Eigen::VectorXd> rhs_vec(const ChebyshevGrid& g,
                                                    const Eigen::VectorXd& phi1,
                                                    const Eigen::VectorXd& phi2);
std::pair<GridFunction, GridFunction> rhs(const FieldState& state);

struct EvolveRecord {
  double tau = 0.0;  // absolute slow time
  NormReport norm;
  double unstable_amplitude = 0.0;  // coordinate on span{g} via the projection
};

struct EvolutionTrace {
  std::vector<EvolveRecord> records;
  bool blew_up = false;    // norm exceeded the threshold
  bool diverged = false;   // NaN/overflow
  double last_good_tau = 0.0;
  double dtau = 0.0;
  FieldState final_state;
};

EvolutionTrace evolve(const FieldState& u0, const EvolutionConfig& cfg,
                      const GeneratorMatrix* gen = nullptr,
                      const ProjectionData* proj = nullptr);

struct TuningResult {
  double t_star = 1.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  std::vector<std::array<double, 2>> amplitude_trace;  // (T, amplitude)
  RateFit decay_fit;
  EvolutionTrace tuned_trace;
  double filter_strength = 0.0;
  double tau_probe = 6.0;
};

/// Root-find T in (1/2, 3/2) so that the unstable amplitude of the evolution
/// from U(v, T) vanishes at tau_probe, then fit the post-tuning decay.
TuningResult tune_blowup_time(const DataPair& v, const EvolutionConfig& cfg,
                              double tau_probe = 6.0, double t_tol = 1e-10);

}  // namespace ymlab
