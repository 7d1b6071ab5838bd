#pragma once

#include <array>
#include <cmath>
#include <string>
#include <type_traits>

#include "ymlab/errors.hpp"

// Closed-form profiles of the d=5 equivariant Yang-Mills wave equation
//
//   psi_tt - psi_rr - (2/r) psi_r + (3/r^2) F(psi) = 0,   F(x) = x(x+1)(x+2),
//
// around the self-similar ground state W0(rho) = (1-rho^2)/(1+(3/5)rho^2).
// Everything here is exact rational arithmetic in rho; the common denominator
// is a power of (5+3 rho^2), which keeps the evaluations cancellation-free
// near rho = 1.

namespace ymlab::profiles {

namespace detail {
template <class T>
constexpr void require_nonneg(T rho) {
  if constexpr (std::is_arithmetic_v<T>) {
    if (rho < T(0)) throw ConfigError("profile argument rho must be >= 0");
  }
}
}  // namespace detail

template <class T>
constexpr T F(T x) {
  return x * (x + T(1)) * (x + T(2));
}

template <class T>
constexpr T Fprime(T x) {
  return T(3) * x * x + T(6) * x + T(2);
}

/// Ground-state profile W0(rho) = 5(1-rho^2)/(5+3rho^2).
template <class T>
constexpr T w0(T rho) {
  detail::require_nonneg(rho);
  const T r2 = rho * rho;
  return T(5) * (T(1) - r2) / (T(5) + T(3) * r2);
}

template <class T>
constexpr T w0_prime(T rho) {
  detail::require_nonneg(rho);
  const T d = T(5) + T(3) * rho * rho;
  return T(-80) * rho / (d * d);
}

template <class T>
constexpr T w0_second(T rho) {
  const T r2 = rho * rho;
  const T d = T(5) + T(3) * r2;
  return T(-80) * (T(5) - T(9) * r2) / (d * d * d);
}

template <class T>
constexpr T w0_third(T rho) {
  const T r2 = rho * rho;
  const T d = T(5) + T(3) * r2;
  return T(2880) * rho * (T(5) - T(3) * r2) / (d * d * d * d);
}

/// (W0(rho) - 1)/rho, the regular part of the deviation from the flat vacuum.
template <class T>
constexpr T w0_minus_one_over_rho(T rho) {
  const T r2 = rho * rho;
  return T(-8) * rho / (T(5) + T(3) * r2);
}

/// Similarity-variable potential V(rho) = [3F'(W0-1) - 6]/rho^2
///                                      = -144(5-rho^2)/(5+3rho^2)^2.
template <class T>
constexpr T potential_v(T rho) {
  detail::require_nonneg(rho);
  const T r2 = rho * rho;
  const T d = T(5) + T(3) * r2;
  return T(-144) * (T(5) - r2) / (d * d);
}

/// Nonlinear remainder kernel Ntilde(x, rho) = 9 W0(rho) x^2 + 3 x^3.
template <class T>
constexpr T ntilde(T x, T rho) {
  return T(9) * w0(rho) * x * x + T(3) * x * x * x;
}

/// Symmetry mode g = (g1, g2), the lambda = 1 eigenfunction pair obtained from
/// rho W0'(rho) after the -1/240 normalization.
template <class T>
constexpr std::array<T, 2> symmetry_mode(T rho) {
  detail::require_nonneg(rho);
  const T r2 = rho * rho;
  const T d = T(5) + T(3) * r2;
  const T d2 = d * d;
  const T g1 = rho * rho * rho * r2 * (T(5) - r2) / (d2 * d);
  const T g2 = rho * (T(125) - T(50) * r2 - T(3) * r2 * r2) / (d2 * d2);
  return {g1, g2};
}

/// h0(rho) = rho^2/(5+3rho^2)^2; satisfies rho W0'(rho) = -80 h0(rho).
template <class T>
constexpr T h0(T rho) {
  const T d = T(5) + T(3) * rho * rho;
  return rho * rho / (d * d);
}

/// gtilde(rho) = rho^2 (35-3rho^2) / (3 (5+3rho^2)^3), the right-hand side in
/// the rank-one multiplicity argument; s^2 h0(s) gtilde(s) > 0 on (0,1).
template <class T>
constexpr T gtilde(T rho) {
  const T r2 = rho * rho;
  const T d = T(5) + T(3) * r2;
  return r2 * (T(35) - T(3) * r2) / (T(3) * d * d * d);
}

/// Self-similar solution pair (psi^T, d_t psi^T) at (t, r); requires t < T.
template <class T>
constexpr std::array<T, 2> psi_T(T t, T r, T blowup_time) {
  if (!(t < blowup_time)) throw ConfigError("psi_T requires t < T");
  const T s = blowup_time - t;
  const T rho = r / s;
  return {w0(rho) - T(1), w0_prime(rho) * rho / s};
}

/// D^2[W0 - 1](x) with D^2 f = x f'' + 5 f' + 3 f / x, written over the common
/// denominator: -24 x (125 + 50 x^2 + 9 x^4) / (5+3x^2)^3.
template <class T>
constexpr T d2_w0_minus_one(T x) {
  const T x2 = x * x;
  const T d = T(5) + T(3) * x2;
  return T(-24) * x * (T(125) + T(50) * x2 + T(9) * x2 * x2) / (d * d * d);
}

/// First component of the initial-data pair of psi^{T0} relative to psi^1,
/// v1(r) = r^3 [psi^{T0}_t(0,r) - psi^1_t(0,r)], valid on [0, 3/2].
template <class T>
constexpr T relative_data_v1(T r, T t0) {
  const T r3 = r * r * r;
  return r3 * r * (w0_prime(r / t0) / (t0 * t0) - w0_prime(r));
}

/// Second component, v2(r) = D^2[psi^{T0}(0,.) - psi^1(0,.)](r).
template <class T>
constexpr T relative_data_v2(T r, T t0) {
  return d2_w0_minus_one(r / t0) / t0 - d2_w0_minus_one(r);
}

// ----------------------------------------------------------------------------
// Tagged facade used by the CLI identity report.

enum class ProfileId {
  W0,
  W0Prime,
  PsiT,
  PsiTt,
  F,
  Fprime,
  V,
  Ntilde,
  G1,
  G2,
  H0,
  Gtilde,
};

struct ClosedForm {
  ProfileId id;
  std::string name;
  double domain_lo;
  double domain_hi;
};

inline const std::array<ClosedForm, 12>& closed_forms() {
  static const std::array<ClosedForm, 12> forms = {{
      {ProfileId::W0, "W0", 0.0, 1.5},
      {ProfileId::W0Prime, "W0_prime", 0.0, 1.5},
      {ProfileId::PsiT, "psiT", 0.0, 1.5},
      {ProfileId::PsiTt, "psiT_t", 0.0, 1.5},
      {ProfileId::F, "F", -3.0, 3.0},
      {ProfileId::Fprime, "Fprime", -3.0, 3.0},
      {ProfileId::V, "V", 0.0, 1.0},
      {ProfileId::Ntilde, "Ntilde", 0.0, 1.0},
      {ProfileId::G1, "g1", 0.0, 1.0},
      {ProfileId::G2, "g2", 0.0, 1.0},
      {ProfileId::H0, "h0", 0.0, 1.5},
      {ProfileId::Gtilde, "gtilde", 0.0, 1.0},
  }};
  return forms;
}

/// Single-argument evaluation for the scalar profiles (PsiT/PsiTt evaluate the
/// T = 1 slice at t = 0; Ntilde evaluates at x = 1).
inline double eval(ProfileId id, double arg) {
  switch (id) {
    case ProfileId::W0: return w0(arg);
    case ProfileId::W0Prime: return w0_prime(arg);
    case ProfileId::PsiT: return psi_T(0.0, arg, 2.0)[0];
    case ProfileId::PsiTt: return psi_T(0.0, arg, 2.0)[1];
    case ProfileId::F: return F(arg);
    case ProfileId::Fprime: return Fprime(arg);
    case ProfileId::V: return potential_v(arg);
    case ProfileId::Ntilde: return ntilde(1.0, arg);
    case ProfileId::G1: return symmetry_mode(arg)[0];
    case ProfileId::G2: return symmetry_mode(arg)[1];
    case ProfileId::H0: return h0(arg);
    case ProfileId::Gtilde: return gtilde(arg);
  }
  throw ConfigError("unknown profile id");
}

}  // namespace ymlab::profiles
