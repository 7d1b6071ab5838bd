#pragma once

#include <cmath>
#include <span>
#include <string>

#include "ymlab/errors.hpp"

namespace ymlab {

/// Dormand-Prince 5(4) adaptive step control for small dense states
/// (Eigen fixed-size vectors, real or complex).
template <class State, class Rhs>
State ode45(Rhs&& rhs, State y, double x0, double x1, double rtol, double atol,
            int* steps_taken = nullptr) {
  if (x0 == x1) return y;
  const double dir = (x1 > x0) ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);
  double x = x0;
  double h = dir * span / 100.0;
  State k1 = rhs(x, y);
  int steps = 0, rejects_in_row = 0;
  while (dir * (x1 - x) > 0) {
    if (std::abs(h) > std::abs(x1 - x)) h = x1 - x;
    if (std::abs(h) < 1e-14 * span)
      throw BreakdownError("ode45: step size underflow at x = " +
                           std::to_string(x) +
                           " (try a larger step-off distance)");
    const State k2 = rhs(x + h / 5.0, y + (h / 5.0) * k1);
    const State k3 = rhs(x + 3.0 * h / 10.0,
                         y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    const State k4 =
        rhs(x + 4.0 * h / 5.0,
            y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    const State k5 =
        rhs(x + 8.0 * h / 9.0,
            y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                     64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    const State k6 =
        rhs(x + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                            46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                            5103.0 / 18656.0 * k5));
    const State ynew =
        y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
    const State k7 = rhs(x + h, ynew);
    const State err =
        h * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4 -
             17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7);
    double errnorm = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc =
          atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double e = std::abs(err[i]) / sc;
      errnorm += e * e;
    }
    errnorm = std::sqrt(errnorm / y.size());
    if (errnorm <= 1.0) {
      x += h;
      y = ynew;
      k1 = k7;  // FSAL
      ++steps;
      rejects_in_row = 0;
    } else if (++rejects_in_row > 200) {
      throw BreakdownError("ode45: persistent step rejection at x = " +
                           std::to_string(x));
    }
    const double fac =
        std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(errnorm, 1e-10),
                                                   -0.2)));
    h *= fac;
  }
  if (steps_taken) *steps_taken = steps;
  return y;
}

/// Integrate visiting `targets` (monotone in the direction of travel),
/// invoking obs(x, y) at each.
template <class State, class Rhs, class Obs>
State ode45_targets(Rhs&& rhs, State y, double x0,
                    std::span<const double> targets, double rtol, double atol,
                    Obs&& obs) {
  double x = x0;
  for (double t : targets) {
    y = ode45(rhs, y, x, t, rtol, atol);
    obs(t, y);
    x = t;
  }
  return y;
}

}  // namespace ymlab
