#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "ymlab/modestab.hpp"
#include "ymlab/ode45.hpp"
#include "ymlab/profiles.hpp"

using namespace ymlab;
namespace pf = ymlab::profiles;

TEST_CASE("frobenius seed at lambda=1, endpoint 0 matches the closed-form "
          "eigenfunction series") {
  // rho W0' = -80 rho^2/(5+3rho^2)^2; normalized to a0 = 1 the Taylor
  // coefficients are (1+0.6 rho^2)^{-2} = 1 - 1.2 r^2 + 1.08 r^4 - 0.864 r^6.
  const auto seed = frobenius_seed({1.0, 0.0}, 0, 12, 0.05);
  CHECK(seed.coeffs[0] == std::complex<double>(1.0, 0.0));
  CHECK(std::abs(seed.coeffs[1]) < 1e-14);
  CHECK(std::abs(seed.coeffs[2] - std::complex<double>(-1.2, 0.0)) < 1e-13);
  CHECK(std::abs(seed.coeffs[4] - std::complex<double>(1.08, 0.0)) < 1e-13);
  CHECK(std::abs(seed.coeffs[6] - std::complex<double>(-0.864, 0.0)) < 1e-13);
  CHECK(seed.index == 2);
}

TEST_CASE("frobenius seed at lambda=1/2, endpoint 1 reproduces the "
          "series-substitution oracle") {
  const auto seed = frobenius_seed({0.5, 0.0}, 1, 12, 0.05);
  CHECK(seed.index == 0);
  CHECK_FALSE(seed.degenerate_branch);
  const double expect[7] = {1.0, -9.0 / 4.0, -65.0 / 32.0, -49.0 / 128.0,
                            2125.0 / 14336.0, -6143.0 / 8192.0,
                            -10393569.0 / 5046272.0};
  for (int k = 0; k < 7; ++k)
    CHECK(std::abs(seed.coeffs[k] - expect[k]) <
          1e-12 * (1.0 + std::abs(expect[k])));
}

TEST_CASE("frobenius seed at the degenerate lambda=0 endpoint 1 switches to "
          "the index-1 branch and matches the Taylor oracle") {
  const auto seed = frobenius_seed({0.0, 0.0}, 1, 12, 0.05);
  CHECK(seed.degenerate_branch);
  CHECK(seed.index == 1);
  const double expect[7] = {1.0, 1.0 / 4.0, -3.0 / 16.0, 5.0 / 32.0,
                            401.0 / 512.0, 2487.0 / 2048.0, 79529.0 / 57344.0};
  for (int k = 0; k < 7; ++k)
    CHECK(std::abs(seed.coeffs[k] - expect[k]) <
          1e-12 * (1.0 + std::abs(expect[k])));
}

TEST_CASE("seed preconditions") {
  CHECK_THROWS_AS(frobenius_seed({0.5, 0.0}, 0, 5, 0.05), ConfigError);
  CHECK_THROWS_AS(frobenius_seed({0.5, 0.0}, 0, 25, 0.5), ConfigError);
  CHECK_THROWS_AS(frobenius_seed({0.5, 0.0}, 2, 25, 0.05), ConfigError);
}

TEST_CASE("shoot at lambda=1 lands on the closed-form eigenfunction") {
  ModeStabParams p;
  const auto seed = frobenius_seed({1.0, 0.0}, 0, p.series_order, p.step_off);
  const auto [u, up] = shoot({1.0, 0.0}, seed, 0.5, p);
  // seed-normalized eigenfunction is -(5/16) rho W0'
  CHECK(std::abs(u - std::complex<double>(100.0 / 529.0, 0.0)) < 1e-9);
  CHECK(std::abs(up - std::complex<double>(6800.0 / 12167.0, 0.0)) < 1e-9);
  CHECK(std::abs(u.imag()) < 1e-13);
  CHECK(std::abs(up.imag()) < 1e-13);
}

TEST_CASE("shoot is stable under halving the step-off distance") {
  ModeStabParams p;
  const Complex lam{0.37, 1.2};
  const auto s1 = frobenius_seed(lam, 0, 30, 0.05);
  const auto s2 = frobenius_seed(lam, 0, 30, 0.025);
  const auto a = shoot(lam, s1, 0.5, p);
  const auto b = shoot(lam, s2, 0.5, p);
  CHECK(std::abs(a[0] - b[0]) < 1e-10 * (1.0 + std::abs(a[0])));
  CHECK(std::abs(a[1] - b[1]) < 1e-10 * (1.0 + std::abs(a[1])));
}

TEST_CASE("connection values at the anchor points") {
  ModeStabParams p;
  CHECK(std::abs(connection({1.0, 0.0}, 0.5, p).value) < 1e-9);
  CHECK(std::abs(connection({2.0, 0.0}, 0.5, p).value) > 0.05);
  CHECK(std::abs(connection({0.0, 1e-4}, 0.5, p).value) > 0.05);
  // lambda = 0 exactly: degenerate branch at rho=1, still bounded away
  CHECK(std::abs(connection({0.0, 0.0}, 0.5, p).value) > 0.05);
}

TEST_CASE("connection is conjugate-symmetric and continuous along a segment") {
  ModeStabParams p;
  for (const Complex lam : {Complex{0.3, 0.7}, Complex{-0.2, 2.1}}) {
    const Complex a = connection(lam, 0.5, p).value;
    const Complex b = connection(std::conj(lam), 0.5, p).value;
    CHECK(std::abs(b - std::conj(a)) < 1e-10);
  }
  Complex prev;
  for (int i = 0; i <= 40; ++i) {
    const Complex lam{0.2 + 0.6 * i / 40.0, 0.1};
    const Complex v = connection(lam, 0.5, p).value;
    if (i > 0)
      CHECK(std::abs(v - prev) < 0.25 * (std::abs(v) + std::abs(prev)));
    prev = v;
  }
}

TEST_CASE("argument principle counts around the symmetry mode") {
  ModeStabParams p;
  CHECK(count_eigenvalues({0.5, 1.5, -0.5, 0.5}, 8, p) == 1);
  CHECK(count_eigenvalues({1.2, 2.0, -1.0, 1.0}, 8, p) == 0);
  CHECK(count_eigenvalues({0.0, 2.0, 5.0, 8.0}, 8, p) == 0);
}

TEST_CASE("refine near 1 recovers the symmetry eigenvalue and eigenfunction") {
  ModeStabParams p;
  const auto rec = refine_eigenvalue({0.9, 0.0}, p);
  CHECK(std::abs(rec.lambda - Complex{1.0, 0.0}) < 1e-8);
  CHECK(rec.multiplicity == 1);
  CHECK(rec.residual < 1e-6);
  // eigenfunction vs h0/h0(1) (both normalized to value 1 at the max node)
  const auto& grid = *rec.eigenfunction.grid;
  double sup = 0.0;
  for (int j = 0; j <= grid.n; ++j) {
    const double exact = pf::h0(grid.nodes[j]) / pf::h0(1.0);
    sup = std::max(sup, std::abs(rec.eigenfunction.values[j] - exact));
  }
  CHECK(sup < 1e-7);
}

TEST_CASE("refine near -0.6 finds the first stable eigenvalue") {
  ModeStabParams p;
  const auto rec = refine_eigenvalue({-0.6, 0.0}, p);
  CHECK(std::abs(rec.lambda.real() - (-0.5889)) < 0.01);
  CHECK(std::abs(rec.lambda.imag()) < 1e-10);
  CHECK(rec.residual < 1e-6);
  // tight self-consistency pin from the frozen converged value
  CHECK(std::abs(rec.lambda.real() - (-0.58890482)) < 1e-6);

  // stability under (M, delta) -> (40, 0.025) and matching-point moves
  ModeStabParams p2;
  p2.series_order = 40;
  p2.step_off = 0.025;
  const auto rec2 = refine_eigenvalue(rec.lambda, p2);
  CHECK(std::abs(rec2.lambda - rec.lambda) < 1e-8);
  ModeStabParams p3 = p;
  p3.rho_match = 0.4;
  ModeStabParams p4 = p;
  p4.rho_match = 0.6;
  const auto rec3 = refine_eigenvalue(rec.lambda, p3);
  const auto rec4 = refine_eigenvalue(rec.lambda, p4);
  CHECK(std::abs(rec3.lambda - rec4.lambda) < 1e-8);
}

TEST_CASE("eigenfunction residual decreases under refinement") {
  ModeStabParams p;
  const auto coarse = refine_eigenvalue({1.0, 0.0}, p, 100);
  const auto fine = refine_eigenvalue({1.0, 0.0}, p, 200);
  CHECK(fine.residual < 1e-6);
  CHECK(coarse.residual < 1e-4);
}

TEST_CASE("Wronskian of h0 and the second solution matches "
          "1/(rho^2(1-rho^2))") {
  // h1 from the lambda=1 ODE as an IVP at rho* = 1/2 normalized by the
  // prescribed Wronskian; Abel's identity then forces W = 1/(rho^2(1-rho^2)).
  auto rhs = [](double rho, const Eigen::Vector2d& y) -> Eigen::Vector2d {
    const double lam = 1.0;
    const double upp =
        -2.0 / rho * y[1] +
        (2.0 * lam * rho * y[1] + lam * (lam + 1.0) * y[0] +
         (6.0 / (rho * rho) + pf::potential_v(rho)) * y[0]) /
            (1.0 - rho * rho);
    return {y[1], upp};
  };
  const double rho0 = 0.5;
  Eigen::Vector2d y0{0.0, (16.0 / 3.0) / pf::h0(rho0)};
  auto h0p = [](double r) {
    const double d = 5.0 + 3.0 * r * r;
    return r * (10.0 - 6.0 * r * r) / (d * d * d);
  };
  double worst = 0.0;
  for (double target : {0.1, 0.25, 0.4, 0.6, 0.75, 0.9}) {
    const Eigen::Vector2d y = ode45(rhs, y0, rho0, target, 1e-13, 1e-15);
    const double w = pf::h0(target) * y[1] - h0p(target) * y[0];
    const double exact = 1.0 / (target * target * (1.0 - target * target));
    worst = std::max(worst, std::abs(w - exact) / exact);
  }
  CHECK(worst < 1e-8);

  // reduction-of-order construction agrees with the IVP solution
  for (double target : {0.3, 0.7}) {
    const auto integrand = [](long double s) -> long double {
      const long double d = 5.0L + 3.0L * s * s;
      const long double h = s * s / (d * d);
      return 1.0L / (s * s * (1.0L - s * s) * h * h);
    };
    const double red =
        pf::h0(target) *
        double(oracle::integrate(integrand, 0.5L, target, 1e-18L));
    const Eigen::Vector2d y = ode45(rhs, y0, rho0, target, 1e-13, 1e-15);
    CHECK(std::abs(red - y[0]) < 1e-8 * (1.0 + std::abs(red)));
  }
}

TEST_CASE("multiplicity integral: two independent quadratures give 1/12288") {
  // int_0^1 s^2 h0(s) gtilde(s) ds, positive, exact value 1/12288
  auto grid = make_shared_grid(128, 1.0);
  Eigen::VectorXd integrand(grid->n + 1);
  for (int j = 0; j <= grid->n; ++j) {
    const double s = grid->nodes[j];
    integrand[j] = s * s * pf::h0(s) * pf::gtilde(s);
  }
  const double q1 = grid->quad.dot(integrand);
  const double q2 = double(oracle::integrate(
      [](long double s) -> long double {
        const long double d = 5.0L + 3.0L * s * s;
        const long double h = s * s / (d * d);
        const long double gt =
            s * s * (35.0L - 3.0L * s * s) / (3.0L * d * d * d);
        return s * s * h * gt;
      },
      0.0L, 1.0L, 1e-20L));
  CHECK(q1 > 0.0);
  CHECK(std::abs(q1 - q2) < 1e-10);
  CHECK(q1 == doctest::Approx(1.0 / 12288.0).epsilon(1e-12));
}

TEST_CASE("spectrum scan over a reduced window finds exactly the symmetry "
          "mode and the first stable eigenvalue") {
  ModeStabParams p;
  const auto res = spectrum_scan({-0.9, 1.3, -2.0, 2.0}, 0.4, p, 2);
  REQUIRE(res.eigenvalues.size() == 2);
  CHECK(std::abs(res.eigenvalues[0].lambda - Complex{-0.58890482, 0.0}) <
        1e-6);
  CHECK(std::abs(res.eigenvalues[1].lambda - Complex{1.0, 0.0}) < 1e-8);
  CHECK(res.inconclusive.empty());
  CHECK(res.stable_bound_valid);
  CHECK(res.stable_bound == doctest::Approx(-0.58890482).epsilon(1e-4));
  for (const auto& rec : res.eigenvalues) CHECK(rec.multiplicity == 1);
}

TEST_CASE("scan rejects rectangles outside the ODE-reduction domain") {
  ModeStabParams p;
  CHECK_THROWS_AS(spectrum_scan({-2.0, 0.0, -1.0, 1.0}, 0.5, p, 1),
                  ConfigError);
}
