#include <doctest.h>

#include <cmath>

#include "ymlab/errors.hpp"
#include "ymlab/grid.hpp"

using namespace ymlab;

TEST_CASE("grid nodes are ascending with exact endpoints") {
  const auto g = make_grid(32, 1.5);
  CHECK(g.nodes[0] == 0.0);
  CHECK(g.nodes[32] == 1.5);
  for (int j = 1; j <= 32; ++j) CHECK(g.nodes[j] > g.nodes[j - 1]);
  CHECK_THROWS_AS(make_grid(2, 1.0), ConfigError);
}

TEST_CASE("differentiation matrix is exact on polynomials") {
  const auto g = make_grid(24, 1.0);
  Eigen::VectorXd p(g.n + 1), dp(g.n + 1);
  for (int j = 0; j <= g.n; ++j) {
    const double x = g.nodes[j];
    p[j] = 1.0 + x * (2.0 + x * (-3.0 + x * (0.5 + x * 0.25)));
    dp[j] = 2.0 - 6.0 * x + 1.5 * x * x + x * x * x;
  }
  CHECK((g.deriv * p - dp).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("cumulative integration is exact on polynomials") {
  const auto g = make_grid(20, 1.0);
  // int_0^rho s^3 ds = rho^4/4 through the K-style weighting s * s^2
  Eigen::VectorXd f = g.nodes.array().square();
  Eigen::VectorXd kf = g.cumint * g.nodes.cwiseProduct(f);
  for (int j = 0; j <= g.n; ++j)
    CHECK(kf[j] == doctest::Approx(std::pow(g.nodes[j], 4) / 4.0)
                       .epsilon(1e-13));
  // quadrature row = full integral
  CHECK(g.quad.dot(g.nodes.cwiseProduct(f)) ==
        doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("quadrature converges at spectral order on smooth non-polynomials") {
  auto err_at = [](int n) {
    const auto g = make_grid(n, 1.0);
    Eigen::VectorXd f(g.n + 1);
    for (int j = 0; j <= g.n; ++j) f[j] = std::exp(g.nodes[j]);
    return std::abs(g.quad.dot(f) - (std::exp(1.0) - 1.0));
  };
  CHECK(err_at(8) < 1e-8);
  CHECK(err_at(16) < 1e-14);
}

TEST_CASE("divide_by_rho supplies the analytic limit at zero") {
  const auto g = make_grid(16, 1.0);
  Eigen::VectorXd f = g.nodes.array().square();  // f = rho^2, f/rho = rho
  const Eigen::VectorXd q = divide_by_rho(g, f);
  CHECK(q[0] == doctest::Approx(0.0).epsilon(1e-12));
  for (int j = 1; j <= g.n; ++j)
    CHECK(q[j] == doctest::Approx(g.nodes[j]).epsilon(1e-12));
}

TEST_CASE("barycentric interpolation reproduces the interpolant") {
  const auto g = make_grid(24, 1.0);
  Eigen::VectorXd f(g.n + 1);
  for (int j = 0; j <= g.n; ++j) f[j] = std::sin(3.0 * g.nodes[j]);
  for (double x : {0.05, 0.33, 0.77, 0.99}) {
    CHECK(interpolate_at(g, f, x) ==
          doctest::Approx(std::sin(3.0 * x)).epsilon(1e-10));
  }
  CHECK(interpolate_at(g, f, g.nodes[5]) == f[5]);
}

TEST_CASE("spectral filter is the identity at strength zero and damps the "
          "top mode") {
  const auto g = make_grid(16, 1.0);
  CHECK(spectral_filter_matrix(g, 0.0).isIdentity(1e-14));
  const Eigen::MatrixXd f = spectral_filter_matrix(g, 36.0);
  Eigen::VectorXd top(g.n + 1);
  for (int j = 0; j <= g.n; ++j) top[j] = (j % 2 == 0) ? 1.0 : -1.0;
  CHECK((f * top).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::VectorXd smooth = Eigen::VectorXd::Ones(g.n + 1);
  CHECK((f * smooth - smooth).cwiseAbs().maxCoeff() < 1e-12);
}
