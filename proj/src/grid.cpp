#include "ymlab/grid.hpp"

#include <cmath>
#include <numbers>

#include "ymlab/errors.hpp"

namespace ymlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Chebyshev values -> coefficients (type-I DCT written as a dense matrix).
// Node j corresponds to x_j = cos(j pi / n); the grid uses rho = R(1-x)/2 so
// the ascending rho ordering coincides with the standard descending x one.
Eigen::MatrixXd coeff_matrix(int n) {
  Eigen::MatrixXd c(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    const double ck = (k == 0 || k == n) ? 2.0 : 1.0;
    for (int j = 0; j <= n; ++j) {
      const double cj = (j == 0 || j == n) ? 0.5 : 1.0;
      c(k, j) = 2.0 / (n * ck) * cj * std::cos(k * j * kPi / n);
    }
  }
  return c;
}

}  // namespace

ChebyshevGrid make_grid(int n, double radius) {
  if (n < 4) throw ConfigError("grid degree must be >= 4");
  if (!(radius > 0)) throw ConfigError("grid radius must be positive");

  ChebyshevGrid g;
  g.n = n;
  g.radius = radius;
  g.nodes.resize(n + 1);
  for (int j = 0; j <= n; ++j)
    g.nodes[j] = radius * 0.5 * (1.0 - std::cos(j * kPi / n));
  g.nodes[0] = 0.0;
  g.nodes[n] = radius;

  // Barycentric differentiation matrix with the negative-sum diagonal.
  Eigen::VectorXd w(n + 1);
  for (int j = 0; j <= n; ++j)
    w[j] = ((j % 2 == 0) ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
  g.deriv.resize(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    double diag = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const double d = (w[j] / w[i]) / (g.nodes[i] - g.nodes[j]);
      g.deriv(i, j) = d;
      diag -= d;
    }
    g.deriv(i, i) = diag;
  }

  // Cumulative integration: values -> Chebyshev coefficients -> antiderivative
  // coefficients -> int_0^{rho_j} = (R/2)[P(1) - P(x_j)].
  const Eigen::MatrixXd coeff = coeff_matrix(n);
  Eigen::MatrixXd anti = Eigen::MatrixXd::Zero(n + 2, n + 1);  // b = anti * a
  anti(1, 0) = 1.0;
  if (n >= 2) anti(1, 2) = -0.5;
  for (int m = 2; m <= n + 1; ++m) {
    anti(m, m - 1) = 1.0 / (2.0 * m);
    if (m + 1 <= n) anti(m, m + 1) -= 1.0 / (2.0 * m);
  }
  Eigen::MatrixXd eval(n + 1, n + 2);  // T_m(x_j) for m = 0..n+1
  for (int j = 0; j <= n; ++j)
    for (int m = 0; m <= n + 1; ++m) eval(j, m) = std::cos(m * j * kPi / n);
  Eigen::RowVectorXd at_one = Eigen::RowVectorXd::Ones(n + 2);  // T_m(1) = 1
  g.cumint = (radius * 0.5) *
             ((Eigen::VectorXd::Ones(n + 1) * at_one - eval) * anti * coeff);
  g.cumint.row(0).setZero();
  g.quad = g.cumint.row(n);

  g.div_rho = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int j = 1; j <= n; ++j) g.div_rho(j, j) = 1.0 / g.nodes[j];
  g.div_rho.row(0) = g.deriv.row(0);
  return g;
}

std::shared_ptr<const ChebyshevGrid> make_shared_grid(int n, double radius) {
  return std::make_shared<const ChebyshevGrid>(make_grid(n, radius));
}

Eigen::VectorXd divide_by_rho(const ChebyshevGrid& g, const Eigen::VectorXd& f) {
  return g.div_rho * f;
}

Eigen::VectorXd interpolate(const ChebyshevGrid& g, const Eigen::VectorXd& values,
                            const Eigen::VectorXd& where) {
  Eigen::VectorXd out(where.size());
  for (Eigen::Index i = 0; i < where.size(); ++i)
    out[i] = interpolate_at(g, values, where[i]);
  return out;
}

double interpolate_at(const ChebyshevGrid& g, const Eigen::VectorXd& values,
                      double x) {
  const int n = g.n;
  double num = 0.0, den = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double dx = x - g.nodes[j];
    if (dx == 0.0) return values[j];
    const double wj =
        ((j % 2 == 0) ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
    const double t = wj / dx;
    num += t * values[j];
    den += t;
  }
  return num / den;
}

Eigen::RowVectorXd evaluation_row(const ChebyshevGrid& g, double x) {
  const int n = g.n;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n + 1);
  double den = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double dx = x - g.nodes[j];
    if (dx == 0.0) {
      row.setZero();
      row[j] = 1.0;
      return row;
    }
    const double wj =
        ((j % 2 == 0) ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
    row[j] = wj / dx;
    den += row[j];
  }
  return row / den;
}

void gauss_legendre(int m, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  nodes.resize(m);
  weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[m - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[m - 1 - i] = w;
  }
}

Eigen::MatrixXd spectral_filter_matrix(const ChebyshevGrid& g, double strength) {
  const int n = g.n;
  if (strength <= 0.0) return Eigen::MatrixXd::Identity(n + 1, n + 1);
  const Eigen::MatrixXd coeff = coeff_matrix(n);
  Eigen::MatrixXd eval(n + 1, n + 1);
  for (int j = 0; j <= n; ++j)
    for (int m = 0; m <= n; ++m) eval(j, m) = std::cos(m * j * kPi / n);
  Eigen::VectorXd damp(n + 1);
  for (int m = 0; m <= n; ++m)
    damp[m] = std::exp(-strength * std::pow(double(m) / n, 16));
  return eval * damp.asDiagonal() * coeff;
}

}  // namespace ymlab
