#include "ymlab/linear.hpp"

#include <cmath>
#include <numbers>

#include "ymlab/errors.hpp"
#include "ymlab/profiles.hpp"

namespace ymlab {

namespace {

// Row functional u2 -> K u2(s) = int_0^s t u2(t) dt by Gauss-Legendre on the
// interpolant. The rescaled integral rows (K^2/rho^5, fused/rho^4) are built
// this way at every node: the quadrature is exact on the polynomial space,
// positively weighted (no cancellation under the rescaling), and using one
// rule uniformly keeps the discrete wave system free of spurious modes that
// a mixed quadrature seeds at the switchover nodes.
Eigen::RowVectorXd k_row_at(const ChebyshevGrid& g, double s,
                            const Eigen::VectorXd& gl_x,
                            const Eigen::VectorXd& gl_w) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(g.n + 1);
  for (int h = 0; h < gl_x.size(); ++h) {
    const double t = 0.5 * s * (gl_x[h] + 1.0);
    row += (0.5 * s * gl_w[h] * t) * evaluation_row(g, t);
  }
  return row;
}

}  // namespace

double GeneratorMatrix::norm(const Eigen::VectorXd& u) const {
  return std::sqrt(std::max(0.0, u.dot(gram * u)));
}

Eigen::VectorXd GeneratorMatrix::reduce_state(const Eigen::VectorXd& phi1,
                                              const Eigen::VectorXd& phi2) const {
  // q at nodes 0..n, u2 at nodes 1..n. The division by rho^4 keeps relative
  // accuracy only where phi1 dominates roundoff; below rho = 0.05 (and at
  // the origin) q is taken from the barycentric interpolant through the
  // trustworthy nodes instead.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dim());
  int jcut = 1;
  while (jcut <= n && grid->nodes[jcut] < 0.05) ++jcut;
  for (int j = jcut; j <= n; ++j) {
    const double r = grid->nodes[j];
    u[j] = phi1[j] / (r * r * r * r);
  }
  for (int j = 1; j <= n; ++j) u[n + 1 + j - 1] = phi2[j];

  // subset barycentric weights: full-grid weights times the removed factors
  std::vector<double> ws(n - jcut + 1);
  double scale = 0.0;
  for (int k = jcut; k <= n; ++k) {
    double w = ((k % 2 == 0) ? 1.0 : -1.0) * ((k == n) ? 0.5 : 1.0);
    for (int l = 0; l < jcut; ++l) w *= (grid->nodes[k] - grid->nodes[l]);
    ws[k - jcut] = w;
    scale = std::max(scale, std::abs(w));
  }
  for (auto& w : ws) w /= scale;
  for (int j = 0; j < jcut; ++j) {
    const double x = grid->nodes[j];
    double num = 0.0, den = 0.0;
    for (int k = jcut; k <= n; ++k) {
      const double t = ws[k - jcut] / (x - grid->nodes[k]);
      num += t * u[k];
      den += t;
    }
    u[j] = num / den;
  }
  return u;
}

void GeneratorMatrix::expand_state(const Eigen::VectorXd& u,
                                   Eigen::VectorXd& phi1,
                                   Eigen::VectorXd& phi2) const {
  phi1.setZero(n + 1);
  phi2.setZero(n + 1);
  for (int j = 1; j <= n; ++j) {
    const double r = grid->nodes[j];
    phi1[j] = u[j] * r * r * r * r;
    phi2[j] = u[n + 1 + j - 1];
  }
}

void apply_free_generator(const ChebyshevGrid& g, const Eigen::VectorXd& u1,
                          const Eigen::VectorXd& u2, Eigen::VectorXd& out1,
                          Eigen::VectorXd& out2) {
  const Eigen::VectorXd du1 = g.deriv * u1;
  // rho^2 u2 - 3 K u2 = -c rho^2/2 + int_0^rho s^3 ((u2 - c)/s)' ds with
  // c = u2(0); splitting the constant keeps the quotient regular and the
  // O(rho^4) cancellation intact.
  const double c = u2[0];
  const Eigen::VectorXd w =
      divide_by_rho(g, u2 - c * Eigen::VectorXd::Ones(g.n + 1));
  const Eigen::VectorXd dw = g.deriv * w;
  const Eigen::VectorXd fused =
      g.cumint * (g.nodes.array().cube() * dw.array()).matrix() -
      0.5 * c * g.nodes.cwiseAbs2();
  out1 = -g.nodes.cwiseProduct(du1) + 2.0 * u1 + fused;
  const Eigen::VectorXd t = divide_by_rho(g, du1);
  out2 = divide_by_rho(g, g.deriv * t) - g.nodes.cwiseProduct(g.deriv * u2) -
         u2;
  out1[0] = 0.0;
  out2[0] = 0.0;
}

Eigen::VectorXd apply_potential_term(const ChebyshevGrid& g,
                                     const Eigen::VectorXd& u2) {
  Eigen::VectorXd v(g.n + 1);
  for (int j = 0; j <= g.n; ++j) v[j] = profiles::potential_v(g.nodes[j]);
  Eigen::VectorXd out = -v.cwiseProduct(apply_K2_vec(g, u2));
  out[0] = 0.0;
  return out;
}

GeneratorMatrix assemble_generator(int n) {
  if (n < 32) throw ConfigError("assemble_generator: n must be >= 32");
  GeneratorMatrix gen;
  gen.n = n;
  gen.grid = make_shared_grid(n, 1.0);
  const auto& g = *gen.grid;
  const Eigen::MatrixXd& d = g.deriv;
  const int nq = n + 1;

  // u2 unknowns -> full grid values (node 0 pinned by u2(0) = 0).
  Eigen::MatrixXd inj = Eigen::MatrixXd::Zero(n + 1, n);
  inj.bottomRows(n).setIdentity();
  const Eigen::MatrixXd rdiv_r = g.div_rho * inj;  // w = u2/rho
  const Eigen::MatrixXd wprime = d * rdiv_r;

  Eigen::VectorXd gl_x, gl_w;
  gauss_legendre(n / 2 + 4, gl_x, gl_w);

  // K^2/rho^5 rows; the limit at 0 is w(0)/15.
  gen.k2_over_rho5.setZero(nq, n);
  gen.k2_over_rho5.row(0) = rdiv_r.row(0) / 15.0;
  for (int j = 1; j <= n; ++j) {
    const double r = g.nodes[j];
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n + 1);
    for (int h = 0; h < gl_x.size(); ++h) {
      const double s = 0.5 * r * (gl_x[h] + 1.0);
      row += (0.5 * r * gl_w[h] * s) * k_row_at(g, s, gl_x, gl_w);
    }
    gen.k2_over_rho5.row(j) = (row * inj) / std::pow(r, 5);
  }

  // fused/rho^4 rows: int_0^rho s^3 w'(s) ds / rho^4; limit w'(0)/4 at 0.
  Eigen::MatrixXd fused4(nq, n);
  fused4.row(0) = wprime.row(0) / 4.0;
  for (int j = 1; j <= n; ++j) {
    const double r = g.nodes[j];
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n + 1);
    for (int h = 0; h < gl_x.size(); ++h) {
      const double s = 0.5 * r * (gl_x[h] + 1.0);
      row += (0.5 * r * gl_w[h] * s * s * s) * evaluation_row(g, s);
    }
    fused4.row(j) = (row / std::pow(r, 4)) * wprime;
  }

  gen.l0.setZero(gen.dim(), gen.dim());
  gen.lprime.setZero(gen.dim(), gen.dim());

  // q-equation: dq/dtau = -2q - rho q' + fused4(u2)  [+ potential, nonlinear]
  gen.l0.topLeftCorner(nq, nq) =
      -2.0 * Eigen::MatrixXd::Identity(nq, nq) - g.nodes.asDiagonal() * d;
  gen.l0.topRightCorner(nq, n) = fused4;

  // u2-equation: du2/dtau = D^2 u1 - rho u2' - u2 with
  // D^2(rho^4 q) = 8q + 7 rho q' + rho^2 q''.
  const Eigen::MatrixXd b1 = 8.0 * Eigen::MatrixXd::Identity(nq, nq) +
                             7.0 * g.nodes.asDiagonal() * d +
                             g.nodes.cwiseAbs2().asDiagonal() * (d * d);
  gen.l0.bottomLeftCorner(n, nq) = b1.middleRows(1, n);
  gen.l0.bottomRightCorner(n, n) =
      (-(g.nodes.asDiagonal() * (d * inj)) - inj).middleRows(1, n);

  // potential: -V K^2 u2 / rho^4 = -V rho (K^2 u2 / rho^5)
  {
    Eigen::VectorXd vr(nq);
    for (int j = 0; j <= n; ++j)
      vr[j] = -profiles::potential_v(g.nodes[j]) * g.nodes[j];
    gen.lprime.topRightCorner(nq, n) = vr.asDiagonal() * gen.k2_over_rho5;
  }

  // Inner product: int |D^2 u1|^2 + |u2'|^2 with the q-regular first block.
  const Eigen::MatrixXd b2 = d * inj;
  const Eigen::MatrixXd w = g.quad.transpose().asDiagonal();
  gen.gram.setZero(gen.dim(), gen.dim());
  gen.gram.topLeftCorner(nq, nq) = b1.transpose() * w * b1;
  gen.gram.bottomRightCorner(n, n) = b2.transpose() * w * b2;
  gen.gram = 0.5 * (gen.gram + gen.gram.transpose()).eval();
  return gen;
}

std::pair<GridFunction, GridFunction> free_resolvent_at_2(
    const GridFunction& f1, const GridFunction& f2) {
  if (f1.grid.get() != f2.grid.get())
    throw ConfigError("free_resolvent_at_2: mismatched grids");
  const auto& g = *f1.grid;
  const double s1 = f1.values.cwiseAbs().maxCoeff();
  if (std::abs(f1.values[0]) > 1e-10 * (1.0 + s1) ||
      (g.n >= 2 &&
       std::abs(f1.values[1]) / std::pow(g.nodes[1], 3) > 0.05 * (1.0 + s1)))
    throw ConfigError(
        "free_resolvent_at_2: f1 must vanish fast enough at rho = 0");

  const Eigen::VectorXd kf2 = apply_K_vec(g, f2.values);
  // J(rho) = int_rho^1 (1-s)(1+s) h(s) ds with h = [f1 + s^2 K f2]/s^4,
  // evaluated by Gauss-Legendre with the vanishing factor (1-s) kept exact,
  // so that J stays relatively accurate down to its O((1-rho)^2) size and
  // the (1-rho^2)^{-2} quotient below is cancellation-free.
  Eigen::VectorXd htilde(g.n + 1);
  htilde[0] = 0.0;
  for (int j = 1; j <= g.n; ++j) {
    const double r = g.nodes[j];
    htilde[j] =
        (1.0 + r) / (r * r * r * r) * (f1.values[j] + r * r * kf2[j]);
  }
  Eigen::VectorXd gl_x, gl_w;
  gauss_legendre(g.n / 2 + 4, gl_x, gl_w);
  Eigen::VectorXd u(g.n + 1), u2(g.n + 1);
  u[0] = 0.0;
  u2[0] = 0.0;
  for (int j = 1; j < g.n; ++j) {
    const double r = g.nodes[j];
    double jval = 0.0;
    for (int h = 0; h < gl_x.size(); ++h) {
      const double s = r + 0.5 * (1.0 - r) * (gl_x[h] + 1.0);
      jval += 0.5 * (1.0 - r) * gl_w[h] * (1.0 - s) *
              interpolate_at(g, htilde, s);
    }
    const double onemr2 = 1.0 - r * r;
    u[j] = r * r * r / (onemr2 * onemr2) * jval;
    // u2 = u'/rho with J' = -(1-rho) htilde, evaluated analytically so the
    // quotient stays relatively accurate at the inner nodes
    u2[j] = r * (3.0 + r * r) * jval / (onemr2 * onemr2 * onemr2) -
            r * r * (1.0 - r) * htilde[j] / (onemr2 * onemr2);
  }
  u[g.n] = 0.25 * (f1.values[g.n] + kf2[g.n]);  // removable singularity
  {
    // extrapolate u2 to the sonic point from nodes 0..n-1 (the subgrid
    // barycentric weight of node k gains the factor rho_k - 1)
    double num = 0.0, den = 0.0;
    for (int k = 0; k < g.n; ++k) {
      const double wk =
          ((k % 2 == 0) ? 1.0 : -1.0) * ((k == 0) ? 0.5 : 1.0);
      num += -wk * u2[k];
      den += -wk;
    }
    u2[g.n] = num / den;
  }

  Eigen::VectorXd u1 = apply_K_vec(g, g.nodes.cwiseAbs2().cwiseProduct(u2)) +
                       apply_K_vec(g, u) - apply_K2_vec(g, f2.values);
  u1[0] = 0.0;
  return {GridFunction{f1.grid, u1, 3}, GridFunction{f1.grid, u2, 1}};
}

std::vector<std::complex<double>> discrete_spectrum(const GeneratorMatrix& gen,
                                                    bool with_potential) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(with_potential ? gen.full() : gen.l0,
                                         /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> out(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    out[i] = es.eigenvalues()[i];
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  return out;
}

ProjectionData build_projection(const GeneratorMatrix& gen) {
  const Eigen::MatrixXd m = gen.full();
  const auto spec = discrete_spectrum(gen, true);
  double gap = 1e30;
  int near_one = 0;
  for (const auto& ev : spec) {
    const double dist = std::abs(ev - std::complex<double>(1.0, 0.0));
    if (dist < 0.5)
      ++near_one;
    else
      gap = std::min(gap, dist);
  }
  if (near_one != 1)
    throw ConfigError(
        "build_projection: eigenvalue near 1 is not simple/separated; "
        "increase the resolution");

  ProjectionData proj;
  proj.gap = gap;
  const int n = gen.n;
  proj.right.resize(gen.dim());
  proj.right[0] = 0.0;  // g1/rho^4 = rho(5-rho^2)/(5+3rho^2)^3 vanishes at 0
  for (int j = 1; j <= n; ++j) {
    const double r = gen.grid->nodes[j];
    const auto gpair = profiles::symmetry_mode(r);
    proj.right[j] = gpair[0] / (r * r * r * r);
    proj.right[n + 1 + j - 1] = gpair[1];
  }

  // Inverse iteration on the transpose about the shifted eigenvalue.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(
      (m.transpose() -
       (1.0 + 1e-9) * Eigen::MatrixXd::Identity(gen.dim(), gen.dim())));
  Eigen::VectorXd x = proj.right;
  for (int it = 0; it < 8; ++it) {
    x = lu.solve(x);
    x /= x.norm();
  }
  const double resid = (m.transpose() * x - x).norm();
  if (resid > 1e-6 * x.norm())
    throw BreakdownError(
        "build_projection: adjoint eigenvector did not converge (residual " +
        std::to_string(resid) + ")");
  proj.left = x / x.dot(proj.right);
  return proj;
}

Eigen::MatrixXd riesz_projection_contour(const GeneratorMatrix& gen,
                                         double radius, int points) {
  const int dim = gen.dim();
  const Eigen::MatrixXcd m = gen.full().cast<std::complex<double>>();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < points; ++k) {
    const double th = 2.0 * std::numbers::pi * k / points;
    const std::complex<double> w(std::cos(th), std::sin(th));
    const std::complex<double> lam = 1.0 + radius * w;
    acc += w * (lam * id - m).partialPivLu().solve(id);
  }
  return (radius / points) * acc.real();
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

LinearTrace linear_evolve(const GeneratorMatrix& gen, Eigen::VectorXd u0,
                          double tau_max, double dtau, bool with_potential,
                          const ProjectionData* proj, int record_every) {
  const Eigen::MatrixXd m = with_potential ? gen.full() : gen.l0;
  if (dtau <= 0.0) dtau = 2.0 / spectral_radius(m);
  const int steps = int(std::ceil(tau_max / dtau));
  dtau = tau_max / steps;

  LinearTrace trace;
  trace.dtau = dtau;
  const double norm0 = gen.norm(u0);
  auto record = [&](double tau, const Eigen::VectorXd& u) {
    trace.tau.push_back(tau);
    trace.norm_total.push_back(gen.norm(u));
    trace.norm_stable.push_back(proj ? gen.norm(proj->remove(u)) : 0.0);
  };
  record(0.0, u0);
  Eigen::VectorXd k1, k2, k3, k4;
  for (int s = 1; s <= steps; ++s) {
    k1 = m * u0;
    k2 = m * (u0 + 0.5 * dtau * k1);
    k3 = m * (u0 + 0.5 * dtau * k2);
    k4 = m * (u0 + dtau * k3);
    u0 += (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double tau = s * dtau;
    if (s % record_every == 0 || s == steps) {
      record(tau, u0);
      if (!std::isfinite(trace.norm_total.back()) ||
          trace.norm_total.back() > 10.0 * norm0 * std::exp(2.0 * tau))
        throw BreakdownError(
            "linear_evolve: instability detected; reduce the step size");
    }
  }
  return trace;
}

RateFit fit_rate(const std::vector<double>& tau,
                 const std::vector<double>& norm, double window_lo,
                 double window_hi) {
  if (tau.size() != norm.size())
    throw ConfigError("fit_rate: mismatched trace lengths");
  if (!(window_hi - window_lo > 0))
    throw ConfigError("fit_rate: window must have positive length");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < window_lo || tau[i] > window_hi) continue;
    if (!(norm[i] > 0.0))
      throw ConfigError("fit_rate: nonpositive norm inside the window");
    const double x = tau[i], y = std::log(norm[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw ConfigError("fit_rate: fewer than two samples in window");
  const double det = m * sxx - sx * sx;
  RateFit fit;
  fit.slope = (m * sxy - sx * sy) / det;
  fit.intercept = (sy * sxx - sx * sxy) / det;
  double ss = 0.0;
  for (size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < window_lo || tau[i] > window_hi) continue;
    const double r = std::log(norm[i]) - (fit.intercept + fit.slope * tau[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  const double var = (m > 2) ? ss / (m - 2) : 0.0;
  fit.slope_stderr = std::sqrt(var * m / det);
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.points = m;
  return fit;
}

}  // namespace ymlab
