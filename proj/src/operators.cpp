#include "ymlab/operators.hpp"

#include <cmath>

#include "ymlab/errors.hpp"

namespace ymlab {

namespace {

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (a.grid.get() != b.grid.get())
    throw ConfigError("grid functions live on different grids");
}

void require_zero_at_origin(const GridFunction& f, const char* what) {
  const double scale = 1.0 + f.values.cwiseAbs().maxCoeff();
  if (std::abs(f.values[0]) > 1e-10 * scale)
    throw ConfigError(std::string(what) + ": value at rho = 0 must vanish");
}

void require_flat_at_origin(const GridFunction& f, const char* what) {
  require_zero_at_origin(f, what);
  const double scale = 1.0 + f.values.cwiseAbs().maxCoeff();
  const double d0 = f.grid->deriv.row(0) * f.values;
  if (std::abs(d0) > 1e-6 * scale)
    throw ConfigError(std::string(what) + ": derivative at rho = 0 must vanish");
}

}  // namespace

GridFunction sample(std::shared_ptr<const ChebyshevGrid> grid,
                    const std::function<double(double)>& f, int parity_hint) {
  GridFunction out{std::move(grid), {}, parity_hint};
  out.values.resize(out.grid->n + 1);
  for (int j = 0; j <= out.grid->n; ++j) out.values[j] = f(out.grid->nodes[j]);
  return out;
}

void check_parity(const GridFunction& f) {
  const auto& g = *f.grid;
  if (f.parity_hint <= 0) return;
  if (g.n < 4) return;
  const double scale = f.values.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  if (std::abs(f.values[0]) > 1e-10 * scale)
    throw ConfigError("parity violation: nonzero value at rho = 0");
  double r1 = std::abs(f.values[1]) / std::pow(g.nodes[1], f.parity_hint);
  double r3 = std::abs(f.values[3]) / std::pow(g.nodes[3], f.parity_hint);
  // A genuine lower leading power makes the ratio grow ~ (rho_3/rho_1)^gap.
  if (r1 > 6.0 * r3 + 1e-7 * scale / std::pow(g.nodes[1], f.parity_hint) &&
      r1 * std::pow(g.nodes[1], f.parity_hint) > 1e-9 * scale)
    throw ConfigError("parity violation: values do not vanish like rho^p");
}

Eigen::VectorXd apply_K_vec(const ChebyshevGrid& g, const Eigen::VectorXd& f) {
  return g.cumint * g.nodes.cwiseProduct(f);
}

Eigen::VectorXd apply_K2_vec(const ChebyshevGrid& g, const Eigen::VectorXd& f) {
  return apply_K_vec(g, apply_K_vec(g, f));
}

Eigen::VectorXd apply_A_vec(const ChebyshevGrid& g, const Eigen::VectorXd& f) {
  Eigen::VectorXd k2 = apply_K2_vec(g, f);
  Eigen::VectorXd out(g.n + 1);
  out[0] = 0.0;
  for (int j = 1; j <= g.n; ++j) {
    const double r = g.nodes[j];
    out[j] = k2[j] / (r * r * r);
  }
  return out;
}

GridFunction apply_K(const GridFunction& f) {
  return {f.grid, apply_K_vec(*f.grid, f.values), f.parity_hint + 2};
}

GridFunction apply_K2(const GridFunction& f) {
  return {f.grid, apply_K2_vec(*f.grid, f.values), f.parity_hint + 4};
}

GridFunction apply_A(const GridFunction& u) {
  if (u.parity_hint < 1) throw ConfigError("apply_A requires parity_hint >= 1");
  check_parity(u);
  return {u.grid, apply_A_vec(*u.grid, u.values), u.parity_hint + 1};
}

GridFunction apply_D2_weighted(const GridFunction& f) {
  if (f.parity_hint < 1)
    throw ConfigError("apply_D2_weighted requires parity_hint >= 1");
  check_parity(f);
  const auto& g = *f.grid;
  const Eigen::VectorXd fp = g.deriv * f.values;
  const Eigen::VectorXd fpp = g.deriv * fp;
  Eigen::VectorXd out = g.nodes.cwiseProduct(fpp) + 5.0 * fp +
                        3.0 * divide_by_rho(g, f.values);
  return {f.grid, std::move(out), std::max(f.parity_hint - 1, 0)};
}

GridFunction hat_transform(const GridFunction& phi) {
  require_flat_at_origin(phi, "hat_transform");
  const auto& g = *phi.grid;
  const Eigen::VectorXd w =
      g.nodes.array().cube().matrix().cwiseProduct(phi.values);
  const Eigen::VectorXd t1 = divide_by_rho(g, g.deriv * w);
  Eigen::VectorXd out = divide_by_rho(g, g.deriv * t1);
  // phi = O(rho^2) makes the output O(rho); the parity limit at 0 beats the
  // doubly-composed quotient row.
  out[0] = 0.0;
  return {phi.grid, std::move(out), std::max(phi.parity_hint - 1, 0)};
}

Eigen::MatrixXd d_sq_matrix(const ChebyshevGrid& g) {
  return g.div_rho * g.deriv * g.div_rho * g.deriv;
}

NormReport pair_norm(const GridFunction& u1, const GridFunction& u2) {
  require_same_grid(u1, u2);
  require_flat_at_origin(u1, "pair_norm(u1)");
  require_zero_at_origin(u2, "pair_norm(u2)");
  const auto& g = *u1.grid;
  const Eigen::VectorXd d2u1 =
      divide_by_rho(g, g.deriv * divide_by_rho(g, g.deriv * u1.values));
  const Eigen::VectorXd du2 = g.deriv * u2.values;
  NormReport r;
  r.norm1 = std::sqrt(std::max(0.0, g.quad.dot(d2u1.cwiseAbs2())));
  r.norm2 = std::sqrt(std::max(0.0, g.quad.dot(du2.cwiseAbs2())));
  r.total = std::hypot(r.norm1, r.norm2);
  // The pair encodes (f, g) data through u1 = rho^3(...), u2 = D^2 f, for
  // which the two integrands coincide with the E(R) ones.
  r.energy_R = r.total;
  return r;
}

double energy_norm(const GridFunction& f, const GridFunction& g, double R) {
  require_same_grid(f, g);
  const auto& gr = *f.grid;
  if (std::abs(gr.radius - R) > 1e-12 * (1.0 + R))
    throw ConfigError("energy_norm: grid radius does not match R");
  {
    const double sf = 1.0 + f.values.cwiseAbs().maxCoeff();
    const double sg = 1.0 + g.values.cwiseAbs().maxCoeff();
    const double dfp = gr.deriv.row(0) * f.values;
    if (std::abs(f.values[0]) > 1e-3 * sf || std::abs(dfp) > 1e-3 * sf ||
        std::abs(g.values[0]) > 1e-3 * sg)
      throw ConfigError("energy_norm: data violate f(0)=f'(0)=g(0)=0");
  }
  const Eigen::VectorXd fp = gr.deriv * f.values;
  const Eigen::VectorXd fpp = gr.deriv * fp;
  const Eigen::VectorXd fppp = gr.deriv * fpp;
  const Eigen::VectorXd i1 = gr.nodes.cwiseProduct(fppp) + 6.0 * fpp +
                             3.0 * divide_by_rho(gr, fp) -
                             3.0 * divide_by_rho(gr, divide_by_rho(gr, f.values));
  const Eigen::VectorXd gp = gr.deriv * g.values;
  const Eigen::VectorXd gpp = gr.deriv * gp;
  const Eigen::VectorXd i2 = gr.nodes.cwiseProduct(gpp) + 5.0 * gp +
                             3.0 * divide_by_rho(gr, g.values);
  return std::sqrt(
      std::max(0.0, gr.quad.dot(i1.cwiseAbs2()) + gr.quad.dot(i2.cwiseAbs2())));
}

std::pair<double, double> hardy_check(const GridFunction& u, double alpha) {
  if (!(alpha > 1.0)) throw ConfigError("hardy_check requires alpha > 1");
  const auto& g = *u.grid;
  Eigen::VectorXd lhs_integrand(g.n + 1), rhs_integrand(g.n + 1);
  const Eigen::VectorXd up = g.deriv * u.values;
  lhs_integrand[0] = 0.0;
  rhs_integrand[0] = (alpha < 2.0) ? 0.0
                                   : (alpha == 2.0 ? up[0] * up[0] : 0.0);
  if (alpha > 2.0 && 2 * (u.parity_hint - 1) < alpha - 2)
    throw ConfigError("hardy_check: u' does not vanish fast enough at 0");
  if (2 * u.parity_hint < alpha - 1)
    throw ConfigError("hardy_check: u does not satisfy the vanishing condition");
  for (int j = 1; j <= g.n; ++j) {
    const double r = g.nodes[j];
    lhs_integrand[j] = u.values[j] * u.values[j] / std::pow(r, alpha);
    rhs_integrand[j] = up[j] * up[j] / std::pow(r, alpha - 2.0);
  }
  const double c = 2.0 / (alpha - 1.0);
  return {g.quad.dot(lhs_integrand), c * c * g.quad.dot(rhs_integrand)};
}

}  // namespace ymlab
