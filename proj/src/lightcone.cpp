#include "ymlab/lightcone.hpp"

#include <algorithm>
#include <cmath>

#include "ymlab/errors.hpp"
#include "ymlab/grid.hpp"
#include "ymlab/operators.hpp"
#include "ymlab/profiles.hpp"

namespace ymlab {

namespace {

// Quintic local Lagrange interpolation on a uniform grid with even
// reflection across r = 0 (the sector is even in r).
double interp6(const Eigen::VectorXd& v, double dr, double r) {
  const int n = int(v.size()) - 1;
  auto value = [&](int j) { return v[std::abs(j)]; };
  int base = int(std::floor(r / dr)) - 2;
  base = std::min(base, n - 5);
  if (base < -2) base = -2;
  double out = 0.0;
  for (int a = 0; a < 6; ++a) {
    const int ja = base + a;
    double w = 1.0;
    for (int b = 0; b < 6; ++b) {
      if (a == b) continue;
      const int jb = base + b;
      w *= (r - jb * dr) / ((ja - jb) * dr);
    }
    out += w * value(ja);
  }
  return out;
}

struct PhysRhs {
  int nr;
  double dr;
  Eigen::VectorXd r2inv;  // 1/r^2 at interior nodes

  void operator()(const Eigen::VectorXd& psi, const Eigen::VectorXd& chi,
                  Eigen::VectorXd& dpsi, Eigen::VectorXd& dchi) const {
    dpsi = chi;
    dpsi[0] = 0.0;
    dchi.resize(nr + 1);
    dchi[0] = 0.0;
    auto p = [&](int j) { return psi[std::abs(j)]; };  // even ghost at r = 0
    const double h2 = dr * dr;
    for (int j = 1; j <= nr - 2; ++j) {
      const double rr = j * dr;
      const double lap =
          (-p(j - 2) + 16.0 * p(j - 1) - 30.0 * psi[j] + 16.0 * p(j + 1) -
           p(j + 2)) /
          (12.0 * h2);
      const double dpdr =
          (p(j - 2) - 8.0 * p(j - 1) + 8.0 * p(j + 1) - p(j + 2)) / (12.0 * dr);
      const double s = psi[j];
      dchi[j] = lap + 2.0 / rr * dpdr -
                r2inv[j] * (6.0 * s + 3.0 * s * s * (3.0 + s));
    }
    {
      const int j = nr - 1;
      const double rr = j * dr;
      const double lap = (psi[j - 1] - 2.0 * psi[j] + psi[j + 1]) / h2;
      const double dpdr = (psi[j + 1] - psi[j - 1]) / (2.0 * dr);
      const double s = psi[j];
      dchi[j] = lap + 2.0 / rr * dpdr -
                r2inv[j] * (6.0 * s + 3.0 * s * s * (3.0 + s));
    }
    {
      // Outgoing characteristic at r = R: chi_t = -chi_r - chi/r.
      const int j = nr;
      const double chir =
          (3.0 * chi[j] - 4.0 * chi[j - 1] + chi[j - 2]) / (2.0 * dr);
      dchi[j] = -chir - chi[j] / (j * dr);
    }
  }
};

}  // namespace

PhysTrace evolve_physical(const std::function<double(double)>& f,
                          const std::function<double(double)>& g,
                          const PhysConfig& cfg) {
  if (cfg.nr < 64) throw ConfigError("evolve_physical: nr must be >= 64");
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 0.7))
    throw ConfigError("evolve_physical: cfl must lie in (0, 0.7]");
  const int nr = cfg.nr;
  const double dr = cfg.r_max / nr;
  const double dt = cfg.cfl * dr;

  Eigen::VectorXd psi(nr + 1), chi(nr + 1);
  for (int j = 0; j <= nr; ++j) {
    psi[j] = f(j * dr);
    chi[j] = g(j * dr);
  }
  if (std::abs(psi[0]) > 1e-12 || std::abs(chi[0]) > 1e-12)
    throw ConfigError("evolve_physical: data must lie in the psi(t,0)=0 sector");
  psi[0] = chi[0] = 0.0;

  PhysRhs rhs{nr, dr, {}};
  rhs.r2inv.resize(nr + 1);
  rhs.r2inv[0] = 0.0;
  for (int j = 1; j <= nr; ++j) rhs.r2inv[j] = 1.0 / ((j * dr) * (j * dr));

  PhysTrace trace;
  trace.dr = dr;
  trace.dt = dt;
  const int steps = int(std::ceil(cfg.t_max / dt));
  trace.slices.push_back({0.0, psi, chi});
  trace.sup_t.push_back(0.0);
  trace.sup_psi_t.push_back(chi.cwiseAbs().maxCoeff());

  Eigen::VectorXd k1p, k1c, k2p, k2c, k3p, k3c, k4p, k4c, tp, tc;
  for (int s = 1; s <= steps; ++s) {
    rhs(psi, chi, k1p, k1c);
    tp = psi + 0.5 * dt * k1p;
    tc = chi + 0.5 * dt * k1c;
    rhs(tp, tc, k2p, k2c);
    tp = psi + 0.5 * dt * k2p;
    tc = chi + 0.5 * dt * k2c;
    rhs(tp, tc, k3p, k3c);
    tp = psi + dt * k3p;
    tc = chi + dt * k3c;
    rhs(tp, tc, k4p, k4c);
    psi += (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    chi += (dt / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    const double t = s * dt;
    const double sup = chi.cwiseAbs().maxCoeff();
    if (!std::isfinite(sup) || sup > cfg.breakdown_threshold) {
      trace.broke_down = true;
      trace.t_break = t;
      break;
    }
    trace.sup_t.push_back(t);
    trace.sup_psi_t.push_back(sup);
    if (s % cfg.snapshot_every == 0) trace.slices.push_back({t, psi, chi});
  }
  if (!trace.broke_down) trace.slices.push_back({steps * dt, psi, chi});
  return trace;
}

double physical_energy(const PhysState& s, double dr) {
  const int n = int(s.psi.size()) - 1;
  Eigen::VectorXd integrand(n + 1);
  auto p = [&](int j) { return s.psi[std::abs(j)]; };
  for (int j = 0; j <= n; ++j) {
    const double r = j * dr;
    double dpdr;
    if (j == 0)
      dpdr = 0.0;
    else if (j >= 2 && j <= n - 2)
      dpdr = (p(j - 2) - 8.0 * p(j - 1) + 8.0 * p(j + 1) - p(j + 2)) /
             (12.0 * dr);
    else if (j == 1)
      dpdr = (p(2) - p(0)) / (2.0 * dr);
    else if (j == n - 1)
      dpdr = (s.psi[n] - s.psi[n - 2]) / (2.0 * dr);
    else
      dpdr = (3.0 * s.psi[n] - 4.0 * s.psi[n - 1] + s.psi[n - 2]) / (2.0 * dr);
    const double w = s.psi[j] * (s.psi[j] + 2.0);
    const double pot = (j == 0) ? 0.0 : 1.5 * w * w / (r * r);
    integrand[j] = (s.psi_t[j] * s.psi_t[j] + dpdr * dpdr + pot) * r * r;
  }
  // composite Simpson (n is even for the defaults; fall back to trapezoid)
  double e = 0.0;
  if (n % 2 == 0) {
    for (int j = 0; j + 2 <= n; j += 2)
      e += dr / 3.0 * (integrand[j] + 4.0 * integrand[j + 1] + integrand[j + 2]);
  } else {
    for (int j = 0; j + 1 <= n; ++j)
      e += 0.5 * dr * (integrand[j] + integrand[j + 1]);
  }
  return e;
}

BlowupFit detect_blowup(const PhysTrace& trace, double growth_threshold) {
  const auto& tt = trace.sup_t;
  const auto& ss = trace.sup_psi_t;
  if (tt.size() < 16) throw ConfigError("detect_blowup: trace too short");
  const double smax = *std::max_element(ss.begin(), ss.end());
  if (!(smax > growth_threshold * ss.front()) && !trace.broke_down)
    throw ConfigError("detect_blowup: no blowup (bounded sup |psi_t|)");

  const size_t last = ss.size() - 1;
  // Rough blowup time from the last two samples of the 1/sup line.
  const double y1 = 1.0 / ss[last - 1], y2 = 1.0 / ss[last];
  const double slope0 = (y2 - y1) / (tt[last] - tt[last - 1]);
  if (!(slope0 < 0.0))
    throw ConfigError("detect_blowup: sup |psi_t| not growing at the end");
  double t_rough = tt[last] - y2 / slope0;

  for (int pass = 0; pass < 2; ++pass) {
    const double d_end = std::max(t_rough - tt[last], 1e-12);
    const double w_lo = d_end, w_hi = 10.0 * d_end;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    double prev = -1.0;
    double first_t = 0, last_t = 0;
    for (size_t i = 0; i < tt.size(); ++i) {
      const double d = t_rough - tt[i];
      if (d < w_lo || d > w_hi) continue;
      if (prev >= 0.0 && ss[i] < prev * (1.0 - 1e-9))
        throw ConfigError("detect_blowup: non-monotone window");
      prev = ss[i];
      if (m == 0) first_t = tt[i];
      last_t = tt[i];
      const double x = tt[i], y = 1.0 / ss[i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m < 8) throw ConfigError("detect_blowup: too few samples in window");
    const double det = m * sxx - sx * sx;
    const double b = (m * sxy - sx * sy) / det;
    const double a = (sy * sxx - sx * sxy) / det;
    const double t_fit = -a / b;
    if (pass == 1) {
      double ssq = 0.0;
      for (size_t i = 0; i < tt.size(); ++i) {
        const double d = t_rough - tt[i];
        if (d < w_lo || d > w_hi) continue;
        const double rres = 1.0 / ss[i] - (a + b * tt[i]);
        ssq += rres * rres;
      }
      const double var = ssq / std::max(1, m - 2);
      const double var_b = var * m / det;
      const double var_a = var * sxx / det;
      BlowupFit fit;
      fit.t_fit = t_fit;
      fit.ci = std::sqrt(var_a) / std::abs(b) +
               std::sqrt(var_b) * std::abs(a / (b * b));
      fit.window_lo = first_t;
      fit.window_hi = last_t;
      fit.points = m;
      return fit;
    }
    t_rough = t_fit;
  }
  throw BreakdownError("detect_blowup: unreachable");
}

BlowupReport convergence_report(const PhysTrace& trace, double t_fit) {
  BlowupReport report;
  report.t_fit = t_fit;
  const double dr = trace.dr;

  std::vector<std::pair<double, const PhysState*>> usable;  // (T-t, slice)
  for (const auto& s : trace.slices) {
    const double d = t_fit - s.t;
    if (d >= 40.0 * dr && d <= 0.45) usable.emplace_back(d, &s);
  }
  std::sort(usable.begin(), usable.end(),
            [](auto& a, auto& b) { return a.first > b.first; });
  if (usable.size() < 10 ||
      usable.front().first / usable.back().first < 10.0)
    report.low_confidence = true;
  if (usable.size() < 3)
    throw ConfigError("convergence_report: too few usable slices");

  const int m = 48;
  for (const auto& [d, s] : usable) {
    auto grid = make_shared_grid(m, d);
    Eigen::VectorXd df(m + 1), dg(m + 1);
    for (int j = 0; j <= m; ++j) {
      const double r = grid->nodes[j];
      const double rho = r / d;
      df[j] = interp6(s->psi, dr, r) - (profiles::w0(rho) - 1.0);
      dg[j] = interp6(s->psi_t, dr, r) - profiles::w0_prime(rho) * rho / d;
    }
    df[0] = 0.0;
    dg[0] = 0.0;
    const double e = energy_norm(GridFunction{grid, df, 2},
                                 GridFunction{grid, dg, 1}, d);
    report.slice_t_minus_t.push_back(d);
    report.slice_norm.push_back(std::pow(d, 1.5) * e);
  }

  {
    std::vector<double> x, y;
    for (size_t i = 0; i < report.slice_t_minus_t.size(); ++i) {
      x.push_back(std::log(report.slice_t_minus_t[i]));
      y.push_back(report.slice_norm[i]);
    }
    report.rate_fit =
        fit_rate(x, y, *std::min_element(x.begin(), x.end()) - 1e-9,
                 *std::max_element(x.begin(), x.end()) + 1e-9);
  }

  {
    const auto& [d, s] = usable.back();  // latest reliable slice
    report.profile_time = s->t;
    double sup = 0.0;
    for (int k = 0; k <= 180; ++k) {
      const double rho = 0.9 * k / 180.0;
      const double v = interp6(s->psi, dr, rho * d) + 1.0 - profiles::w0(rho);
      sup = std::max(sup, std::abs(v));
    }
    report.profile_error = sup;
  }
  return report;
}

}  // namespace ymlab
