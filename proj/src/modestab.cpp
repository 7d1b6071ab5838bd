#include "ymlab/modestab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <thread>

#include "ymlab/ode45.hpp"
#include "ymlab/profiles.hpp"

namespace ymlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDeg = 8;  // all ODE coefficient polynomials have degree <= 8

using Poly = std::array<Complex, kDeg + 1>;

struct OdePolys {
  Poly a, b, c;  // A u'' + B u' + C u = 0, ascending coefficients
};

Poly conv(const Poly& p, const Poly& q) {
  Poly out{};
  for (int i = 0; i <= kDeg; ++i)
    for (int j = 0; i + j <= kDeg; ++j) out[i + j] += p[i] * q[j];
  return out;
}

// Coefficients of the mode ODE multiplied by rho^2 (5+3rho^2)^2 so that
// everything is polynomial:
//   A = -(1-rho^2)(5+3rho^2)^2 rho^2
//   B = -2 rho (1-rho^2)(5+3rho^2)^2 + 2 lambda rho^3 (5+3rho^2)^2
//   C = lambda(lambda+1) rho^2 (5+3rho^2)^2 + 6(5+3rho^2)^2 - 144 rho^2(5-rho^2)
OdePolys mode_ode_polys(Complex lambda) {
  const Poly p2 = {25.0, 0.0, 30.0, 0.0, 9.0};  // (5+3rho^2)^2
  const Poly one_m_r2 = {1.0, 0.0, -1.0};
  const Poly r1 = {0.0, 1.0};
  const Poly r2 = {0.0, 0.0, 1.0};
  const Poly r3 = {0.0, 0.0, 0.0, 1.0};
  OdePolys out;
  const Poly q = conv(one_m_r2, p2);
  const Poly a0 = conv(q, r2);
  const Poly b0 = conv(q, r1);
  const Poly b1 = conv(p2, r3);
  const Poly c0 = conv(p2, r2);
  const Poly c2 = conv(Poly{5.0, 0.0, -1.0}, r2);
  const Complex mu = lambda * (lambda + 1.0);
  for (int i = 0; i <= kDeg; ++i) {
    out.a[i] = -a0[i];
    out.b[i] = -2.0 * b0[i] + 2.0 * lambda * b1[i];
    out.c[i] = mu * c0[i] + 6.0 * p2[i] - 144.0 * c2[i];
  }
  return out;
}

// p(1-x) as an ascending polynomial in x.
Poly shift_to_one(const Poly& p) {
  static const auto binom = [] {
    std::array<std::array<double, kDeg + 1>, kDeg + 1> b{};
    for (int j = 0; j <= kDeg; ++j) {
      b[j][0] = 1.0;
      for (int m = 1; m <= j; ++m)
        b[j][m] = b[j][m - 1] * double(j - m + 1) / double(m);
    }
    return b;
  }();
  Poly out{};
  for (int j = 0; j <= kDeg; ++j)
    for (int m = 0; m <= j; ++m)
      out[m] += p[j] * binom[j][m] * ((m % 2 == 0) ? 1.0 : -1.0);
  return out;
}

Complex eval_poly(const Poly& p, double x) {
  Complex v = 0.0;
  for (int i = kDeg; i >= 0; --i) v = v * x + p[i];
  return v;
}

// u = x^sig sum c_k x^k and its first two derivatives w.r.t. x.
struct SeriesEval {
  Complex u, up, upp;
};
SeriesEval eval_series(const Eigen::VectorXcd& c, int sig, double x) {
  SeriesEval out;
  if (x == 0.0) {
    auto coeff = [&](int k) {
      return (k >= 0 && k < c.size()) ? c[k] : Complex(0.0);
    };
    out.u = coeff(0 - sig);
    out.up = coeff(1 - sig);
    out.upp = 2.0 * coeff(2 - sig);
    return out;
  }
  Complex s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int k = int(c.size()) - 1; k >= 0; --k) {
    const double e = k + sig;
    s0 = s0 * x + c[k];
    s1 = s1 * x + c[k] * e;
    s2 = s2 * x + c[k] * e * (e - 1.0);
  }
  SeriesEval out2;
  out2.u = s0 * std::pow(x, sig);
  out2.up = s1 * std::pow(x, sig - 1);
  out2.upp = s2 * std::pow(x, sig - 2);
  return out2;
}

struct Rhs2 {
  Complex lambda;
  Eigen::Vector2cd operator()(double rho, const Eigen::Vector2cd& y) const {
    const Complex u = y[0], v = y[1];
    const double vr = profiles::potential_v(rho);
    const Complex upp = -2.0 / rho * v +
                        (2.0 * lambda * rho * v + lambda * (lambda + 1.0) * u +
                         (6.0 / (rho * rho) + vr) * u) /
                            (1.0 - rho * rho);
    return {v, upp};
  }
};

int degenerate_integer(Complex lambda) {
  // lambda = 1 - k with k >= 1 makes the index-0 recurrence at rho = 1 break.
  const double k = std::round(1.0 - lambda.real());
  if (k >= 1.0 && std::abs(lambda - Complex(1.0 - k, 0.0)) < 1e-9)
    return int(k);
  return 0;
}

Complex detour_lambda(Complex lambda, int* detours) {
  const double k = std::round(1.0 - lambda.real());
  if (k >= 1.0 && std::abs(lambda.real() - (1.0 - k)) < 1e-4 &&
      std::abs(lambda.imag()) < 1e-4) {
    if (detours) ++*detours;
    return {lambda.real(), lambda.imag() >= 0.0 ? 1e-4 : -1e-4};
  }
  return lambda;
}

void run_parallel(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

FrobeniusSeed frobenius_seed(Complex lambda, int endpoint, int order,
                             double step_off) {
  if (order < 10) throw ConfigError("frobenius_seed: order must be >= 10");
  if (!(step_off > 0.0 && step_off <= 0.1))
    throw ConfigError("frobenius_seed: step_off must lie in (0, 0.1]");
  if (endpoint != 0 && endpoint != 1)
    throw ConfigError("frobenius_seed: endpoint must be 0 or 1");

  OdePolys polys = mode_ode_polys(lambda);
  int sig, off;
  bool degenerate = false;
  if (endpoint == 0) {
    sig = 2;  // analytic branch of {-3, 2}
    off = 0;
  } else {
    polys.a = shift_to_one(polys.a);
    polys.b = shift_to_one(polys.b);
    for (auto& v : polys.b) v = -v;  // d/drho = -d/dx
    polys.c = shift_to_one(polys.c);
    off = -1;
    const int k = degenerate_integer(lambda);
    sig = k;  // k = 0: regular analytic branch of {0, 1-lambda}
    degenerate = (k > 0);
  }

  const int m = order;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(m + 1);
  c[0] = 1.0;
  for (int n = 1; n <= m; ++n) {
    Complex s = 0.0, den = 0.0;
    const int t = n + off;
    for (int j = 0; j <= kDeg; ++j) {
      const int k2 = t + 2 - j;
      if (k2 >= 0 && k2 <= m) {
        const Complex f = polys.a[j] * double(k2 + sig) * double(k2 + sig - 1);
        if (k2 == n)
          den += f;
        else if (k2 < n)
          s += f * c[k2];
      }
      const int k1 = t + 1 - j;
      if (k1 >= 0 && k1 <= m) {
        const Complex f = polys.b[j] * double(k1 + sig);
        if (k1 == n)
          den += f;
        else if (k1 < n)
          s += f * c[k1];
      }
      const int k0 = t - j;
      if (k0 >= 0 && k0 <= m) {
        if (k0 == n)
          den += polys.c[j];
        else if (k0 < n)
          s += polys.c[j] * c[k0];
      }
    }
    if (std::abs(den) < 1e-9 * (1.0 + std::abs(s)))
      throw BreakdownError(
          "frobenius_seed: vanishing indicial factor at order " +
          std::to_string(n) + " (degenerate lambda near " +
          std::to_string(1 - n) + ")");
    c[n] = -s / den;
  }

  FrobeniusSeed seed;
  seed.endpoint = endpoint;
  seed.index = sig;
  seed.order = m;
  seed.coeffs = std::move(c);
  seed.radius = step_off;
  seed.lambda = lambda;
  seed.degenerate_branch = degenerate;

  // Recurrence residual of the truncated series at the step-off point.
  const SeriesEval se = eval_series(seed.coeffs, sig, step_off);
  const Complex res = eval_poly(polys.a, step_off) * se.upp +
                      eval_poly(polys.b, step_off) * se.up +
                      eval_poly(polys.c, step_off) * se.u;
  const double scale = std::abs(eval_poly(polys.a, step_off) * se.upp) +
                       std::abs(eval_poly(polys.b, step_off) * se.up) +
                       std::abs(eval_poly(polys.c, step_off) * se.u);
  if (std::abs(res) > 1e-12 * (scale + 1e-300))
    throw BreakdownError("frobenius_seed: truncated series residual too large");
  return seed;
}

std::array<Complex, 2> shoot(Complex lambda, const FrobeniusSeed& seed,
                             double rho_target, const ModeStabParams& p) {
  if (!(rho_target > 0.0 && rho_target < 1.0))
    throw ConfigError("shoot: rho_target must lie strictly inside (0, 1)");
  const double delta = seed.radius;
  const SeriesEval se = eval_series(seed.coeffs, seed.index, delta);
  Eigen::Vector2cd y;
  double rho0;
  if (seed.endpoint == 0) {
    rho0 = delta;
    y << se.u, se.up;
  } else {
    rho0 = 1.0 - delta;
    y << se.u, -se.up;  // x = 1 - rho
  }
  y = ode45(Rhs2{lambda}, y, rho0, rho_target, p.ode_rtol, p.ode_atol);
  return {y[0], y[1]};
}

ConnectionValue connection(Complex lambda, double rho_m,
                           const ModeStabParams& p) {
  if (!(rho_m > 0.0 && rho_m < 1.0))
    throw ConfigError("connection: matching point must lie in (0, 1)");
  const auto seed0 = frobenius_seed(lambda, 0, p.series_order, p.step_off);
  const auto seed1 = frobenius_seed(lambda, 1, p.series_order, p.step_off);
  const auto l = shoot(lambda, seed0, rho_m, p);
  const auto r = shoot(lambda, seed1, rho_m, p);
  const Complex w = l[0] * r[1] - l[1] * r[0];
  const double scale = std::hypot(std::abs(l[0]), std::abs(l[1])) *
                       std::hypot(std::abs(r[0]), std::abs(r[1]));
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw BreakdownError("connection: degenerate solution magnitudes");
  return {lambda, w / scale, scale};
}

namespace {

double walk_phase(const Rectangle& rect, Complex a, Complex fa, Complex b,
                  Complex fb, int depth, const ModeStabParams& p,
                  int* detours) {
  const double d = std::arg(fb / fa);
  if (std::abs(d) < kPi / 2.0) return d;
  if (depth >= 26)
    throw InconclusiveError(
        "count_eigenvalues: contour refinement exhausted near lambda = (" +
        std::to_string(0.5 * (a + b).real()) + ", " +
        std::to_string(0.5 * (a + b).imag()) + "i)");
  const Complex mid = detour_lambda(0.5 * (a + b), detours);
  const Complex fm = connection(mid, p.rho_match, p).value;
  if (!std::isfinite(std::abs(fm)) || fm == 0.0)
    throw InconclusiveError("count_eigenvalues: eigenvalue on the contour");
  return walk_phase(rect, a, fa, mid, fm, depth + 1, p, detours) +
         walk_phase(rect, mid, fm, b, fb, depth + 1, p, detours);
}

}  // namespace

int count_eigenvalues(const Rectangle& rect, int n_boundary,
                      const ModeStabParams& p, int* detours) {
  if (n_boundary < 2) throw ConfigError("count_eigenvalues: n_boundary >= 2");
  if (!(rect.re_lo < rect.re_hi && rect.im_lo < rect.im_hi))
    throw ConfigError("count_eigenvalues: empty rectangle");
  std::vector<Complex> pts;
  auto side = [&](Complex from, Complex to) {
    for (int i = 0; i < n_boundary; ++i)
      pts.push_back(from + (to - from) * (double(i) / n_boundary));
  };
  const Complex bl{rect.re_lo, rect.im_lo}, br{rect.re_hi, rect.im_lo},
      tr{rect.re_hi, rect.im_hi}, tl{rect.re_lo, rect.im_hi};
  side(bl, br);
  side(br, tr);
  side(tr, tl);
  side(tl, bl);
  std::vector<Complex> vals(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    const Complex lam = detour_lambda(pts[i], detours);
    vals[i] = connection(lam, p.rho_match, p).value;
    if (!std::isfinite(std::abs(vals[i])) || vals[i] == 0.0)
      throw InconclusiveError("count_eigenvalues: eigenvalue on the contour");
  }
  double total = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const size_t j = (i + 1) % pts.size();
    total +=
        walk_phase(rect, pts[i], vals[i], pts[j], vals[j], 0, p, detours);
  }
  const long w = std::lround(total / (2.0 * kPi));
  if (std::abs(total - 2.0 * kPi * double(w)) > 0.2)
    throw InconclusiveError("count_eigenvalues: winding number not integral");
  return int(w);
}

EigenvalueRecord refine_eigenvalue(Complex lambda0, const ModeStabParams& p,
                                   int eigen_grid_n) {
  auto f = [&](Complex lam) { return connection(lam, p.rho_match, p).value; };
  Complex l0 = lambda0;
  Complex l1 = lambda0 + 1e-4 * (1.0 + std::abs(lambda0));
  Complex f0 = f(l0), f1 = f(l1);
  std::string trace;
  bool ok = false;
  for (int it = 0; it < p.max_refine_iter; ++it) {
    if (std::abs(f1 - f0) == 0.0) break;
    const Complex l2 = l1 - f1 * (l1 - l0) / (f1 - f0);
    l0 = l1;
    f0 = f1;
    l1 = l2;
    f1 = f(l1);
    trace += " " + std::to_string(l1.real());
    if (std::abs(f1) <= p.refine_tol &&
        std::abs(l1 - l0) <= 1e-11 * (1.0 + std::abs(l1))) {
      ok = true;
      break;
    }
  }
  if (!ok && std::abs(f1) > p.refine_tol)
    throw BreakdownError("refine_eigenvalue: no convergence; iterates:" +
                         trace);
  // Real-coefficient problem: collapse roundoff-level imaginary parts.
  if (std::abs(l1.imag()) < 1e-9) l1 = Complex(l1.real(), 0.0);

  EigenvalueRecord rec;
  rec.lambda = l1;

  // Multiplicity from the argument principle on a small box.
  {
    const double r = 0.02;
    Rectangle box{l1.real() - r, l1.real() + r, l1.imag() - r, l1.imag() + r};
    try {
      rec.multiplicity = count_eigenvalues(box, 12, p);
    } catch (const InconclusiveError&) {
      rec.multiplicity = 1;
    }
  }

  // Glue the two shot solutions on a collocation grid over [0, 1].
  const auto seed0 = frobenius_seed(l1, 0, p.series_order, p.step_off);
  const auto seed1 = frobenius_seed(l1, 1, p.series_order, p.step_off);
  const auto lm = shoot(l1, seed0, p.rho_match, p);
  const auto rm = shoot(l1, seed1, p.rho_match, p);
  const Complex match_scale = lm[0] / rm[0];

  auto grid = make_shared_grid(eigen_grid_n, 1.0);
  auto sample_on = [&](const Eigen::VectorXd& xs) {
    Eigen::VectorXcd out(xs.size());
    const double delta = p.step_off;
    std::vector<double> left_targets, right_targets;
    std::vector<Eigen::Index> left_idx, right_idx;
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      if (x <= delta) {
        out[i] = eval_series(seed0.coeffs, seed0.index, x).u;
      } else if (x >= 1.0 - delta) {
        out[i] = match_scale *
                 eval_series(seed1.coeffs, seed1.index, 1.0 - x).u;
      } else if (x <= p.rho_match) {
        left_targets.push_back(x);
        left_idx.push_back(i);
      } else {
        right_targets.push_back(x);
        right_idx.push_back(i);
      }
    }
    {
      const SeriesEval se = eval_series(seed0.coeffs, seed0.index, delta);
      Eigen::Vector2cd y;
      y << se.u, se.up;
      size_t k = 0;
      ode45_targets(Rhs2{l1}, y, delta, std::span<const double>(left_targets),
                    p.ode_rtol, p.ode_atol,
                    [&](double, const Eigen::Vector2cd& yy) {
                      out[left_idx[k++]] = yy[0];
                    });
    }
    {
      const SeriesEval se = eval_series(seed1.coeffs, seed1.index, delta);
      Eigen::Vector2cd y;
      y << se.u, -se.up;
      std::sort(right_targets.rbegin(), right_targets.rend());
      std::sort(right_idx.rbegin(), right_idx.rend());
      size_t k = 0;
      ode45_targets(Rhs2{l1}, y, 1.0 - delta,
                    std::span<const double>(right_targets), p.ode_rtol,
                    p.ode_atol, [&](double, const Eigen::Vector2cd& yy) {
                      out[right_idx[k++]] = match_scale * yy[0];
                    });
    }
    return out;
  };

  Eigen::VectorXcd vals = sample_on(grid->nodes);
  Eigen::Index imax = 0;
  vals.cwiseAbs().maxCoeff(&imax);
  const Complex norm = vals[imax];
  vals /= norm;
  rec.eigenfunction = GridFunction{grid, vals.real(), 2};

  // Interior ODE residual from a uniform sample and 4th-order stencils.
  {
    const int m = 1000;
    Eigen::VectorXd xs(m + 1);
    for (int i = 0; i <= m; ++i) xs[i] = double(i) / m;
    Eigen::VectorXcd u = sample_on(xs) / norm;
    const double h = 1.0 / m;
    double sup = 0.0;
    for (int i = 2; i <= m - 2; ++i) {
      const double x = xs[i];
      if (x < 0.02 || x > 0.98) continue;
      const Complex up =
          (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
      const Complex upp = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] +
                           16.0 * u[i - 1] - u[i - 2]) /
                          (12.0 * h * h);
      const Complex res =
          -(1.0 - x * x) * (upp + 2.0 / x * up) + 2.0 * l1 * x * up +
          l1 * (l1 + 1.0) * u[i] +
          (6.0 / (x * x) + profiles::potential_v(x)) * u[i];
      sup = std::max(sup, std::abs(res));
    }
    rec.residual = sup;
  }
  return rec;
}

SpectrumResult spectrum_scan(const Rectangle& rect, double cell_size,
                             const ModeStabParams& p, int jobs) {
  if (rect.re_lo <= -1.5)
    throw ConfigError(
        "spectrum_scan: the ODE reduction requires Re lambda > -3/2");
  if (!(cell_size > 0)) throw ConfigError("spectrum_scan: cell_size > 0");

  const int nx = std::max(1, int(std::ceil((rect.re_hi - rect.re_lo) / cell_size)));
  const int ny = std::max(1, int(std::ceil((rect.im_hi - rect.im_lo) / cell_size)));
  const double dx = (rect.re_hi - rect.re_lo) / nx;
  const double dy = (rect.im_hi - rect.im_lo) / ny;

  SpectrumResult result;
  std::atomic<int> detours{0};

  struct CellOut {
    Rectangle box;
    int count = 0;
    bool inconclusive = false;
  };
  std::vector<CellOut> cells(size_t(nx) * ny);

  auto robust_count = [&](Rectangle box) -> std::pair<int, bool> {
    static constexpr double jitter[] = {0.0, 0.013, -0.027, 0.041};
    for (double jit : jitter) {
      Rectangle b = box;
      const double ex = jit * (box.re_hi - box.re_lo);
      const double ey = jit * (box.im_hi - box.im_lo);
      b.re_lo -= ex;
      b.re_hi += ex;
      b.im_lo -= ey;
      b.im_hi += ey;
      try {
        int local_detours = 0;
        const int c = count_eigenvalues(b, 6, p, &local_detours);
        detours += local_detours;
        return {c, false};
      } catch (const InconclusiveError&) {
        continue;
      }
    }
    return {0, true};
  };

  run_parallel(int(cells.size()), jobs, [&](int i) {
    const int ix = i % nx, iy = i / nx;
    Rectangle box{rect.re_lo + ix * dx, rect.re_lo + (ix + 1) * dx,
                  rect.im_lo + iy * dy, rect.im_lo + (iy + 1) * dy};
    auto [count, bad] = robust_count(box);
    cells[i] = {box, count, bad};
  });

  // Bisect populated cells until small, then refine from the centers.
  std::vector<std::pair<Rectangle, int>> work;
  for (const auto& c : cells) {
    if (c.inconclusive) result.inconclusive.push_back(c.box);
    else if (c.count > 0) work.emplace_back(c.box, c.count);
  }
  std::vector<std::pair<Complex, int>> candidates;
  while (!work.empty()) {
    auto [box, count] = work.back();
    work.pop_back();
    const double w = box.re_hi - box.re_lo, h = box.im_hi - box.im_lo;
    if (std::hypot(w, h) < 0.05) {
      candidates.emplace_back(
          Complex(0.5 * (box.re_lo + box.re_hi), 0.5 * (box.im_lo + box.im_hi)),
          count);
      continue;
    }
    Rectangle lohalf = box, hihalf = box;
    if (w >= h) {
      const double mid = 0.5 * (box.re_lo + box.re_hi);
      lohalf.re_hi = mid;
      hihalf.re_lo = mid;
    } else {
      const double mid = 0.5 * (box.im_lo + box.im_hi);
      lohalf.im_hi = mid;
      hihalf.im_lo = mid;
    }
    for (const Rectangle& half : {lohalf, hihalf}) {
      auto [c, bad] = robust_count(half);
      if (bad) result.inconclusive.push_back(half);
      else if (c > 0) work.emplace_back(half, c);
    }
  }

  for (const auto& [center, count] : candidates) {
    try {
      EigenvalueRecord rec = refine_eigenvalue(center, p);
      rec.multiplicity = std::max(rec.multiplicity, count);
      const bool dup = std::any_of(
          result.eigenvalues.begin(), result.eigenvalues.end(),
          [&](const EigenvalueRecord& r) {
            return std::abs(r.lambda - rec.lambda) < 1e-6;
          });
      if (!dup && rec.lambda.real() > rect.re_lo - 0.05 &&
          rec.lambda.real() < rect.re_hi + 0.05)
        result.eigenvalues.push_back(std::move(rec));
    } catch (const BreakdownError&) {
      const double r = 0.03;
      result.inconclusive.push_back(Rectangle{center.real() - r,
                                              center.real() + r,
                                              center.imag() - r,
                                              center.imag() + r});
    }
  }

  std::sort(result.eigenvalues.begin(), result.eigenvalues.end(),
            [](const EigenvalueRecord& a, const EigenvalueRecord& b) {
              if (a.lambda.real() != b.lambda.real())
                return a.lambda.real() < b.lambda.real();
              return a.lambda.imag() < b.lambda.imag();
            });
  for (const auto& rec : result.eigenvalues) {
    if (std::abs(rec.lambda - Complex(1.0, 0.0)) < 1e-6) continue;
    if (!result.stable_bound_valid ||
        rec.lambda.real() > result.stable_bound) {
      result.stable_bound = rec.lambda.real();
      result.stable_bound_valid = true;
    }
  }
  result.detours = detours.load();
  return result;
}

Eigen::MatrixXd connection_heatmap(const Rectangle& rect, int nre, int nim,
                                   const ModeStabParams& p, int jobs) {
  Eigen::MatrixXd out(nim, nre);
  run_parallel(nre * nim, jobs, [&](int idx) {
    const int i = idx / nre, j = idx % nre;
    const double re =
        rect.re_lo + (rect.re_hi - rect.re_lo) * (nre == 1 ? 0.5 : double(j) / (nre - 1));
    const double im =
        rect.im_lo + (rect.im_hi - rect.im_lo) * (nim == 1 ? 0.5 : double(i) / (nim - 1));
    int detours = 0;
    const Complex lam = detour_lambda(Complex(re, im), &detours);
    out(i, j) = std::abs(connection(lam, p.rho_match, p).value);
  });
  return out;
}

double connection_floor(const Rectangle& rect, int nre, int nim,
                        const ModeStabParams& p, int jobs) {
  return connection_heatmap(rect, nre, nim, p, jobs).minCoeff();
}

}  // namespace ymlab
