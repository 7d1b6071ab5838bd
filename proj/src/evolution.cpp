#include "ymlab/evolution.hpp"

#include <cmath>
#include <random>

#include "ymlab/errors.hpp"
#include "ymlab/profiles.hpp"

namespace ymlab {

namespace {

double ntilde_term(double a, double rho) {
  return rho * profiles::ntilde(a, rho);
}

// Smooth random polynomial with geometrically decaying Chebyshev content.
std::function<double(double)> random_smooth(std::uint64_t seed, int terms) {
  std::mt19937_64 rng(seed);
  auto normal = [&rng]() {
    // Box-Muller on explicit uniforms keeps the stream stdlib-independent.
    const double u1 =
        (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    const double u2 =
        (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  std::vector<double> c(terms);
  for (int k = 0; k < terms; ++k) c[k] = normal() * std::pow(0.5, k);
  return [c](double r) {
    const double x = 2.0 * r / 1.5 - 1.0;
    double tkm1 = 1.0, tk = x, acc = c[0] + (c.size() > 1 ? c[1] * x : 0.0);
    for (size_t k = 2; k < c.size(); ++k) {
      const double tkp1 = 2.0 * x * tk - tkm1;
      acc += c[k] * tkp1;
      tkm1 = tk;
      tk = tkp1;
    }
    return acc;
  };
}

}  // namespace

DataPair zero_data() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }};
}

DataPair relative_selfsimilar_data(double t0) {
  if (!(t0 > 0.5 && t0 < 1.5))
    throw ConfigError("relative_selfsimilar_data: T0 must lie in (1/2, 3/2)");
  return {[t0](double r) { return profiles::relative_data_v1(r, t0); },
          [t0](double r) { return profiles::relative_data_v2(r, t0); }};
}

DataPair builtin_family(const std::string& name, double amplitude,
                        std::uint64_t seed, double param) {
  if (name == "zero") return zero_data();
  if (name == "relative") return relative_selfsimilar_data(param);
  if (name == "mode") {
    return {[amplitude](double r) {
              return amplitude * profiles::symmetry_mode(r)[0];
            },
            [amplitude](double r) {
              return amplitude * profiles::symmetry_mode(r)[1];
            }};
  }
  if (name == "gauss") {
    return {[amplitude](double r) {
              const double w = 1.5 - r;
              return amplitude * r * r * r * r * w * w *
                     std::exp(-3.0 * (r - 0.7) * (r - 0.7));
            },
            [amplitude](double r) {
              const double w = 1.5 - r;
              return amplitude * r * w * w *
                     std::exp(-3.0 * (r - 0.5) * (r - 0.5));
            }};
  }
  if (name == "random") {
    auto p1 = random_smooth(seed * 2 + 1, 11);
    auto p2 = random_smooth(seed * 2 + 2, 11);
    return {[amplitude, p1](double r) {
              const double w = 1.5 - r;
              return amplitude * r * r * r * r * w * w * p1(r);
            },
            [amplitude, p2](double r) {
              const double w = 1.5 - r;
              return amplitude * r * w * p2(r);
            }};
  }
  throw ConfigError("unknown data family: " + name);
}

DataPair spline_data(const std::vector<double>& r, const std::vector<double>& v1,
                     const std::vector<double>& v2) {
  const size_t m = r.size();
  if (m < 4 || v1.size() != m || v2.size() != m)
    throw ConfigError("spline_data: need >= 4 aligned samples");
  for (size_t i = 1; i < m; ++i)
    if (!(r[i] > r[i - 1]))
      throw ConfigError("spline_data: abscissae must be strictly increasing");

  auto make_spline = [m, r](const std::vector<double>& y) {
    // Natural cubic spline second derivatives by the standard tridiagonal
    // sweep.
    std::vector<double> m2(m, 0.0), u(m, 0.0);
    std::vector<double> diag(m, 0.0);
    for (size_t i = 1; i + 1 < m; ++i) {
      const double sig = (r[i] - r[i - 1]) / (r[i + 1] - r[i - 1]);
      const double p = sig * m2[i - 1] + 2.0;
      m2[i] = (sig - 1.0) / p;
      u[i] = (y[i + 1] - y[i]) / (r[i + 1] - r[i]) -
             (y[i] - y[i - 1]) / (r[i] - r[i - 1]);
      u[i] = (6.0 * u[i] / (r[i + 1] - r[i - 1]) - sig * u[i - 1]) / p;
    }
    for (size_t k = m - 1; k-- > 0;) m2[k] = m2[k] * m2[k + 1] + u[k];
    (void)diag;
    std::vector<double> rr = r, yy = y, mm = m2;
    return [rr, yy, mm](double x) {
      size_t lo = 0, hi = rr.size() - 1;
      while (hi - lo > 1) {
        const size_t mid = (lo + hi) / 2;
        (rr[mid] > x ? hi : lo) = mid;
      }
      const double h = rr[hi] - rr[lo];
      const double a = (rr[hi] - x) / h, b = (x - rr[lo]) / h;
      return a * yy[lo] + b * yy[hi] +
             ((a * a * a - a) * mm[lo] + (b * b * b - b) * mm[hi]) * h * h /
                 6.0;
    };
  };
  return {make_spline(v1), make_spline(v2)};
}

FieldState initial_data_U(const DataPair& v, double T,
                          std::shared_ptr<const ChebyshevGrid> grid) {
  if (!(T > 0.5 && T < 1.5))
    throw ConfigError("initial_data_U: T must lie in (1/2, 3/2)");
  const int n = grid->n;
  Eigen::VectorXd p1(n + 1), p2(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double rho = grid->nodes[j];
    const double s = T * rho;
    const double psi1_t = s * profiles::w0_prime(s);
    const double psiT_t = s * profiles::w0_prime(s / T) / (T * T);
    p1[j] = v.v1(s) / (T * T) + T * rho * rho * rho * (psi1_t - psiT_t);
    const double d2_one = profiles::d2_w0_minus_one(s);
    const double d2_T = profiles::d2_w0_minus_one(s / T) / T;
    p2[j] = T * v.v2(s) + T * (d2_one - d2_T);
  }
  p1[0] = 0.0;
  p2[0] = 0.0;
  FieldState state;
  state.tau = -std::log(T);
  state.phi1 = GridFunction{grid, std::move(p1), 3};
  state.phi2 = GridFunction{std::move(grid), std::move(p2), 1};
  return state;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> rhs_vec(
    const ChebyshevGrid& g, const Eigen::VectorXd& phi1,
    const Eigen::VectorXd& phi2) {
  Eigen::VectorXd o1, o2;
  apply_free_generator(g, phi1, phi2, o1, o2);
  o1 += apply_potential_term(g, phi2);
  const Eigen::VectorXd a = apply_A_vec(g, phi2);
  for (int j = 1; j <= g.n; ++j) o1[j] -= ntilde_term(a[j], g.nodes[j]);
  o1[0] = 0.0;
  return {std::move(o1), std::move(o2)};
}

std::pair<GridFunction, GridFunction> rhs(const FieldState& state) {
  check_parity(state.phi1);
  check_parity(state.phi2);
  auto [o1, o2] = rhs_vec(*state.phi1.grid, state.phi1.values,
                          state.phi2.values);
  return {GridFunction{state.phi1.grid, std::move(o1), 3},
          GridFunction{state.phi1.grid, std::move(o2), 1}};
}

EvolutionTrace evolve(const FieldState& u0, const EvolutionConfig& cfg,
                      const GeneratorMatrix* gen, const ProjectionData* proj) {
  const auto& g = *u0.phi1.grid;
  GeneratorMatrix local;
  if (gen == nullptr || gen->n != g.n) {
    local = assemble_generator(g.n);
    gen = &local;
  }
  const Eigen::MatrixXd m = gen->full();
  double dtau = cfg.dtau > 0.0 ? cfg.dtau : 2.0 / spectral_radius(m);
  const int steps = int(std::ceil(cfg.tau_max / dtau));
  dtau = cfg.tau_max / steps;

  const int n = g.n;
  const bool filter_on = cfg.filter_strength > 0.0;
  Eigen::MatrixXd filt_q, filt_u2;
  if (filter_on) {
    const Eigen::MatrixXd filt = spectral_filter_matrix(g, cfg.filter_strength);
    filt_q = filt;
    Eigen::MatrixXd inj = Eigen::MatrixXd::Zero(n + 1, n);
    inj.bottomRows(n).setIdentity();
    filt_u2 = (filt * inj).middleRows(1, n);
  }

  EvolutionTrace trace;
  trace.dtau = dtau;
  Eigen::VectorXd u = gen->reduce_state(u0.phi1.values, u0.phi2.values);

  // Nonlinearity in the q-lane: with B = K^2 u2 / rho^5,
  //   rho Ntilde(A u2, rho)/rho^4 = 9 W0 B^2 rho + 3 B^3 rho^3,
  // which vanishes at the origin.
  Eigen::VectorXd w0v(n + 1);
  for (int j = 0; j <= n; ++j) w0v[j] = profiles::w0(g.nodes[j]);
  auto rhs_reduced = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd out = m * y;
    const Eigen::VectorXd b = gen->k2_over_rho5 * y.tail(n);
    for (int j = 1; j <= n; ++j) {
      const double r = g.nodes[j];
      out[j] -= 9.0 * w0v[j] * b[j] * b[j] * r +
                3.0 * b[j] * b[j] * b[j] * r * r * r;
    }
    return out;
  };

  Eigen::VectorXd p1(n + 1), p2(n + 1);
  auto record = [&](double tau) -> bool {
    gen->expand_state(u, p1, p2);
    GridFunction f1{u0.phi1.grid, p1, 3}, f2{u0.phi1.grid, p2, 1};
    EvolveRecord rec;
    rec.tau = tau;
    rec.norm = pair_norm(f1, f2);
    rec.unstable_amplitude = proj ? proj->amplitude(u) : 0.0;
    const bool finite = std::isfinite(rec.norm.total);
    trace.records.push_back(rec);
    if (!finite) {
      trace.diverged = true;
      return false;
    }
    trace.last_good_tau = tau;
    if (rec.norm.total > cfg.blowup_threshold) {
      trace.blew_up = true;
      return false;
    }
    return true;
  };

  record(u0.tau);
  Eigen::VectorXd k1, k2, k3, k4;
  for (int s = 1; s <= steps; ++s) {
    k1 = rhs_reduced(u);
    k2 = rhs_reduced(u + 0.5 * dtau * k1);
    k3 = rhs_reduced(u + 0.5 * dtau * k2);
    k4 = rhs_reduced(u + dtau * k3);
    u += (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (filter_on) {
      u.head(n + 1) = (filt_q * u.head(n + 1)).eval();
      u.tail(n) = (filt_u2 * u.tail(n)).eval();
    }
    if (s % cfg.record_every == 0 || s == steps) {
      if (!record(u0.tau + s * dtau)) break;
    } else if (!u.allFinite()) {
      trace.diverged = true;
      break;
    }
  }
  gen->expand_state(u, p1, p2);
  trace.final_state = FieldState{trace.records.back().tau,
                                 GridFunction{u0.phi1.grid, p1, 3},
                                 GridFunction{u0.phi1.grid, p2, 1}};
  return trace;
}

TuningResult tune_blowup_time(const DataPair& v, const EvolutionConfig& cfg,
                              double tau_probe, double t_tol) {
  const GeneratorMatrix gen = assemble_generator(cfg.n);
  const ProjectionData proj = build_projection(gen);
  auto grid = gen.grid;

  EvolutionConfig probe_cfg = cfg;
  probe_cfg.tau_max = tau_probe;

  TuningResult result;
  result.filter_strength = cfg.filter_strength;
  result.tau_probe = tau_probe;

  auto amp = [&](double T) {
    const FieldState u0 = initial_data_U(v, T, grid);
    const EvolutionTrace tr = evolve(u0, probe_cfg, &gen, &proj);
    const double a = tr.records.back().unstable_amplitude;
    result.amplitude_trace.push_back({T, a});
    return a;
  };

  double lo = 0.65, hi = 1.35;
  double flo = amp(lo), fhi = amp(hi);
  if (flo * fhi > 0.0) {
    lo = 0.5 + 1e-6;
    hi = 1.5 - 1e-6;
    flo = amp(lo);
    fhi = amp(hi);
    if (flo * fhi > 0.0)
      throw BreakdownError(
          "tune_blowup_time: no sign change of the unstable amplitude in "
          "(1/2, 3/2); the perturbation is outside the tuning regime");
  }
  // Illinois regula falsi on the signed amplitude.
  double flo_w = flo, fhi_w = fhi;
  double t_star = 0.5 * (lo + hi);
  int side = 0;
  for (int it = 0; it < 200 && hi - lo > t_tol; ++it) {
    t_star = (lo * fhi_w - hi * flo_w) / (fhi_w - flo_w);
    if (!(t_star > lo && t_star < hi)) t_star = 0.5 * (lo + hi);
    const double f = amp(t_star);
    if (f == 0.0) {
      lo = hi = t_star;
      break;
    }
    if (f * flo_w < 0.0) {
      hi = t_star;
      fhi_w = f;
      if (side == -1) flo_w *= 0.5;
      side = -1;
    } else {
      lo = t_star;
      flo_w = f;
      if (side == 1) fhi_w *= 0.5;
      side = 1;
    }
  }
  result.t_star = 0.5 * (lo + hi);
  result.bracket_lo = lo;
  result.bracket_hi = hi;

  EvolutionConfig final_cfg = cfg;
  final_cfg.tau_max = std::max(cfg.tau_max, tau_probe + 1.0);
  const FieldState u0 = initial_data_U(v, result.t_star, grid);
  result.tuned_trace = evolve(u0, final_cfg, &gen, &proj);

  std::vector<double> taus, norms;
  const double tau0 = u0.tau;
  for (const auto& rec : result.tuned_trace.records) {
    taus.push_back(rec.tau - tau0);
    norms.push_back(rec.norm.total);
  }
  const double hi_w = std::min(cfg.fit_window_hi, taus.back());
  if (!norms.empty() && norms.front() > 0.0 &&
      *std::min_element(norms.begin(), norms.end()) > 0.0 &&
      hi_w > cfg.fit_window_lo)
    result.decay_fit = fit_rate(taus, norms, cfg.fit_window_lo, hi_w);
  return result;
}

}  // namespace ymlab
