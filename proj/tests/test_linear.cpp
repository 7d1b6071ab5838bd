#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ymlab/linear.hpp"
#include "ymlab/modestab.hpp"
#include "ymlab/profiles.hpp"

using namespace ymlab;
namespace pf = ymlab::profiles;

namespace {

Eigen::VectorXd discretize_g(const GeneratorMatrix& gen) {
  // stacked (q, u2) unknowns with q = g1/rho^4 at nodes 0..n
  Eigen::VectorXd u(gen.dim());
  u[0] = 0.0;
  for (int j = 1; j <= gen.n; ++j) {
    const double r = gen.grid->nodes[j];
    const auto g = pf::symmetry_mode(r);
    u[j] = g[0] / (r * r * r * r);
    u[gen.n + 1 + j - 1] = g[1];
  }
  return u;
}

// Random pair in the generator's domain: u1 = O(rho^4), u2 = O(rho).
Eigen::VectorXd random_admissible(const GeneratorMatrix& gen,
                                  oracle::NormalRng& rng) {
  const int terms = 10;
  std::vector<double> c1(terms), c2(terms);
  for (int k = 0; k < terms; ++k) {
    c1[k] = rng() * std::pow(0.5, k);
    c2[k] = rng() * std::pow(0.5, k);
  }
  auto cheb = [](const std::vector<double>& c, double r) {
    const double x = 2.0 * r - 1.0;
    double tkm1 = 1.0, tk = x, acc = c[0] + c[1] * x;
    for (size_t k = 2; k < c.size(); ++k) {
      const double tkp1 = 2.0 * x * tk - tkm1;
      acc += c[k] * tkp1;
      tkm1 = tk;
      tk = tkp1;
    }
    return acc;
  };
  Eigen::VectorXd u(gen.dim());
  for (int j = 0; j <= gen.n; ++j) {
    const double r = gen.grid->nodes[j];
    u[j] = cheb(c1, r);  // q-lane: u1 = rho^4 q
    if (j >= 1) u[gen.n + 1 + j - 1] = r * cheb(c2, r);
  }
  return u / gen.norm(u);
}

}  // namespace

TEST_CASE("generator fixes the discretized symmetry mode: L g = g") {
  const auto gen64 = assemble_generator(64);
  const auto gen128 = assemble_generator(128);
  auto residual = [](const GeneratorMatrix& gen) {
    const Eigen::VectorXd g = discretize_g(gen);
    return gen.norm(gen.full() * g - g) / gen.norm(g);
  };
  const double r64 = residual(gen64);
  const double r128 = residual(gen128);
  CHECK(r128 < 1e-6);
  CHECK(r128 <= r64 * 1.001);
}

TEST_CASE("constant second-component probe: [L0 u]_1 = -c rho^2/2") {
  const auto gen = assemble_generator(48);
  const auto& g = *gen.grid;
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(g.n + 1);
  Eigen::VectorXd u2 = Eigen::VectorXd::Constant(g.n + 1, 3.0);
  Eigen::VectorXd o1, o2;
  apply_free_generator(g, u1, u2, o1, o2);
  for (int j = 1; j <= g.n; ++j)
    CHECK(std::abs(o1[j] - (-1.5 * g.nodes[j] * g.nodes[j])) < 1e-10);
}

TEST_CASE("Lprime acts only from component 2 into component 1") {
  const auto gen = assemble_generator(48);
  const int n = gen.n;
  CHECK(gen.lprime.bottomRows(n).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gen.lprime.topLeftCorner(n + 1, n + 1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gen.lprime.topRightCorner(n + 1, n).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("discrete eigenvalues with Re > -1.4 converge to the shooting "
          "values {1, mu0}") {
  // Spurious-mode hygiene: eigenvalues moving by more than 0.05 between N
  // and 2N are flagged spurious and excluded; quotient directions with
  // vanishing seminorm are excluded too.
  auto clean_spectrum = [](int n) {
    const auto gen = assemble_generator(n);
    Eigen::EigenSolver<Eigen::MatrixXd> es(gen.full(), true);
    std::vector<std::complex<double>> out;
    for (int i = 0; i < gen.dim(); ++i) {
      const auto lam = es.eigenvalues()[i];
      if (lam.real() < -1.4 || std::abs(lam.imag()) > 20.0) continue;
      const Eigen::VectorXd vr = es.eigenvectors().col(i).real();
      const Eigen::VectorXd vi = es.eigenvectors().col(i).imag();
      const double seminorm = std::hypot(gen.norm(vr), gen.norm(vi));
      const double sup = std::max(vr.cwiseAbs().maxCoeff(),
                                  vi.cwiseAbs().maxCoeff());
      if (seminorm < 1e-6 * sup) continue;  // quotient direction
      out.push_back(lam);
    }
    return out;
  };
  const auto s64 = clean_spectrum(64);
  const auto s128 = clean_spectrum(128);
  std::vector<std::complex<double>> stable;
  for (const auto& a : s128) {
    for (const auto& b : s64) {
      if (std::abs(a - b) < 0.05) {
        stable.push_back(a);
        break;
      }
    }
  }
  REQUIRE(stable.size() >= 2);
  double d_one = 1e9, d_mu = 1e9;
  for (const auto& lam : stable) {
    d_one = std::min(d_one, std::abs(lam - std::complex<double>(1.0, 0.0)));
    d_mu = std::min(d_mu,
                    std::abs(lam - std::complex<double>(-0.58890482, 0.0)));
  }
  CHECK(d_one < 1e-7);
  CHECK(d_mu < 1e-5);
  for (const auto& lam : stable) {
    const bool near_known =
        std::abs(lam - std::complex<double>(1.0, 0.0)) < 1e-3 ||
        std::abs(lam - std::complex<double>(-0.58890482, 0.0)) < 1e-3;
    CHECK(near_known);
  }
}

TEST_CASE("free resolvent: zero input, forward oracle, bump residual") {
  auto grid = make_shared_grid(256, 1.0);

  {
    auto z = sample(grid, [](double) { return 0.0; }, 3);
    const auto [u1, u2] = free_resolvent_at_2(z, z);
    CHECK(u1.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(u2.values.cwiseAbs().maxCoeff() == 0.0);
  }

  {
    // w = (rho^5, rho - rho^3) gives f = (2-L0)w = (5.4 rho^5, -11rho - 6rho^3)
    auto f1 = sample(grid, [](double r) { return 5.4 * std::pow(r, 5); }, 5);
    auto f2 = sample(grid,
                     [](double r) { return -11.0 * r - 6.0 * r * r * r; }, 1);
    const auto [u1, u2] = free_resolvent_at_2(f1, f2);
    double worst = 0.0;
    for (int j = 0; j <= grid->n; ++j) {
      const double r = grid->nodes[j];
      worst = std::max(worst, std::abs(u1.values[j] - std::pow(r, 5)));
      worst = std::max(worst, std::abs(u2.values[j] - (r - r * r * r)));
    }
    CHECK(worst < 1e-8);
  }

  {
    // effectively compactly supported bump; residual of (2 - L0)u - f
    auto f1 = sample(
        grid,
        [](double r) { return std::exp(-200.0 * (r - 0.5) * (r - 0.5)); }, 3);
    auto f2 = sample(
        grid,
        [](double r) { return r * std::exp(-150.0 * (r - 0.55) * (r - 0.55)); },
        1);
    const auto [u1, u2] = free_resolvent_at_2(f1, f2);
    Eigen::VectorXd o1, o2;
    apply_free_generator(*grid, u1.values, u2.values, o1, o2);
    Eigen::VectorXd r1 = 2.0 * u1.values - o1 - f1.values;
    Eigen::VectorXd r2 = 2.0 * u2.values - o2 - f2.values;
    const double fn = std::sqrt(grid->quad.dot(f1.values.cwiseAbs2()) +
                                grid->quad.dot(f2.values.cwiseAbs2()));
    const double rn = std::sqrt(grid->quad.dot(r1.cwiseAbs2()) +
                                grid->quad.dot(r2.cwiseAbs2()));
    CHECK(rn / fn < 1e-6);
  }

  {
    auto bad = sample(grid, [](double r) { return 1.0 + r; }, 0);
    auto ok = sample(grid, [](double r) { return r; }, 1);
    CHECK_THROWS_AS(free_resolvent_at_2(bad, ok), ConfigError);
  }
}

TEST_CASE("rank-1 projection: P g = g, idempotent, commutes with L") {
  const auto gen = assemble_generator(96);
  const auto proj = build_projection(gen);
  const Eigen::VectorXd g = discretize_g(gen);
  CHECK(gen.norm(proj.apply(g) - g) / gen.norm(g) < 1e-9);

  oracle::NormalRng rng(5);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd u = random_admissible(gen, rng);
    const Eigen::VectorXd pu = proj.apply(u);
    CHECK(gen.norm(proj.apply(pu) - pu) < 1e-10 * (1.0 + gen.norm(pu)));
  }

  const Eigen::MatrixXd m = gen.full();
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd u = random_admissible(gen, rng);
    const Eigen::VectorXd a = proj.apply(m * u);
    const Eigen::VectorXd b = m * proj.apply(u);
    CHECK(gen.norm(a - b) < 1e-5 * (1.0 + gen.norm(m * u)));
  }

  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd u = random_admissible(gen, rng);
    const Eigen::VectorXd pu = proj.apply(u);
    const double c = proj.left.dot(u);
    CHECK((pu - c * proj.right).cwiseAbs().maxCoeff() <
          1e-12 + 1e-12 * std::abs(c));
  }

  {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(gen.dim());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(gen.dim());
    for (int j = 1; j <= gen.n; ++j) {
      const double r = gen.grid->nodes[j];
      a[gen.n + 1 + j - 1] = r;
      b[gen.n + 1 + j - 1] = r * r;
    }
    const double ca = proj.amplitude(a), cb = proj.amplitude(b);
    const Eigen::VectorXd combo = cb * a - ca * b;
    CHECK(std::abs(proj.amplitude(combo)) <
          1e-12 * combo.cwiseAbs().maxCoeff());
    CHECK(proj.apply(combo).cwiseAbs().maxCoeff() <
          1e-12 * combo.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("contour-integral Riesz projection agrees with the rank-1 form") {
  const auto gen = assemble_generator(48);
  const auto proj = build_projection(gen);
  const Eigen::MatrixXd pc = riesz_projection_contour(gen, 0.5, 48);
  const Eigen::MatrixXd pr = proj.right * proj.left.transpose();
  oracle::NormalRng rng(17);
  for (int t = 0; t < 8; ++t) {
    const Eigen::VectorXd u = random_admissible(gen, rng);
    CHECK(gen.norm((pc - pr) * u) < 1e-6);
  }
}

TEST_CASE("linear evolution of the symmetry mode grows like e^tau") {
  const auto gen = assemble_generator(96);
  const Eigen::VectorXd g = discretize_g(gen);
  const auto trace = linear_evolve(gen, g, 3.0, 0.0, true, nullptr, 8);
  const double g0 = gen.norm(g);
  for (size_t i = 0; i < trace.tau.size(); ++i) {
    const double expect = g0 * std::exp(trace.tau[i]);
    CHECK(std::abs(trace.norm_total[i] - expect) / expect < 1e-4);
  }
  const auto fit = fit_rate(trace.tau, trace.norm_total, 0.0, 3.0);
  CHECK(std::abs(fit.slope - 1.0) < 1e-3);
}

TEST_CASE("free evolution contracts at least like e^{-3tau/2}") {
  const auto gen = assemble_generator(64);
  oracle::NormalRng rng(29);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd u0 = random_admissible(gen, rng);
    const auto trace = linear_evolve(gen, u0, 3.0, 0.0, false, nullptr, 16);
    const double n0 = trace.norm_total.front();
    for (size_t i = 0; i < trace.tau.size(); ++i) {
      CHECK(trace.norm_total[i] <=
            n0 * std::exp(-1.5 * trace.tau[i]) * (1.0 + 1e-7));
    }
  }
}

TEST_CASE("projected linear decay fits the first stable eigenvalue (smoke)") {
  const auto gen = assemble_generator(72);
  const auto proj = build_projection(gen);
  oracle::NormalRng rng(31);
  Eigen::VectorXd u0 = proj.remove(random_admissible(gen, rng));
  const auto trace = linear_evolve(gen, u0, 8.0, 0.0, true, &proj, 16);
  const auto fit = fit_rate(trace.tau, trace.norm_stable, 2.0, 8.0);
  CHECK(std::abs(fit.slope - (-0.5889)) < 0.05);
  for (size_t i = 1; i < trace.tau.size(); ++i) {
    if (trace.tau[i - 1] < 2.0) continue;
    CHECK(trace.norm_stable[i] <= trace.norm_stable[i - 1] * (1.0 + 1e-9));
  }
}

TEST_CASE("fit_rate on exact exponentials and error paths") {
  std::vector<double> tau, up, down;
  for (int i = 0; i <= 50; ++i) {
    tau.push_back(0.1 * i);
    down.push_back(std::exp(-0.6 * 0.1 * i));
    up.push_back(std::exp(0.1 * i));
  }
  const auto f1 = fit_rate(tau, down, 0.0, 5.0);
  CHECK(std::abs(f1.slope - (-0.6)) < 1e-12);
  CHECK(f1.residual < 1e-12);
  const auto f2 = fit_rate(tau, up, 0.0, 5.0);
  CHECK(std::abs(f2.slope - 1.0) < 1e-12);

  std::vector<double> bad = down;
  bad[10] = -1.0;
  CHECK_THROWS_AS(fit_rate(tau, bad, 0.0, 5.0), ConfigError);
  CHECK_THROWS_AS(fit_rate(tau, down, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(fit_rate(tau, down, 10.0, 12.0), ConfigError);
}

TEST_CASE("higher energy of the hatted free field is conserved") {
  // free equation phi_tt = phi_rr + (2/r) phi_r - 6 phi/r^2 on [0, 1.6],
  // compactly supported data; int (phi-hat_t^2 + phi-hat_r^2) dr constant
  // while the support stays causally inside the domain.
  const int nr = 768;
  const double rmax = 1.6, dr = rmax / nr, dt = 0.25 * dr;
  Eigen::VectorXd phi(nr + 1), chi(nr + 1);
  for (int j = 0; j <= nr; ++j) {
    const double r = j * dr;
    // analytic, effectively supported in [0.3, 1.0]
    phi[j] = r * r * std::exp(-60.0 * (r - 0.65) * (r - 0.65));
    chi[j] = 0.0;
  }
  auto rhs = [&](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    out.resize(nr + 1);
    out[0] = 0.0;
    auto pv = [&](int j) { return p[std::abs(j)]; };
    for (int j = 1; j <= nr - 2; ++j) {
      const double r = j * dr;
      const double lap = (-pv(j - 2) + 16.0 * pv(j - 1) - 30.0 * p[j] +
                          16.0 * pv(j + 1) - pv(j + 2)) /
                         (12.0 * dr * dr);
      const double dp =
          (pv(j - 2) - 8.0 * pv(j - 1) + 8.0 * pv(j + 1) - pv(j + 2)) /
          (12.0 * dr);
      out[j] = lap + 2.0 / r * dp - 6.0 * p[j] / (r * r);
    }
    out[nr - 1] = out[nr] = 0.0;  // support never reaches the outer edge
  };
  auto hat_energy = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& c) {
    auto hat = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd h(nr + 1);
      h[0] = 0.0;
      auto vv = [&](int j) { return v[std::abs(j)]; };
      for (int j = 1; j <= nr - 2; ++j) {
        const double r = j * dr;
        const double d1 =
            (vv(j - 2) - 8.0 * vv(j - 1) + 8.0 * vv(j + 1) - vv(j + 2)) /
            (12.0 * dr);
        const double d2 = (-vv(j - 2) + 16.0 * vv(j - 1) - 30.0 * v[j] +
                           16.0 * vv(j + 1) - vv(j + 2)) /
                          (12.0 * dr * dr);
        h[j] = r * d2 + 5.0 * d1 + 3.0 * v[j] / r;
      }
      h[nr - 1] = h[nr] = 0.0;
      return h;
    };
    const Eigen::VectorXd hp = hat(p), hc = hat(c);
    double e = 0.0;
    for (int j = 0; j + 2 <= nr; j += 2) {
      auto hr = [&](int i) {
        if (i <= 1 || i >= nr - 1) return 0.0;
        return (hp[i - 2] - 8.0 * hp[i - 1] + 8.0 * hp[i + 1] - hp[i + 2]) /
               (12.0 * dr);
      };
      auto val = [&](int i) { return hc[i] * hc[i] + hr(i) * hr(i); };
      e += dr / 3.0 * (val(j) + 4.0 * val(j + 1) + val(j + 2));
    }
    return e;
  };

  const double e0 = hat_energy(phi, chi);
  REQUIRE(e0 > 0.0);
  Eigen::VectorXd k1, k2, k3, k4;
  const int steps = int(0.3 / dt);
  double worst = 0.0;
  for (int s = 1; s <= steps; ++s) {
    rhs(phi, k1);
    Eigen::VectorXd p2 = phi + 0.5 * dt * chi, c2 = chi + 0.5 * dt * k1;
    rhs(p2, k2);
    Eigen::VectorXd p3 = phi + 0.5 * dt * c2, c3 = chi + 0.5 * dt * k2;
    rhs(p3, k3);
    Eigen::VectorXd p4 = phi + dt * c3, c4 = chi + dt * k3;
    rhs(p4, k4);
    phi += dt / 6.0 * (chi + 2.0 * c2 + 2.0 * c3 + c4);
    chi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (s % 60 == 0) {
      const double e = hat_energy(phi, chi);
      worst = std::max(worst, std::abs(e - e0) / e0);
    }
  }
  CHECK(worst < 1e-6);
}
