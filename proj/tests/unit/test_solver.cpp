#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ndg/errors.hpp"
#include "ndg/solver.hpp"
#include "ndg/spectral_ops.hpp"

using namespace ndg;

namespace {

SolverConfig config(int n, double dt, double nu = 1.0) {
  SolverConfig c;
  c.grid = GridSpec{n, 2 * std::numbers::pi, 2.0 / 3.0};
  c.dt = dt;
  c.nu = nu;
  return c;
}

double tg_error(double dt) {
  auto cfg = config(64, dt);
  auto g = Grid::get(cfg.grid);
  auto u0 = taylor_green(1.0, 0.0, 1.0, g);
  auto traj = integrate(u0, SpectralField(g), 0.0, 1.0, cfg, {});
  return l2_distance(traj.fields.back(), taylor_green(1.0, 1.0, 1.0, g)) / l2_norm(taylor_green(1.0, 1.0, 1.0, g));
}

}  // namespace

TEST_CASE("Taylor-Green fixture") {
  auto g = Grid::get(config(32, 1e-3).grid);
  auto tg = taylor_green(1.0, 0.0, 1.0, g);
  int nonzero = 0;
  for (int a = -15; a <= 15; ++a)
    for (int b = -15; b <= 15; ++b) {
      auto m = tg.mode(a, b);
      if (std::abs(m.first) + std::abs(m.second) > 0) ++nonzero;
    }
  CHECK(nonzero == 4);
  CHECK(divergence_residual(tg) == 0.0);
  CHECK(hermitian_residual(tg) == 0.0);
  CHECK(l2_norm(taylor_green(0.0, 0.0, 1.0, g)) == 0.0);
  CHECK(stokes_apply(tg).identical(2.0 * tg));
  auto r = norms(tg);
  CHECK(r.h1 * r.h1 == doctest::Approx(2.0 * r.l2 * r.l2).epsilon(1e-15));
  CHECK(r.l2 * r.l2 == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-15));
  CHECK_THROWS_AS(taylor_green(1.0, 0.0, 1.0, Grid::get(GridSpec{32, 3.0, 2.0 / 3.0})), InputError);
}

TEST_CASE("B(TG, TG) vanishes after projection on a fine grid") {
  auto g = Grid::get(config(128, 1e-3).grid);
  auto tg = taylor_green(1.0, 0.0, 1.0, g);
  CHECK(l2_norm(bilinear(tg, tg)) < 1e-12);
  CHECK(l2_norm(advect_self(tg)) < 1e-12);
}

TEST_CASE("grashof") {
  auto g = Grid::get(config(32, 1e-3).grid);
  CHECK(grashof(SpectralField(g), 1.0, 1.0) == 0.0);
  auto f = make_forcing(g, 1.0, 1.0, 2.0, 4.0, 5);
  CHECK(grashof(f, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  auto h = make_forcing(g, 2500.0, 1.0, 2.0, 4.0, 5);
  CHECK(grashof(h, 1.0, 1.0) == doctest::Approx(2500.0).epsilon(1e-14));
  CHECK(grashof(h, 2.0, 1.0) == doctest::Approx(625.0).epsilon(1e-14));
  CHECK(divergence_residual(h) < 1e-12);
  CHECK_THROWS_AS(grashof(h, 0.0, 1.0), InputError);
}

TEST_CASE("Taylor-Green decay: accuracy and second-order convergence") {
  const double e1 = tg_error(1e-3), e2 = tg_error(2e-3), e4 = tg_error(4e-3);
  CHECK(e1 <= 1e-6);
  CHECK(e2 / e1 == doctest::Approx(4.0).epsilon(0.25));
  CHECK(e4 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("single step on Taylor-Green and the rest state") {
  auto cfg = config(32, 1e-3);
  auto g = Grid::get(cfg.grid);
  SpectralField z(g);
  auto tg = taylor_green(0.7, 0.0, 1.0, g);
  auto next = step(tg, z, z, cfg);
  CHECK(l2_distance(next, taylor_green(0.7, cfg.dt, 1.0, g)) <= 1e-8 * l2_norm(tg));
  CHECK(l2_norm(step(z, z, z, cfg)) == 0.0);
  auto traj = integrate(z, z, 0.0, 0.1, cfg, {}, 0.01);
  for (auto& f : traj.fields) CHECK(l2_norm(f) == 0.0);
}

TEST_CASE("constant extra forcing on one eigenmode matches the linear ODE") {
  // v' = -nu lam v - beta v0, v(0) = v0, plane wave so B(v, v) = 0.
  auto cfg = config(32, 1e-3, 0.8);
  auto g = Grid::get(cfg.grid);
  SpectralField v0(g);
  v0.set_mode(1, 2, cplx(0.6, 0.2) * -2.0, cplx(0.6, 0.2) * 1.0);
  const double beta = 7.0, lam = 5.0, T = 0.0537;
  auto out = step(v0, SpectralField(g), -beta * v0, cfg);
  (void)out;
  Stepper s(cfg, v0, 0.0);
  s.advance_to(T, -beta * v0);
  const double a = cfg.nu * lam;
  const double factor = std::exp(-a * T) - beta / a * (1.0 - std::exp(-a * T));
  CHECK(l2_distance(s.state(), factor * v0) <= 1e-6 * l2_norm(v0));
  CHECK(s.time() == T);
}

TEST_CASE("checkpoints are hit exactly; samples at stride") {
  auto cfg = config(32, 1e-3);
  auto g = Grid::get(cfg.grid);
  auto u0 = random_field(g, 3, 1, 6);
  std::vector<double> cps = {0.00123, 0.0101, 0.01234567, 0.05};
  auto traj = integrate(u0, SpectralField(g), 0.0, 0.05, cfg, cps, 0.01);
  for (double c : cps) CHECK(traj.find(c) != nullptr);
  CHECK(traj.find(0.02) != nullptr);
  CHECK(traj.times.front() == 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
  CHECK_THROWS_AS(integrate(u0, SpectralField(g), 0.0, 0.05, cfg, {0.2}), InputError);
}

TEST_CASE("unforced energy is nonincreasing; runs are deterministic") {
  auto cfg = config(32, 2e-3);
  auto g = Grid::get(cfg.grid);
  auto u0 = random_field(g, 11, 1, 10);
  u0 *= 5.0 / l2_norm(u0);
  auto a = integrate(u0, SpectralField(g), 0.0, 1.0, cfg, {}, 0.002);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(l2_norm(a.fields[i]) <= l2_norm(a.fields[i - 1]));
  auto b = integrate(u0, SpectralField(g), 0.0, 1.0, cfg, {}, 0.002);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.fields[i].identical(b.fields[i]));
}

TEST_CASE("energy budget of a forced run") {
  auto cfg = config(32, 5e-4);
  auto g = Grid::get(cfg.grid);
  auto f = make_forcing(g, 5.0, 1.0, 1.0, 3.0, 2);
  auto u0 = random_field(g, 4, 1, 3);
  u0 *= 2.0 / l2_norm(u0);
  auto traj = integrate(u0, f, 0.0, 0.5, cfg, {}, cfg.dt);
  REQUIRE(traj.size() % 2 == 1);
  auto rate = [&](std::size_t i) {
    const double h1 = h1_norm(traj.fields[i]);
    return -cfg.nu * h1 * h1 + inner(f, traj.fields[i]);
  };
  double integral = 0.0;
  for (std::size_t i = 2; i < traj.size(); i += 2)
    integral += (traj.times[i] - traj.times[i - 2]) / 6.0 * (rate(i - 2) + 4.0 * rate(i - 1) + rate(i));
  auto energy = [&](std::size_t i) { return 0.5 * std::pow(l2_norm(traj.fields[i]), 2); };
  const double e0 = energy(0);
  CHECK(std::abs(energy(traj.size() - 1) - e0 - integral) <= 1e-6 * e0);
}

TEST_CASE("CFL violation and blow-up are signalled") {
  auto cfg = config(32, 0.05);
  auto g = Grid::get(cfg.grid);
  auto u0 = random_field(g, 4, 1, 5);
  u0 *= 200.0 / l2_norm(u0);
  CHECK_THROWS_AS(integrate(u0, SpectralField(g), 0.0, 0.1, cfg, {}), CflViolation);
  auto bad = random_field(g, 4, 1, 5);
  bad.c1()[3] = cplx(std::nan(""), 0.0);
  cfg.dt = 1e-3;
  CHECK_THROWS_AS(integrate(bad, SpectralField(g), 0.0, 0.01, cfg, {}), BlowUp);
}

TEST_CASE("spin-up respects the periodic attractor bound and is seed-stable") {
  auto cfg = config(64, 2e-3);
  auto g = Grid::get(cfg.grid);
  auto f = make_forcing(g, 50.0, 1.0, 2.0, 4.0, 1);
  auto a = spin_up(f, cfg, 20.0, 1, 0.01);
  auto b = spin_up(f, cfg, 20.0, 2, 0.01);
  CHECK(a.m0_emp <= 1.05 * cfg.nu * 50.0);
  CHECK(a.m0_emp > 0.0);
  CHECK(std::abs(a.m0_emp - b.m0_emp) <= 0.2 * a.m0_emp);
  auto z = spin_up(SpectralField(g), cfg, 1.0, 1);
  CHECK(z.m0_emp < 1e-10);
}
