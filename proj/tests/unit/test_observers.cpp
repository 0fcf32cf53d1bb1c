#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ndg/errors.hpp"
#include "ndg/fft.hpp"
#include "ndg/observers.hpp"
#include "ndg/spectral_ops.hpp"

using namespace ndg;

namespace {

GridPtr grid(int n) { return Grid::get(GridSpec{n, 2 * std::numbers::pi, 2.0 / 3.0}); }

SpectralField constant(const GridPtr& g, double a, double b) {
  SpectralField f(g);
  f.c1()[0] = a;
  f.c2()[0] = b;
  return f;
}

}  // namespace

TEST_CASE("smooth step") {
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(smooth_step(0.3) + smooth_step(0.7) == doctest::Approx(1.0).epsilon(1e-15));
  // S'(1/2) = 2 in closed form.
  CHECK(smooth_step_derivative(0.5) == doctest::Approx(2.0).epsilon(1e-14));
  const double h = 1e-6;
  for (double t : {0.1, 0.37, 0.8})
    CHECK(smooth_step_derivative(t) == doctest::Approx((smooth_step(t + h) - smooth_step(t - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("volume-average partition of unity, constants and overlap") {
  for (int cells : {8, 16, 32}) {
    auto op = ObservationOperator::volume_average(grid(128), cells);
    CHECK(op.h_eff() == doctest::Approx(std::sqrt(2.0) * 2 * std::numbers::pi / cells));
    std::vector<double> ones(std::size_t(cells) * cells, 1.0), out(128 * 128);
    op.combine(ones, out.data());
    for (double v : out) CHECK(std::abs(v - 1.0) <= 1e-12);

    auto c = constant(op.grid(), 0.7, -1.3);
    auto ic = op.apply(c);
    CHECK(l2_distance(ic, c) <= 1e-13 * l2_norm(c));

    // Supports of the 1D profiles: each meets itself and its two neighbours.
    int worst = 0;
    for (int a = 0; a < cells; ++a) {
      int meets = 0;
      for (int b = 0; b < cells; ++b) {
        bool overlap = false;
        for (int i = 0; i < 128 && !overlap; ++i) overlap = op.profile(a)[i] != 0.0 && op.profile(b)[i] != 0.0;
        meets += overlap;
      }
      worst = std::max(worst, meets);
    }
    CHECK(worst * worst <= op.overlap_bound());
  }
  CHECK_THROWS_AS(ObservationOperator::volume_average(grid(128), 24), InputError);
  CHECK_THROWS_AS(ObservationOperator::volume_average(grid(128), 16, 1.2), InputError);
}

TEST_CASE("gradient constant of the mollified profiles") {
  for (double w : {0.5, 0.8}) {
    auto op = ObservationOperator::volume_average(grid(64), 16, w);
    // In the interior of the plateau the product gradient is S'(1/2) / (2 delta) = 1 / delta.
    const double interior = 2.0 * std::sqrt(2.0) / w;
    CHECK(op.gradient_constant() >= interior * (1 - 1e-4));
    CHECK(op.gradient_constant() <= 1.5 * interior);
  }
  // Independent of the cell size.
  const double a = ObservationOperator::volume_average(grid(64), 8).gradient_constant();
  const double b = ObservationOperator::volume_average(grid(64), 32).gradient_constant();
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("observers are linear; zero maps to zero; full fourier is the identity") {
  auto g = grid(64);
  auto u = random_field(g, 1, 1, 20), v = random_field(g, 2, 1, 20);
  for (auto op : {ObservationOperator::fourier(g, 30), ObservationOperator::volume_average(g, 16)}) {
    auto lhs = op.apply(2.5 * u - 0.75 * v);
    auto rhs = 2.5 * op.apply(u) - 0.75 * op.apply(v);
    CHECK(l2_distance(lhs, rhs) <= 1e-13 * l2_norm(lhs));
    CHECK(l2_norm(op.apply(SpectralField(g))) == 0.0);
  }
  auto full = ObservationOperator::fourier(g, g->pair_count());
  CHECK(full.apply(u).identical(u));
  CHECK(full.h_eff() == 0.0);
  auto two = ObservationOperator::fourier(g, g->pairs_within(1));
  CHECK(two.modes() == 2);
  CHECK(two.h_eff() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(two.apply(u).identical(low_mode_project(u, 2)));
  ObserverSpec spec;
  spec.max_ksq = 42;
  CHECK(ObservationOperator(grid(128), spec).modes() == grid(128)->pairs_within(42));
}

TEST_CASE("interpolant constants") {
  auto g = grid(64);
  std::vector<SpectralField> corpus;
  for (std::uint64_t s = 0; s < 20; ++s) corpus.push_back(random_field(g, s, 1, 12, 1.5));
  auto f = ObservationOperator::fourier(g, g->pairs_within(20));
  CHECK(estimate_c0(f, corpus) <= 1.0);
  CHECK(estimate_c1(f, corpus) <= 1.0 + 1e-12);
  auto vol = ObservationOperator::volume_average(g, 16);
  std::vector<SpectralField> constants = {constant(g, 1.0, 0.0), constant(g, -0.5, 2.0)};
  CHECK(estimate_c0(vol, constants) == 0.0);
  CHECK(estimate_c1(vol, constants) == doctest::Approx(1.0).epsilon(1e-13));
  const double c0 = estimate_c0(vol, corpus), c1 = estimate_c1(vol, corpus);
  CHECK(std::isfinite(c0));
  CHECK(c0 > 0.0);
  CHECK(std::isfinite(c1));
  CHECK_THROWS_AS(estimate_c0(vol, {}), InputError);
}

TEST_CASE("noise: bounds, determinism, zero level") {
  auto g = grid(64);
  const double area = g->area();
  for (auto op : {ObservationOperator::volume_average(g, 16), ObservationOperator::fourier(g, 25)}) {
    CAPTURE(observer_kind_name(op.kind()));
    CHECK(l2_norm(draw_noise({0.0, 9}, 3, op)) == 0.0);
    NoiseModel m{1e-3, 42};
    CHECK(draw_noise(m, 7, op).identical(draw_noise(m, 7, op)));
    CHECK_FALSE(draw_noise(m, 7, op).identical(draw_noise(m, 8, op)));
    for (std::uint64_t n = 0; n < 200; ++n) {
      auto eta = draw_noise(m, n, op);
      CHECK(hermitian_residual(eta) == 0.0);
      if (op.kind() == ObserverKind::volume_average) {
        CHECK(l2_norm(eta) <= m.epsilon * std::sqrt(area));
      } else {
        for (std::size_t r = 0; r < op.modes(); ++r) {
          auto [k1, k2] = g->pair_wavevector(r);
          auto md = eta.mode(k1, k2);
          CHECK(std::sqrt(std::norm(md.first) + std::norm(md.second)) <= m.epsilon);
        }
      }
    }
  }
}

TEST_CASE("observation streams") {
  auto g = grid(32);
  SolverConfig cfg;
  cfg.grid = g->spec();
  auto u0 = random_field(g, 5, 1, 6);
  std::vector<double> times = {0.0, 0.005, 0.01, 0.015, 0.02};
  auto traj = integrate(u0, SpectralField(g), 0.0, 0.02, cfg, times);
  auto full = ObservationOperator::fourier(g, g->pair_count());
  auto s = observe_trajectory(traj, times, full, {0.0, 1}, 0.005);
  REQUIRE(s.size() == 5);
  for (std::size_t n = 0; n < 5; ++n) CHECK(s.fields[n].identical(*traj.find(times[n])));
  CHECK(s.max_gap() <= 0.005 * (1 + 1e-12));
  auto one = observe_trajectory(traj, {0.01}, full, {0.0, 1}, 0.001);
  CHECK(one.size() == 1);
  CHECK_THROWS_AS(observe_trajectory(traj, {0.0123}, full, {0.0, 1}, 0.1), InputError);
  CHECK_THROWS_AS(observe_trajectory(traj, times, full, {0.0, 1}, 0.004), InputError);

  auto vol = ObservationOperator::volume_average(g, 8);
  auto noisy = observe_trajectory(traj, times, vol, {1e-3, 3}, 0.005);
  CHECK(noisy.e0_measured > 0.0);
  for (auto& f : noisy.fields) CHECK(divergence_residual(f) <= 1e-12 * norms(f).h1);
  const std::string dir = "test_stream_dir";
  write_stream(dir, noisy);
  auto back = read_stream(dir);
  REQUIRE(back.size() == noisy.size());
  CHECK(back.times == noisy.times);
  CHECK(back.op.cells == 8);
  CHECK(back.e0_measured == noisy.e0_measured);
  for (std::size_t n = 0; n < back.size(); ++n) CHECK(back.fields[n].identical(noisy.fields[n]));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_stream(dir), InputError);
}
