#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "ndg/errors.hpp"
#include "ndg/fft.hpp"
#include "ndg/snapshot.hpp"
#include "ndg/spectral_ops.hpp"

using namespace ndg;

namespace {

GridPtr grid(int n, double length = 2 * std::numbers::pi) { return Grid::get(GridSpec{n, length, 2.0 / 3.0}); }

// Arbitrary real field (not divergence-free): random collocation samples.
SpectralField raw_field(const GridPtr& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> a(g->physical_size()), b(g->physical_size());
  for (auto& x : a) x = d(rng);
  for (auto& x : b) x = d(rng);
  auto f = from_physical(g, a, b);
  f.c1()[0] = f.c2()[0] = 0.0;
  return f;
}

SpectralField band_limited(const GridPtr& g, std::uint64_t seed) {
  return random_field(g, seed, 1.0, g->band_limit(), 1.0);
}

}  // namespace

TEST_CASE("grid: wavevectors, lambda1 and dealias band") {
  auto g = grid(64);
  CHECK(g->lambda1() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g->band_limit() == 21);
  CHECK(grid(128)->band_limit() == 42);
  auto h = grid(32, 3.0);
  CHECK(h->lambda1() == doctest::Approx(std::pow(2 * std::numbers::pi / 3.0, 2)));
  std::size_t s;
  bool conj;
  REQUIRE(g->lookup(-3, 5, s, conj));
  CHECK_FALSE(conj);
  CHECK(g->k1(s) == -3);
  CHECK(g->k2(s) == 5);
  REQUIRE(g->lookup(3, -5, s, conj));
  CHECK(conj);
  CHECK_THROWS_AS(GridSpec({7, 1.0, 0.5}).validate(), std::invalid_argument);
}

TEST_CASE("pair ordering: shells ascending, ties lexicographic on the canonical member") {
  auto g = grid(16);
  const std::pair<int, int> expect[] = {{0, 1}, {1, 0}, {1, -1}, {1, 1}, {0, 2}, {2, 0}};
  for (std::size_t r = 0; r < 6; ++r) CHECK(g->pair_wavevector(r) == expect[r]);
  CHECK(g->pairs_within(1) == 2);
  CHECK(g->pairs_within(2) == 4);
  CHECK(g->pairs_within(0) == 0);
  CHECK(g->pair_count() == (15 * 15 - 1) / 2);
}

TEST_CASE("fft round trip and Hermitian output") {
  auto g = grid(32);
  auto u = raw_field(g, 1);
  CHECK(hermitian_residual(u) == 0.0);
  auto p = to_physical(u);
  auto v = from_physical(g, p.u1, p.u2);
  CHECK(l2_distance(u, v) < 1e-13 * l2_norm(u));
  // Single mode check: cos(3x + 2y) in component 1 has coefficient 1/2 at (3, 2).
  std::vector<double> a(g->physical_size()), b(g->physical_size(), 0.0);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) a[i * 32 + j] = std::cos(3 * g->dx() * i + 2 * g->dx() * j);
  auto m = from_physical(g, a, b);
  CHECK(std::abs(m.mode(3, 2).first - 0.5) < 1e-15);
  CHECK(std::abs(m.mode(-3, -2).first - 0.5) < 1e-15);
}

TEST_CASE("project_leray examples") {
  auto g = grid(32);
  SUBCASE("hand-computed single mode") {
    SpectralField u(g);
    u.set_mode(1, 0, 1.0, 1.0);
    auto p = project_leray(u);
    CHECK(p.mode(1, 0).first == cplx(0.0));
    CHECK(p.mode(1, 0).second == cplx(1.0));
  }
  SUBCASE("gradient fields vanish") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    SpectralField u(g);
    for (int a = -10; a <= 10; ++a)
      for (int b = 1; b <= 10; ++b) {
        const cplx phi(d(rng), d(rng));
        u.set_mode(a, b, cplx(0, a) * phi, cplx(0, b) * phi);
      }
    const double before = l2_norm(u);
    REQUIRE(before > 0);
    CHECK(l2_norm(project_leray(u)) < 1e-14 * before);
  }
  SUBCASE("divergence-free input unchanged, projection idempotent bit-for-bit") {
    for (unsigned seed = 0; seed < 20; ++seed) {
      auto u = raw_field(g, seed);
      auto p = project_leray(u);
      CHECK(divergence_residual(p) < 1e-12 * l2_norm(u));
      CHECK(project_leray(p).identical(p));
      CHECK(hermitian_residual(p) == 0.0);
      CHECK(mean_magnitude(p) == 0.0);
    }
    auto w = band_limited(g, 9);
    CHECK(project_leray(w).identical(w));
  }
}

TEST_CASE("stokes_apply and low_mode_project") {
  auto g = grid(32);
  SpectralField z(g);
  CHECK(stokes_apply(z).identical(z));
  SpectralField one(g);
  one.set_mode(1, 1, cplx(0.3, -0.2), cplx(-0.3, 0.2));
  auto a = stokes_apply(one);
  CHECK(a.mode(1, 1).first == 2.0 * cplx(0.3, -0.2));
  CHECK(a.mode(-1, -1).second == 2.0 * std::conj(cplx(-0.3, 0.2)));

  auto u = project_leray(raw_field(g, 4));
  CHECK(low_mode_project(u, g->pair_count()).identical(u));
  CHECK(l2_norm(low_mode_project(u, 0)) == 0.0);
  for (std::size_t m : {std::size_t(1), std::size_t(7), std::size_t(60)}) {
    CHECK(stokes_apply(low_mode_project(u, m)).identical(low_mode_project(stokes_apply(u), m)));
    auto p = low_mode_project(u, m);
    CHECK(low_mode_project(p, m).identical(p));
    CHECK(hermitian_residual(p) == 0.0);
  }

  SpectralField shells(g);
  shells.set_mode(1, 0, cplx(0), cplx(1));
  shells.set_mode(0, 1, cplx(2), cplx(0));
  shells.set_mode(1, 1, cplx(1), cplx(-1));
  shells.set_mode(1, -1, cplx(1), cplx(1));
  auto kept = low_mode_project(shells, g->pairs_within(1));
  CHECK(kept.mode(1, 0).second == cplx(1));
  CHECK(kept.mode(0, 1).first == cplx(2));
  CHECK(kept.mode(1, 1).first == cplx(0));
  CHECK(kept.mode(1, -1).first == cplx(0));
}

TEST_CASE("norms: Parseval against collocation quadrature, Poincare chain") {
  for (double length : {2 * std::numbers::pi, 3.0}) {
    auto g = grid(16, length);
    const double l1 = std::sqrt(g->lambda1());
    for (unsigned seed = 0; seed < 1000; ++seed) {
      auto u = project_leray(raw_field(g, seed));
      auto r = norms(u);
      CHECK(l1 * r.l2 <= r.h1 * (1 + 1e-14));
      CHECK(l1 * r.h1 <= r.h2 * (1 + 1e-14));
      if (seed < 5) {
        auto p = to_physical(u);
        double s = 0;
        for (std::size_t i = 0; i < p.u1.size(); ++i) s += p.u1[i] * p.u1[i] + p.u2[i] * p.u2[i];
        CHECK(r.l2 * r.l2 == doctest::Approx(s * g->dx() * g->dx()).epsilon(1e-12));
      }
    }
  }
  auto g = grid(16);
  auto r0 = norms(SpectralField(g));
  CHECK(r0.l2 == 0.0);
  CHECK(r0.h1 == 0.0);
  CHECK(r0.h2 == 0.0);
}

TEST_CASE("bilinear term") {
  auto g = grid(64);
  auto u = band_limited(g, 1), v = band_limited(g, 2), w = band_limited(g, 3);
  SpectralField z(g);
  CHECK(l2_norm(bilinear(z, v)) == 0.0);
  CHECK(l2_norm(bilinear(u, z)) == 0.0);

  const double nu = h1_norm(u), nv = h1_norm(v), nw = h1_norm(w);
  CHECK(std::abs(inner(bilinear(u, v), v)) <= 1e-10 * nu * nv * nv);
  CHECK(std::abs(inner(bilinear(u, v), w) + inner(bilinear(u, w), v)) <= 1e-10 * nu * nv * nw);

  auto b = bilinear(u, v);
  CHECK(divergence_residual(b) <= 1e-12 * norms(b).h1);
  CHECK(hermitian_residual(b) == 0.0);

  // Flux form agrees with the advective form for divergence-free input.
  auto full = bilinear(u, u);
  kernels::SpeedStats st;
  auto fast = advect_self(u, &st);
  CHECK(l2_distance(full, fast) <= 1e-12 * l2_norm(full));
  CHECK(st.finite);
  auto p = to_physical(u);
  double vmax = 0;
  for (std::size_t i = 0; i < p.u1.size(); ++i) vmax = std::max(vmax, p.u1[i] * p.u1[i] + p.u2[i] * p.u2[i]);
  CHECK(st.max_speed_sq == doctest::Approx(vmax).epsilon(1e-14));

  SpectralField other(grid(32));
  CHECK_THROWS_AS(bilinear(u, other), GridMismatch);
}

TEST_CASE("bilinear matches a direct physical-space evaluation on single modes") {
  // u = (sin y, 0), v = (0, sin x): (u.grad) v = (0, sin y cos x), whose
  // divergence-free part is itself since d/dy(sin y cos x) != 0 ... project by hand.
  auto g = grid(32);
  SpectralField u(g), v(g);
  u.set_mode(0, 1, cplx(0, -0.5), 0.0);
  v.set_mode(1, 0, 0.0, cplx(0, -0.5));
  auto b = bilinear(u, v);
  // sin y cos x = (1/4i)(e^{i(x+y)} + e^{i(y-x)} - ...): coefficient at (1,1) is -i/4 before projection.
  for (auto [k1, k2] : {std::pair{1, 1}, std::pair{-1, 1}}) {
    const cplx raw(0, -0.25);
    const double kk = k1 * k1 + k2 * k2;
    const cplx e1 = -double(k1) * k2 * raw / kk, e2 = raw - double(k2) * k2 * raw / kk;
    CHECK(std::abs(b.mode(k1, k2).first - e1) < 1e-15);
    CHECK(std::abs(b.mode(k1, k2).second - e2) < 1e-15);
  }
}

TEST_CASE("random_field is divergence-free, mean-free and grid-independent") {
  auto a = random_field(grid(32), 77, 2, 4), b = random_field(grid(64), 77, 2, 4);
  CHECK(divergence_residual(a) < 1e-14);
  CHECK(a.mode(0, 0).first == cplx(0));
  CHECK(l2_norm(a) == doctest::Approx(l2_norm(b)).epsilon(1e-14));
  CHECK(a.mode(3, -2).first == b.mode(3, -2).first);
  CHECK(l2_norm(random_field(grid(32), 78, 2, 4) - a) > 0.1 * l2_norm(a));
}

TEST_CASE("NDG2 snapshot round trip") {
  auto g = grid(32, 5.0);
  auto u = project_leray(raw_field(g, 12));
  const std::string path = "test_snapshot.ndg2";
  write_snapshot(path, u);
  auto v = read_snapshot(path);
  CHECK(v.identical(u));
  CHECK(v.grid()->length() == 5.0);
  {
    std::ifstream is(path, std::ios::binary);
    char hdr[24];
    is.read(hdr, 24);
    CHECK(std::string(hdr, 4) == "NDG2");
  }
  {
    std::ofstream os(path, std::ios::binary);
    os << "NDG3xxxxxxxxxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(read_snapshot(path), InputError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_snapshot("does/not/exist.ndg2"), InputError);
}
