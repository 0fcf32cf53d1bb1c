#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ndg/kernels.hpp"

using namespace ndg::kernels;

namespace {

std::vector<double> randv(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  return m;
}

}  // namespace

TEST_CASE("kernel tables: scalar always present, names stable") {
  CHECK(available().front() == Isa::scalar);
  CHECK(name(Isa::scalar) == "scalar");
  CHECK(name(Isa::avx2) == "avx2");
  CHECK(table(Isa::scalar).isa == Isa::scalar);
}

TEST_CASE("every available kernel table agrees with the scalar reference") {
  const Table& ref = table(Isa::scalar);
  for (Isa isa : available()) {
    const Table& t = table(isa);
    CAPTURE(t.name);
    for (std::size_t n : {std::size_t(0), std::size_t(3), std::size_t(8), std::size_t(1003), std::size_t(4096)}) {
      CAPTURE(n);
      std::mt19937_64 rng(42 + n);
      const auto kx = randv(rng, n, -40, 40), ky = randv(rng, n, 0, 40);
      std::vector<double> inv(n), ksq(n);
      for (std::size_t i = 0; i < n; ++i) {
        ksq[i] = kx[i] * kx[i] + ky[i] * ky[i];
        inv[i] = 1.0 / ksq[i];
      }
      auto u1 = randv(rng, n), u2 = randv(rng, n);
      // A few lanes already divergence-free: both paths must leave them alone.
      for (std::size_t i = 0; i < n; i += 7) {
        u1[i] = -ky[i] * 0.01;
        u2[i] = kx[i] * 0.01;
      }
      auto a1 = u1, a2 = u2, b1 = u1, b2 = u2;
      const auto ca = ref.leray(a1.data(), a2.data(), kx.data(), ky.data(), inv.data(), n);
      const auto cb = t.leray(b1.data(), b2.data(), kx.data(), ky.data(), inv.data(), n);
      CHECK(ca == cb);
      CHECK(max_rel(a1, b1) < 1e-13);
      CHECK(max_rel(a2, b2) < 1e-13);

      const auto f = randv(rng, n), bc = randv(rng, n), bp = randv(rng, n);
      SubstepParams p{0.7, 1e-3, 0.5, 0.37};
      auto s1 = u1, s2 = u1;
      ref.substep(s1.data(), f.data(), bc.data(), bp.data(), ksq.data(), p, n);
      t.substep(s2.data(), f.data(), bc.data(), bp.data(), ksq.data(), p, n);
      CHECK(max_rel(s1, s2) < 1e-14);

      const auto mask = randv(rng, n, 0, 1);
      std::vector<double> r1(n), r2(n);
      for (const double* m : {mask.data(), static_cast<const double*>(nullptr)}) {
        ref.residual(r1.data(), f.data(), u1.data(), u2.data(), m, -3.5, n);
        t.residual(r2.data(), f.data(), u1.data(), u2.data(), m, -3.5, n);
        CHECK(max_rel(r1, r2) < 1e-14);
      }

      const double w1 = ref.weighted_sumsq(u1.data(), ksq.data(), n);
      const double w2 = t.weighted_sumsq(u1.data(), ksq.data(), n);
      CHECK(std::abs(w1 - w2) <= 1e-12 * std::max(1.0, w1));
      const double d1 = ref.weighted_diff_sumsq(u1.data(), u2.data(), ksq.data(), n);
      const double d2 = t.weighted_diff_sumsq(u1.data(), u2.data(), ksq.data(), n);
      CHECK(std::abs(d1 - d2) <= 1e-12 * std::max(1.0, d1));

      std::vector<double> t11a(n), t12a(n), t11b(n), t12b(n);
      const auto sa = ref.flux_products(u1.data(), u2.data(), t11a.data(), t12a.data(), n);
      const auto sb = t.flux_products(u1.data(), u2.data(), t11b.data(), t12b.data(), n);
      CHECK(sa.max_speed_sq == sb.max_speed_sq);
      CHECK(sa.finite == sb.finite);
      CHECK(max_rel(t11a, t11b) == 0.0);
      CHECK(max_rel(t12a, t12b) == 0.0);
    }
  }
}

TEST_CASE("flux_products flags non-finite input on every table") {
  for (Isa isa : available()) {
    std::vector<double> u1(13, 1.0), u2(13, 2.0), a(13), b(13);
    u2[11] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(table(isa).flux_products(u1.data(), u2.data(), a.data(), b.data(), 13).finite);
    u2[11] = 2.0;
    u1[2] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(table(isa).flux_products(u1.data(), u2.data(), a.data(), b.data(), 13).finite);
  }
}

TEST_CASE("substep solves the scalar linear theta-scheme exactly") {
  // One lane, f = b = 0: amplification (1 - (1-th) nu tau k2) / (1 + th nu tau k2).
  for (Isa isa : available()) {
    double u = 2.0, f = 0.0, b = 0.0, k2 = 5.0;
    SubstepParams p{0.3, 0.01, 0.5, 0.0};
    table(isa).substep(&u, &f, &b, &b, &k2, p, 1);
    CHECK(u == doctest::Approx(2.0 * (1 - 0.5 * 0.3 * 0.01 * 5) / (1 + 0.5 * 0.3 * 0.01 * 5)).epsilon(1e-15));
  }
}
