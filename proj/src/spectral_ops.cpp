#include "ndg/spectral_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ndg/errors.hpp"
#include "ndg/fft.hpp"
#include "ndg/rng.hpp"

namespace ndg {
namespace {

struct Scratch {
  std::vector<double> p[6];
  std::vector<cplx> c[6];

  void reserve(std::size_t phys, std::size_t slots) {
    for (auto& v : p) v.resize(phys);
    for (auto& v : c) v.resize(slots);
  }
};

Scratch& scratch(const Grid& g) {
  thread_local Scratch s;
  s.reserve(g.physical_size(), g.slots());
  return s;
}

inline cplx times_i(cplx z) { return {-z.imag(), z.real()}; }

void require_grid(const SpectralField& a, const SpectralField& b, const char* what) {
  if (!a.same_grid(b)) throw GridMismatch(std::string(what) + ": fields live on different grids");
}

}  // namespace

void project_leray_inplace(SpectralField& u) {
  const Grid& g = *u.grid();
  const auto& k = kernels::active();
  for (int pass = 0; pass < 4; ++pass)
    if (k.leray(u.raw(0), u.raw(1), g.kx().data(), g.ky().data(), g.inv_ksq().data(), u.raw_size()) == 0) break;
  u.c1()[0] = 0.0;
  u.c2()[0] = 0.0;
}

SpectralField project_leray(SpectralField u) {
  project_leray_inplace(u);
  return u;
}

SpectralField stokes_apply(SpectralField u) {
  const auto& ksq = u.grid()->ksq();
  for (int c = 0; c < 2; ++c) {
    double* d = u.raw(c);
    for (std::size_t i = 0; i < u.raw_size(); ++i) d[i] *= ksq[i];
  }
  return u;
}

void truncate_to_band(SpectralField& u) {
  const auto& mask = u.grid()->band_mask();
  for (int c = 0; c < 2; ++c) {
    double* d = u.raw(c);
    for (std::size_t i = 0; i < u.raw_size(); ++i) d[i] *= mask[i];
  }
}

SpectralField bilinear(const SpectralField& u, const SpectralField& v) {
  require_grid(u, v, "bilinear");
  const Grid& g = *u.grid();
  const std::size_t slots = g.slots(), phys = g.physical_size();
  Scratch& s = scratch(g);
  Fft& fft = Fft::local(g);

  // c0, c1: u;  c2..c5: d1 v1, d2 v1, d1 v2, d2 v2.
  for (std::size_t q = 0; q < slots; ++q) {
    const double m = g.in_band(q) ? 1.0 : 0.0;
    const double kx = g.kx()[2 * q], ky = g.ky()[2 * q];
    s.c[0][q] = m * u.c1()[q];
    s.c[1][q] = m * u.c2()[q];
    const cplx iv1 = m * times_i(v.c1()[q]), iv2 = m * times_i(v.c2()[q]);
    s.c[2][q] = kx * iv1;
    s.c[3][q] = ky * iv1;
    s.c[4][q] = kx * iv2;
    s.c[5][q] = ky * iv2;
  }
  fft.inverse(s.c[0].data(), s.c[1].data(), s.p[0].data(), s.p[1].data());
  fft.inverse(s.c[2].data(), s.c[3].data(), s.p[2].data(), s.p[3].data());
  fft.inverse(s.c[4].data(), s.c[5].data(), s.p[4].data(), s.p[5].data());
  for (std::size_t x = 0; x < phys; ++x) {
    const double a = s.p[0][x], b = s.p[1][x];
    s.p[2][x] = a * s.p[2][x] + b * s.p[3][x];
    s.p[4][x] = a * s.p[4][x] + b * s.p[5][x];
  }
  SpectralField out(u.grid());
  fft.forward(s.p[2].data(), s.p[4].data(), out.c1().data(), out.c2().data());
  truncate_to_band(out);
  project_leray_inplace(out);
  return out;
}

void advect_self_into(const SpectralField& u, SpectralField& out, kernels::SpeedStats* stats) {
  const Grid& g = *u.grid();
  if (out.empty() || !out.same_grid(u)) out = SpectralField(u.grid());
  const std::size_t slots = g.slots(), phys = g.physical_size();
  Scratch& s = scratch(g);
  Fft& fft = Fft::local(g);
  const auto& mask = g.band_mask();
  for (std::size_t q = 0; q < slots; ++q) {
    s.c[0][q] = mask[2 * q] * u.c1()[q];
    s.c[1][q] = mask[2 * q] * u.c2()[q];
  }
  fft.inverse(s.c[0].data(), s.c[1].data(), s.p[0].data(), s.p[1].data());
  const kernels::SpeedStats st =
      kernels::active().flux_products(s.p[0].data(), s.p[1].data(), s.p[2].data(), s.p[3].data(), phys);
  if (stats) *stats = st;
  fft.forward(s.p[2].data(), s.p[3].data(), s.c[2].data(), s.c[3].data());
  auto& o1 = out.c1();
  auto& o2 = out.c2();
  for (std::size_t q = 0; q < slots; ++q) {
    const double m = mask[2 * q], kx = g.kx()[2 * q], ky = g.ky()[2 * q];
    const cplx t11 = s.c[2][q], t12 = s.c[3][q];
    o1[q] = m * times_i(kx * t11 + ky * t12);
    o2[q] = m * times_i(kx * t12 - ky * t11);
  }
  project_leray_inplace(out);
}

SpectralField advect_self(const SpectralField& u, kernels::SpeedStats* stats) {
  SpectralField out(u.grid());
  advect_self_into(u, out, stats);
  return out;
}

SpectralField low_mode_project(SpectralField u, std::size_t m) {
  const Grid& g = *u.grid();
  for (std::size_t q = 0; q < g.slots(); ++q) {
    if (g.pair_rank(q) < m) continue;
    u.c1()[q] = 0.0;
    u.c2()[q] = 0.0;
  }
  return u;
}

NormReport norms(const SpectralField& u) {
  const Grid& g = *u.grid();
  const auto& k = kernels::active();
  double sums[3];
  for (int p = 0; p < 3; ++p) {
    const double* w = g.weight(p).data();
    sums[p] = k.weighted_sumsq(u.raw(0), w, u.raw_size()) + k.weighted_sumsq(u.raw(1), w, u.raw_size());
  }
  return {std::sqrt(g.area() * sums[0]), std::sqrt(g.area() * sums[1]), std::sqrt(g.area() * sums[2])};
}

namespace {

double weighted(const SpectralField& u, int p) {
  const Grid& g = *u.grid();
  const auto& k = kernels::active();
  const double* w = g.weight(p).data();
  return std::sqrt(g.area() *
                   (k.weighted_sumsq(u.raw(0), w, u.raw_size()) + k.weighted_sumsq(u.raw(1), w, u.raw_size())));
}

double weighted_diff(const SpectralField& a, const SpectralField& b, int p) {
  require_grid(a, b, "distance");
  const Grid& g = *a.grid();
  const auto& k = kernels::active();
  const double* w = g.weight(p).data();
  const std::size_t n = a.raw_size();
  return std::sqrt(g.area() *
                   (k.weighted_diff_sumsq(a.raw(0), b.raw(0), w, n) + k.weighted_diff_sumsq(a.raw(1), b.raw(1), w, n)));
}

}  // namespace

double l2_norm(const SpectralField& u) { return weighted(u, 0); }
double h1_norm(const SpectralField& u) { return weighted(u, 1); }
double l2_distance(const SpectralField& a, const SpectralField& b) { return weighted_diff(a, b, 0); }
double h1_distance(const SpectralField& a, const SpectralField& b) { return weighted_diff(a, b, 1); }

double inner(const SpectralField& a, const SpectralField& b) {
  require_grid(a, b, "inner");
  const Grid& g = *a.grid();
  const auto& w = g.weight(0);
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double* x = a.raw(c);
    const double* y = b.raw(c);
    for (std::size_t i = 0; i < a.raw_size(); ++i) s += w[i] * x[i] * y[i];
  }
  return g.area() * s;
}

double divergence_residual(const SpectralField& u) {
  const Grid& g = *u.grid();
  double r = 0.0;
  for (std::size_t q = 0; q < g.slots(); ++q)
    r = std::max(r, std::abs(g.kx()[2 * q] * u.c1()[q] + g.ky()[2 * q] * u.c2()[q]));
  return r;
}

double hermitian_residual(const SpectralField& u) {
  const Grid& g = *u.grid();
  double r = std::max(std::abs(u.c1()[0].imag()), std::abs(u.c2()[0].imag()));
  for (std::size_t q = 0; q < g.slots(); ++q) {
    if (g.is_nyquist(q)) {
      r = std::max({r, std::abs(u.c1()[q]), std::abs(u.c2()[q])});
      continue;
    }
    const std::size_t p = g.column0_partner(q);
    if (p == q) continue;
    r = std::max({r, std::abs(u.c1()[q] - std::conj(u.c1()[p])), std::abs(u.c2()[q] - std::conj(u.c2()[p]))});
  }
  return r;
}

double mean_magnitude(const SpectralField& u) {
  return std::sqrt(std::norm(u.c1()[0]) + std::norm(u.c2()[0]));
}

SpectralField random_field(const GridPtr& grid, std::uint64_t seed, double kmin, double kmax, double slope) {
  SpectralField f(grid);
  const int reach = std::min(int(std::ceil(kmax)), grid->n() / 2 - 1);
  for (int a = 0; a <= reach; ++a) {
    for (int b = -reach; b <= reach; ++b) {
      if (!(a > 0 || b > 0)) continue;
      const double kk = std::sqrt(double(a * a + b * b));
      if (kk < kmin || kk > kmax) continue;
      const std::uint64_t ka = std::uint64_t(a + 4096), kb = std::uint64_t(b + 4096);
      const double amp = std::pow(kk, -slope) * (0.5 + rng::uniform(seed, ka, kb, 0));
      const double phase = 2.0 * std::numbers::pi * rng::uniform(seed, ka, kb, 1);
      const cplx c = std::polar(amp, phase);
      f.set_mode(a, b, c * (-b / kk), c * (a / kk));
    }
  }
  return f;
}

}  // namespace ndg
