#include <cmath>

#include "ndg/kernels.hpp"

namespace ndg::kernels {
namespace {

std::size_t leray(double* u1, double* u2, const double* kx, const double* ky, const double* inv_ksq, std::size_t n) {
  constexpr double tol2 = kLerayTol * kLerayTol;
  std::size_t changed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dot = kx[i] * u1[i] + ky[i] * u2[i];
    const double ksq = kx[i] * kx[i] + ky[i] * ky[i];
    if (dot * dot <= tol2 * ksq * (u1[i] * u1[i] + u2[i] * u2[i])) continue;
    const double d = dot * inv_ksq[i];
    u1[i] -= kx[i] * d;
    u2[i] -= ky[i] * d;
    ++changed;
  }
  return changed;
}

void substep(double* u, const double* f, const double* b_cur, const double* b_prev, const double* ksq,
             const SubstepParams& p, std::size_t n) {
  const double explicit_w = (1.0 - p.theta) * p.nu * p.tau;
  const double implicit_w = p.theta * p.nu * p.tau;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = b_cur[i] + p.extrap * (b_cur[i] - b_prev[i]);
    const double rhs = (1.0 - explicit_w * ksq[i]) * u[i] + p.tau * (f[i] - e);
    u[i] = rhs / (1.0 + implicit_w * ksq[i]);
  }
}

void residual(double* out, const double* g, const double* a, const double* b, const double* mask, double alpha,
              std::size_t n) {
  if (mask) {
    for (std::size_t i = 0; i < n; ++i) out[i] = g[i] + alpha * (mask[i] * a[i] - b[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = g[i] + alpha * (a[i] - b[i]);
  }
}

double weighted_sumsq(const double* a, const double* w, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * a[i];
  return s;
}

double weighted_diff_sumsq(const double* a, const double* b, const double* w, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += w[i] * d * d;
  }
  return s;
}

SpeedStats flux_products(const double* u1, const double* u2, double* t11, double* t12, std::size_t n) {
  double vmax = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u1[i] * u1[i], b = u2[i] * u2[i];
    t11[i] = 0.5 * (a - b);
    t12[i] = u1[i] * u2[i];
    const double s = a + b;
    total += s;
    if (s > vmax) vmax = s;
  }
  return {vmax, std::isfinite(total)};
}

}  // namespace

namespace detail {
const Table scalar_table{Isa::scalar,   "scalar",       &leray, &substep, &residual, &weighted_sumsq,
                         &weighted_diff_sumsq, &flux_products};
}

}  // namespace ndg::kernels
