// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "ndg/kernels.hpp"

namespace ndg::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

std::size_t leray(double* u1, double* u2, const double* kx, const double* ky, const double* inv_ksq, std::size_t n) {
  constexpr double tol2 = kLerayTol * kLerayTol;
  const __m256d vtol2 = _mm256_set1_pd(tol2);
  std::size_t changed = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(u1 + i), b = _mm256_loadu_pd(u2 + i);
    const __m256d x = _mm256_loadu_pd(kx + i), y = _mm256_loadu_pd(ky + i);
    const __m256d dot = _mm256_fmadd_pd(x, a, _mm256_mul_pd(y, b));
    const __m256d ksq = _mm256_fmadd_pd(x, x, _mm256_mul_pd(y, y));
    const __m256d mag = _mm256_fmadd_pd(a, a, _mm256_mul_pd(b, b));
    const __m256d keep = _mm256_cmp_pd(_mm256_mul_pd(dot, dot), _mm256_mul_pd(_mm256_mul_pd(vtol2, ksq), mag), _CMP_LE_OQ);
    const int m = _mm256_movemask_pd(keep);
    if (m == 0xF) continue;
    changed += 4 - __builtin_popcount(m);
    const __m256d d = _mm256_andnot_pd(keep, _mm256_mul_pd(dot, _mm256_loadu_pd(inv_ksq + i)));
    _mm256_storeu_pd(u1 + i, _mm256_fnmadd_pd(x, d, a));
    _mm256_storeu_pd(u2 + i, _mm256_fnmadd_pd(y, d, b));
  }
  for (; i < n; ++i) {
    const double dot = std::fma(kx[i], u1[i], ky[i] * u2[i]);
    const double ksq = std::fma(kx[i], kx[i], ky[i] * ky[i]);
    const double mag = std::fma(u1[i], u1[i], u2[i] * u2[i]);
    if (dot * dot <= tol2 * ksq * mag) continue;
    const double d = dot * inv_ksq[i];
    u1[i] = std::fma(-kx[i], d, u1[i]);
    u2[i] = std::fma(-ky[i], d, u2[i]);
    ++changed;
  }
  return changed;
}

void substep(double* u, const double* f, const double* b_cur, const double* b_prev, const double* ksq,
             const SubstepParams& p, std::size_t n) {
  const double ew = (1.0 - p.theta) * p.nu * p.tau;
  const double iw = p.theta * p.nu * p.tau;
  const __m256d vew = _mm256_set1_pd(ew), viw = _mm256_set1_pd(iw), one = _mm256_set1_pd(1.0);
  const __m256d vtau = _mm256_set1_pd(p.tau), vex = _mm256_set1_pd(p.extrap);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d bc = _mm256_loadu_pd(b_cur + i);
    const __m256d e = _mm256_fmadd_pd(vex, _mm256_sub_pd(bc, _mm256_loadu_pd(b_prev + i)), bc);
    const __m256d k = _mm256_loadu_pd(ksq + i);
    const __m256d src = _mm256_mul_pd(vtau, _mm256_sub_pd(_mm256_loadu_pd(f + i), e));
    const __m256d rhs = _mm256_fmadd_pd(_mm256_fnmadd_pd(vew, k, one), _mm256_loadu_pd(u + i), src);
    _mm256_storeu_pd(u + i, _mm256_div_pd(rhs, _mm256_fmadd_pd(viw, k, one)));
  }
  for (; i < n; ++i) {
    const double e = std::fma(p.extrap, b_cur[i] - b_prev[i], b_cur[i]);
    const double rhs = std::fma(std::fma(-ew, ksq[i], 1.0), u[i], p.tau * (f[i] - e));
    u[i] = rhs / std::fma(iw, ksq[i], 1.0);
  }
}

void residual(double* out, const double* g, const double* a, const double* b, const double* mask, double alpha,
              std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  if (mask) {
    for (; i + 4 <= n; i += 4) {
      const __m256d d = _mm256_fmsub_pd(_mm256_loadu_pd(mask + i), _mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
      _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, d, _mm256_loadu_pd(g + i)));
    }
    for (; i < n; ++i) out[i] = std::fma(alpha, std::fma(mask[i], a[i], -b[i]), g[i]);
  } else {
    for (; i + 4 <= n; i += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
      _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, d, _mm256_loadu_pd(g + i)));
    }
    for (; i < n; ++i) out[i] = std::fma(alpha, a[i] - b[i], g[i]);
  }
}

double weighted_sumsq(const double* a, const double* w, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d x0 = _mm256_loadu_pd(a + i), x1 = _mm256_loadu_pd(a + i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), x0), x0, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i + 4), x1), x1, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s = std::fma(w[i] * a[i], a[i], s);
  return s;
}

double weighted_diff_sumsq(const double* a, const double* b, const double* w, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d0), d0, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i + 4), d1), d1, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s = std::fma(w[i] * d, d, s);
  }
  return s;
}

SpeedStats flux_products(const double* u1, const double* u2, double* t11, double* t12, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  __m256d vmax = _mm256_setzero_pd(), total = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(u1 + i), b = _mm256_loadu_pd(u2 + i);
    const __m256d aa = _mm256_mul_pd(a, a), bb = _mm256_mul_pd(b, b);
    _mm256_storeu_pd(t11 + i, _mm256_mul_pd(half, _mm256_sub_pd(aa, bb)));
    _mm256_storeu_pd(t12 + i, _mm256_mul_pd(a, b));
    const __m256d s = _mm256_add_pd(aa, bb);
    total = _mm256_add_pd(total, s);
    vmax = _mm256_max_pd(vmax, s);
  }
  double m = hmax(vmax), t = hsum(total);
  for (; i < n; ++i) {
    const double aa = u1[i] * u1[i], bb = u2[i] * u2[i];
    t11[i] = 0.5 * (aa - bb);
    t12[i] = u1[i] * u2[i];
    t += aa + bb;
    if (aa + bb > m) m = aa + bb;
  }
  return {m, std::isfinite(t)};
}

}  // namespace

namespace detail {
const Table avx2_table{Isa::avx2,   "avx2",          &leray, &substep, &residual, &weighted_sumsq,
                       &weighted_diff_sumsq, &flux_products};
}

}  // namespace ndg::kernels
