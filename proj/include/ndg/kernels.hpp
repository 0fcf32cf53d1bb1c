#pragma once

// Data-parallel inner loops of the spectral solver.
//
// Every kernel exists as a scalar reference and as an AVX2/FMA variant; the
// active table is chosen once at startup from the CPU features (override with
// NDG_SIMD=scalar|avx2). Coefficient arrays are interleaved (re, im) doubles
// and per-mode real factors are passed "duplicated" so that all kernels are
// plain element-wise loops over `n` doubles.

#include <cstddef>
#include <string_view>
#include <vector>

namespace ndg::kernels {

enum class Isa { scalar, avx2 };

inline constexpr double kLerayTol = 1e-12;

struct SpeedStats {
  double max_speed_sq = 0.0;
  bool finite = true;
};

/// Parameters of one theta-scheme substep of length tau.
///   u <- ((1 - (1-theta) nu tau k^2) u + tau (f - E)) / (1 + theta nu tau k^2)
///   E  = b_cur + extrap * (b_cur - b_prev)
struct SubstepParams {
  double nu = 0.0;
  double tau = 0.0;
  double theta = 0.5;
  double extrap = 0.0;
};

struct Table {
  Isa isa;
  const char* name;

  /// Leray projection u <- u - k (k.u) / |k|^2 on each real lane, skipping
  /// lanes already divergence-free to kLerayTol relative. Returns the number
  /// of lanes changed.
  std::size_t (*leray)(double* u1, double* u2, const double* kx, const double* ky, const double* inv_ksq, std::size_t n);

  /// Theta-scheme substep for one component (see SubstepParams).
  void (*substep)(double* u, const double* f, const double* b_cur, const double* b_prev, const double* ksq,
                  const SubstepParams& p, std::size_t n);

  /// out = g + alpha * (mask * a - b); mask may be null (treated as 1).
  void (*residual)(double* out, const double* g, const double* a, const double* b, const double* mask, double alpha,
                   std::size_t n);

  /// sum_i w_i * a_i^2
  double (*weighted_sumsq)(const double* a, const double* w, std::size_t n);

  /// sum_i w_i * (a_i - b_i)^2
  double (*weighted_diff_sumsq)(const double* a, const double* b, const double* w, std::size_t n);

  /// Traceless momentum-flux products on the collocation grid:
  ///   t11 = (u1^2 - u2^2) / 2,  t12 = u1 * u2
  /// and the maximum of u1^2 + u2^2 (non-finite input is reported).
  SpeedStats (*flux_products)(const double* u1, const double* u2, double* t11, double* t12, std::size_t n);
};

/// Kernel table in use (CPU-dispatched, honours NDG_SIMD).
const Table& active();

/// Table for a specific instruction set; throws if unsupported here.
const Table& table(Isa isa);

/// Instruction sets usable on this CPU (scalar first).
std::vector<Isa> available();

/// Override the active table (tests, benchmarks). Not thread-safe.
void select(Isa isa);

std::string_view name(Isa isa);

namespace detail {
extern const Table scalar_table;
#if defined(NDG_HAVE_AVX2)
extern const Table avx2_table;
#endif
}  // namespace detail

}  // namespace ndg::kernels
