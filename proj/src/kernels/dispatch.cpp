#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ndg/kernels.hpp"

namespace ndg::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(NDG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() {
  const char* env = std::getenv("NDG_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return &detail::scalar_table;
#if defined(NDG_HAVE_AVX2)
  if (cpu_has_avx2()) return &detail::avx2_table;
#endif
  return &detail::scalar_table;
}

const Table*& current() {
  static const Table* t = initial_table();
  return t;
}

}  // namespace

const Table& active() { return *current(); }

const Table& table(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return detail::scalar_table;
    case Isa::avx2:
#if defined(NDG_HAVE_AVX2)
      if (cpu_has_avx2()) return detail::avx2_table;
#endif
      break;
  }
  throw std::runtime_error("kernels: instruction set not available: " + std::string(name(isa)));
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::scalar};
  if (cpu_has_avx2()) out.push_back(Isa::avx2);
  return out;
}

void select(Isa isa) { current() = &table(isa); }

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace ndg::kernels
