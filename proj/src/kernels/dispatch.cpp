#include <atomic>

#include "gapflow/kernels.hpp"

namespace gapflow::kernels {

namespace {

// -1: auto-detect, otherwise a forced Isa value.
std::atomic<int> g_forced{-1};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

Isa detected_isa() {
  static const Isa isa = (avx2::compiled() && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar;
  return isa;
}

Isa active_isa() {
  int f = g_forced.load(std::memory_order_relaxed);
  if (f < 0) return detected_isa();
  if (static_cast<Isa>(f) == Isa::avx2 && detected_isa() != Isa::avx2) return Isa::scalar;
  return static_cast<Isa>(f);
}

void force_isa(std::optional<Isa> isa) { g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed); }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void frac_linear_form(const double* omega, std::size_t d, const double* const* cols, std::size_t n, FracOutput out) {
  if (active_isa() == Isa::avx2) return avx2::frac_linear_form(omega, d, cols, n, out);
  scalar::frac_linear_form(omega, d, cols, 0, n, out);
}

void classify_box(const double* lo, const double* hi, std::size_t d, const double* const* cols, std::size_t n,
                  std::uint8_t* inside) {
  if (active_isa() == Isa::avx2) return avx2::classify_box(lo, hi, d, cols, n, inside);
  scalar::classify_box(lo, hi, d, cols, 0, n, inside);
}

void classify_halfspaces(const double* a, const double* b, const std::uint8_t* strict, std::size_t rows, std::size_t d,
                         const double* const* cols, std::size_t n, std::uint8_t* inside) {
  if (active_isa() == Isa::avx2) return avx2::classify_halfspaces(a, b, strict, rows, d, cols, n, inside);
  scalar::classify_halfspaces(a, b, strict, rows, d, cols, 0, n, inside);
}

}  // namespace gapflow::kernels
