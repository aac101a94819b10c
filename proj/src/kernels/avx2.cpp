#include "gapflow/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define GAPFLOW_HAVE_AVX2 1
#endif

namespace gapflow::kernels::avx2 {

#ifdef GAPFLOW_HAVE_AVX2

namespace {

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

inline void store_mask(std::uint8_t* dst, __m256d mask) {
  const int bits = _mm256_movemask_pd(mask);
  for (int k = 0; k < 4; ++k) dst[k] = static_cast<std::uint8_t>((bits >> k) & 1);
}

}  // namespace

bool compiled() { return true; }

void frac_linear_form(const double* omega, std::size_t d, const double* const* cols, std::size_t n, FracOutput out) {
  const __m256d scale = _mm256_set1_pd(frac_error_scale(d));
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    __m256d mag = _mm256_setzero_pd();
    for (std::size_t j = 0; j < d; ++j) {
      const __m256d m = _mm256_loadu_pd(cols[j] + i);
      const __m256d w = _mm256_set1_pd(omega[j]);
      acc = _mm256_fmadd_pd(m, w, acc);
      mag = _mm256_fmadd_pd(vabs(m), vabs(w), mag);
    }
    const __m256d fl = _mm256_floor_pd(acc);
    const __m256d fr = _mm256_sub_pd(acc, fl);
    const __m256d err = _mm256_mul_pd(mag, scale);
    _mm256_storeu_pd(out.frac + i, fr);
    _mm256_storeu_pd(out.floor + i, fl);
    _mm256_storeu_pd(out.err + i, err);
    const __m256d near = _mm256_or_pd(_mm256_cmp_pd(fr, err, _CMP_LT_OQ),
                                      _mm256_cmp_pd(_mm256_sub_pd(one, fr), err, _CMP_LT_OQ));
    store_mask(out.near + i, near);
  }
  scalar::frac_linear_form(omega, d, cols, i, n, out);
}

void classify_box(const double* lo, const double* hi, std::size_t d, const double* const* cols, std::size_t n,
                  std::uint8_t* inside) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d in = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    for (std::size_t j = 0; j < d; ++j) {
      const __m256d x = _mm256_loadu_pd(cols[j] + i);
      in = _mm256_and_pd(in, _mm256_cmp_pd(x, _mm256_set1_pd(lo[j]), _CMP_GE_OQ));
      in = _mm256_and_pd(in, _mm256_cmp_pd(x, _mm256_set1_pd(hi[j]), _CMP_LT_OQ));
    }
    store_mask(inside + i, in);
  }
  scalar::classify_box(lo, hi, d, cols, i, n, inside);
}

void classify_halfspaces(const double* a, const double* b, const std::uint8_t* strict, std::size_t rows, std::size_t d,
                         const double* const* cols, std::size_t n, std::uint8_t* inside) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d in = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    for (std::size_t k = 0; k < rows; ++k) {
      __m256d s = _mm256_setzero_pd();
      for (std::size_t j = 0; j < d; ++j) s = _mm256_fmadd_pd(_mm256_set1_pd(a[k * d + j]), _mm256_loadu_pd(cols[j] + i), s);
      const __m256d bk = _mm256_set1_pd(b[k]);
      in = _mm256_and_pd(in, strict[k] ? _mm256_cmp_pd(s, bk, _CMP_LT_OQ) : _mm256_cmp_pd(s, bk, _CMP_LE_OQ));
    }
    store_mask(inside + i, in);
  }
  scalar::classify_halfspaces(a, b, strict, rows, d, cols, i, n, inside);
}

#else

bool compiled() { return false; }

void frac_linear_form(const double* omega, std::size_t d, const double* const* cols, std::size_t n, FracOutput out) {
  scalar::frac_linear_form(omega, d, cols, 0, n, out);
}

void classify_box(const double* lo, const double* hi, std::size_t d, const double* const* cols, std::size_t n,
                  std::uint8_t* inside) {
  scalar::classify_box(lo, hi, d, cols, 0, n, inside);
}

void classify_halfspaces(const double* a, const double* b, const std::uint8_t* strict, std::size_t rows, std::size_t d,
                         const double* const* cols, std::size_t n, std::uint8_t* inside) {
  scalar::classify_halfspaces(a, b, strict, rows, d, cols, 0, n, inside);
}

#endif

}  // namespace gapflow::kernels::avx2
