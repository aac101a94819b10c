#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

// Data-parallel double-precision kernels. Every kernel has a scalar
// reference and an AVX2 variant; both use the same operation order (fused
// multiply-adds accumulated over coordinates in index order), so their
// outputs are bitwise identical.
//
// Point sets are passed column-wise: cols[j][i] is coordinate j of point i.

namespace gapflow::kernels {

enum class Isa { scalar, avx2 };

/// Best variant supported by this CPU and build.
Isa detected_isa();
/// Variant used by the dispatching entry points.
Isa active_isa();
/// Pins the dispatch (tests); std::nullopt restores auto-detection.
/// Requesting an unsupported variant falls back to scalar.
void force_isa(std::optional<Isa> isa);
const char* isa_name(Isa isa);

struct FracOutput {
  double* frac;        // value - floor(value), in [0, 1)
  double* floor;       // floor(value) as a double
  double* err;         // bound on |computed value - exact value|
  std::uint8_t* near;  // 1 when the floor is not certified by err
};

/// value_i = sum_j cols[j][i] * omega[j], with omega[j] a correctly rounded
/// double. err covers both the rounding of omega and of the sum.
void frac_linear_form(const double* omega, std::size_t d, const double* const* cols, std::size_t n, FracOutput out);

/// inside[i] = 1 iff lo[j] <= cols[j][i] < hi[j] for every j.
void classify_box(const double* lo, const double* hi, std::size_t d, const double* const* cols, std::size_t n,
                  std::uint8_t* inside);

/// inside[i] = 1 iff for every row k: sum_j a[k*d + j] * cols[j][i] < b[k]
/// (or <= b[k] when strict[k] == 0).
void classify_halfspaces(const double* a, const double* b, const std::uint8_t* strict, std::size_t rows, std::size_t d,
                         const double* const* cols, std::size_t n, std::uint8_t* inside);

namespace scalar {
void frac_linear_form(const double* omega, std::size_t d, const double* const* cols, std::size_t begin,
                      std::size_t end, FracOutput out);
void classify_box(const double* lo, const double* hi, std::size_t d, const double* const* cols, std::size_t begin,
                  std::size_t end, std::uint8_t* inside);
void classify_halfspaces(const double* a, const double* b, const std::uint8_t* strict, std::size_t rows, std::size_t d,
                         const double* const* cols, std::size_t begin, std::size_t end, std::uint8_t* inside);
}  // namespace scalar

namespace avx2 {
bool compiled();
void frac_linear_form(const double* omega, std::size_t d, const double* const* cols, std::size_t n, FracOutput out);
void classify_box(const double* lo, const double* hi, std::size_t d, const double* const* cols, std::size_t n,
                  std::uint8_t* inside);
void classify_halfspaces(const double* a, const double* b, const std::uint8_t* strict, std::size_t rows, std::size_t d,
                         const double* const* cols, std::size_t n, std::uint8_t* inside);
}  // namespace avx2

/// Error-bound multiplier shared by both variants: (d + 3) * 2^-52.
double frac_error_scale(std::size_t d);

}  // namespace gapflow::kernels
