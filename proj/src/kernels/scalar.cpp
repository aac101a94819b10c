#include <cmath>

#include "gapflow/kernels.hpp"

namespace gapflow::kernels {

double frac_error_scale(std::size_t d) { return static_cast<double>(d + 3) * 0x1p-52; }

namespace scalar {

void frac_linear_form(const double* omega, std::size_t d, const double* const* cols, std::size_t begin,
                      std::size_t end, FracOutput out) {
  const double scale = frac_error_scale(d);
  for (std::size_t i = begin; i < end; ++i) {
    double acc = 0.0, mag = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      acc = std::fma(cols[j][i], omega[j], acc);
      mag = std::fma(std::fabs(cols[j][i]), std::fabs(omega[j]), mag);
    }
    const double fl = std::floor(acc);
    const double fr = acc - fl;
    const double err = mag * scale;
    out.frac[i] = fr;
    out.floor[i] = fl;
    out.err[i] = err;
    out.near[i] = (fr < err) | ((1.0 - fr) < err);
  }
}

void classify_box(const double* lo, const double* hi, std::size_t d, const double* const* cols, std::size_t begin,
                  std::size_t end, std::uint8_t* inside) {
  for (std::size_t i = begin; i < end; ++i) {
    std::uint8_t in = 1;
    for (std::size_t j = 0; j < d; ++j) in &= (cols[j][i] >= lo[j]) & (cols[j][i] < hi[j]);
    inside[i] = in;
  }
}

void classify_halfspaces(const double* a, const double* b, const std::uint8_t* strict, std::size_t rows, std::size_t d,
                         const double* const* cols, std::size_t begin, std::size_t end, std::uint8_t* inside) {
  for (std::size_t i = begin; i < end; ++i) {
    std::uint8_t in = 1;
    for (std::size_t k = 0; k < rows; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s = std::fma(a[k * d + j], cols[j][i], s);
      in &= strict[k] ? (s < b[k]) : (s <= b[k]);
    }
    inside[i] = in;
  }
}

}  // namespace scalar
}  // namespace gapflow::kernels
