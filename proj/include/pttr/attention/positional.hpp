#pragma once

#include <cmath>

#include "pttr/numcore/tensor.hpp"

namespace pttr {

/// Sinusoidal embedding for an h x w token grid, row-major tokens. The first
/// c/2 channels encode the row index, the last c/2 the column index, each as
/// interleaved (sin, cos) pairs with frequencies 10000^(-2i / (c/2)).
template <typename Scalar>
Matrix<Scalar> sinusoidal_pe_2d(Index h, Index w, Index c) {
  if (c <= 0 || c % 4 != 0) throw ValidationError("sinusoidal_pe_2d: channels must be a positive multiple of 4");
  if (h <= 0 || w <= 0) throw ValidationError("sinusoidal_pe_2d: grid extents must be positive");
  const Index half = c / 2;
  Matrix<Scalar> pe(h * w, c);
  for (Index r = 0; r < h; ++r) {
    for (Index col = 0; col < w; ++col) {
      const Index token = r * w + col;
      for (Index i = 0; i < half / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(half));
        pe(token, 2 * i) = static_cast<Scalar>(std::sin(static_cast<double>(r) * freq));
        pe(token, 2 * i + 1) = static_cast<Scalar>(std::cos(static_cast<double>(r) * freq));
        pe(token, half + 2 * i) = static_cast<Scalar>(std::sin(static_cast<double>(col) * freq));
        pe(token, half + 2 * i + 1) = static_cast<Scalar>(std::cos(static_cast<double>(col) * freq));
      }
    }
  }
  return pe;
}

}  // namespace pttr
