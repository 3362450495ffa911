#pragma once

// Separable direct DFT along one axis of a row-major n-d array.  Phases are
// looked up in an exact twiddle table by (j * k) mod G, so the transform is
// exact on the chosen frequency window and never aliases.

#include <array>
#include <vector>

#include "torpsi/grid.hpp"

namespace torpsi::detail {

enum class DftDirection { kForward, kInverse };

using Shape = std::array<int, kMaxDim>;

inline std::size_t shape_size(const Shape& shape, int dim) {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(shape[i]);
  return n;
}

/// Transforms `in` along `axis`.  Forward maps G grid samples to `freq_count`
/// coefficients for frequencies freq_lo, freq_lo+1, ... (scaled by 1/G).
/// Inverse maps `freq_count` coefficients back to G samples.  `shape` is
/// updated to the output shape.
inline std::vector<Complex> dft_axis(const std::vector<Complex>& in, Shape& shape, int dim,
                                     int axis, int points, int freq_lo, int freq_count,
                                     DftDirection dir, const std::vector<Complex>& twiddle) {
  const int in_len = shape[axis];
  const int out_len = dir == DftDirection::kForward ? freq_count : points;
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(shape[i]);
  for (int i = axis + 1; i < dim; ++i) inner *= static_cast<std::size_t>(shape[i]);

  // phase[o_idx * in_len + i_idx] = exp(+-2 pi i j k / G)
  std::vector<Complex> phase(static_cast<std::size_t>(out_len) * in_len);
  for (int o = 0; o < out_len; ++o) {
    for (int i = 0; i < in_len; ++i) {
      long long j, k;
      if (dir == DftDirection::kForward) {
        j = i;
        k = freq_lo + o;
      } else {
        j = o;
        k = freq_lo + i;
      }
      long long p = (j * k) % points;
      if (dir == DftDirection::kForward) p = -p;
      if (p < 0) p += points;
      phase[static_cast<std::size_t>(o) * in_len + i] = twiddle[static_cast<std::size_t>(p)];
    }
  }
  const double scale = dir == DftDirection::kForward ? 1.0 / points : 1.0;

  std::vector<Complex> out(outer * out_len * inner);
  for (std::size_t a = 0; a < outer; ++a) {
    for (std::size_t b = 0; b < inner; ++b) {
      const Complex* src = in.data() + a * in_len * inner + b;
      Complex* dst = out.data() + a * out_len * inner + b;
      for (int o = 0; o < out_len; ++o) {
        const Complex* ph = phase.data() + static_cast<std::size_t>(o) * in_len;
        Complex acc = 0.0;
        for (int i = 0; i < in_len; ++i) acc += ph[i] * src[static_cast<std::size_t>(i) * inner];
        dst[static_cast<std::size_t>(o) * inner] = acc * scale;
      }
    }
  }
  shape[axis] = out_len;
  return out;
}

/// Full n-d forward transform of G^n samples onto the frequency window
/// [freq_lo, freq_lo + freq_count)^n.
inline std::vector<Complex> dft_forward(std::vector<Complex> data, int dim, int points,
                                        int freq_lo, int freq_count,
                                        const std::vector<Complex>& twiddle) {
  Shape shape{};
  for (int i = 0; i < dim; ++i) shape[i] = points;
  for (int axis = 0; axis < dim; ++axis)
    data = dft_axis(data, shape, dim, axis, points, freq_lo, freq_count,
                    DftDirection::kForward, twiddle);
  return data;
}

inline std::vector<Complex> dft_inverse(std::vector<Complex> data, int dim, int points,
                                        int freq_lo, int freq_count,
                                        const std::vector<Complex>& twiddle) {
  Shape shape{};
  for (int i = 0; i < dim; ++i) shape[i] = freq_count;
  for (int axis = 0; axis < dim; ++axis)
    data = dft_axis(data, shape, dim, axis, points, freq_lo, freq_count,
                    DftDirection::kInverse, twiddle);
  return data;
}

}  // namespace torpsi::detail
