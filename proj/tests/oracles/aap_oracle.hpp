#pragma once

// Adaptive average pooling by membership: input row r feeds output row i when
// the unit interval [r, r+1) overlaps [i*in/out, (i+1)*in/out) with positive
// length. Written with integer cross-multiplication, scanning every cell.

#include <cstddef>
#include <vector>

namespace oracle {

inline bool in_bin(std::size_t cell, std::size_t bin, std::size_t in, std::size_t out) {
  return cell * out < (bin + 1) * in && (cell + 1) * out > bin * in;
}

// values: h x w x c, row-major, channels fastest. Same layout out.
inline std::vector<double> pool_by_membership(const std::vector<double>& values, std::size_t h,
                                              std::size_t w, std::size_t c, std::size_t oh,
                                              std::size_t ow) {
  std::vector<double> out(oh * ow * c, 0.0);
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < h; ++r) {
          if (!in_bin(r, i, h, oh)) continue;
          for (std::size_t col = 0; col < w; ++col) {
            if (!in_bin(col, j, w, ow)) continue;
            sum += values[(r * w + col) * c + ch];
            ++n;
          }
        }
        out[(i * ow + j) * c + ch] = sum / static_cast<double>(n);
      }
    }
  }
  return out;
}

}  // namespace oracle
