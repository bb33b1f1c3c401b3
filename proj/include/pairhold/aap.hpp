#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace pairhold {

/// Dense height x width x channels grid, row-major with channels fastest.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  /// Zero-filled grid. Throws InvalidInputError if any dimension is zero.
  FeatureGrid(std::size_t height, std::size_t width, std::size_t channels);
  /// Takes ownership of `values`; size must equal height*width*channels.
  FeatureGrid(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<double> values);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  bool empty() const { return values_.empty(); }

  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return values_[(row * width_ + col) * channels_ + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return values_[(row * width_ + col) * channels_ + ch];
  }

  std::span<const double> values() const { return values_; }

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
};

/// Row (or column) range [begin, end) of input cells averaged into output
/// cell `index` when `in_size` cells are pooled to `out_size`:
/// begin = floor(index*in/out), end = ceil((index+1)*in/out).
struct PoolBin {
  std::size_t begin = 0;
  std::size_t end = 0;
};
PoolBin adaptive_bin(std::size_t index, std::size_t in_size, std::size_t out_size);

/// Adaptive average pooling to out_h x out_w. Each output cell is the
/// per-channel mean of its (possibly overlapping) bin, accumulated in double
/// in row-major order. Throws InvalidInputError on empty input or zero output
/// size.
FeatureGrid adaptive_avg_pool(const FeatureGrid& grid, std::size_t out_h = 7,
                              std::size_t out_w = 7);

/// Binary sidecar: three little-endian uint32 (height, width, channels)
/// followed by height*width*channels little-endian float32, row-major with
/// channels fastest. Throws IoError / FormatError.
FeatureGrid load_feature_grid(const std::filesystem::path& path);
void save_feature_grid(const FeatureGrid& grid, const std::filesystem::path& path);

}  // namespace pairhold
