#include "pairhold/aap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "pairhold/errors.hpp"

namespace pairhold {

namespace {

void require_dims(std::size_t height, std::size_t width, std::size_t channels) {
  if (height == 0 || width == 0 || channels == 0) {
    throw InvalidInputError("feature grid dimensions must all be at least 1, got " +
                            std::to_string(height) + "x" + std::to_string(width) + "x" +
                            std::to_string(channels));
  }
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::uint32_t v, std::string& out) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

FeatureGrid::FeatureGrid(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels) {
  require_dims(height, width, channels);
  values_.assign(height * width * channels, 0.0);
}

FeatureGrid::FeatureGrid(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<double> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
  require_dims(height, width, channels);
  if (values_.size() != height * width * channels) {
    throw InvalidInputError("feature grid expects " + std::to_string(height * width * channels) +
                            " values, got " + std::to_string(values_.size()));
  }
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidInputError("feature grid values must be finite");
  }
}

PoolBin adaptive_bin(std::size_t index, std::size_t in_size, std::size_t out_size) {
  return PoolBin{(index * in_size) / out_size,
                 ((index + 1) * in_size + out_size - 1) / out_size};
}

FeatureGrid adaptive_avg_pool(const FeatureGrid& grid, std::size_t out_h, std::size_t out_w) {
  if (grid.empty()) throw InvalidInputError("cannot pool an empty feature grid");
  if (out_h == 0 || out_w == 0) throw InvalidInputError("pooled output size must be at least 1x1");

  const std::size_t channels = grid.channels();
  FeatureGrid out(out_h, out_w, channels);
  std::vector<double> sums(channels);
  for (std::size_t i = 0; i < out_h; ++i) {
    const PoolBin rows = adaptive_bin(i, grid.height(), out_h);
    for (std::size_t j = 0; j < out_w; ++j) {
      const PoolBin cols = adaptive_bin(j, grid.width(), out_w);
      std::fill(sums.begin(), sums.end(), 0.0);
      for (std::size_t r = rows.begin; r < rows.end; ++r) {
        for (std::size_t c = cols.begin; c < cols.end; ++c) {
          for (std::size_t ch = 0; ch < channels; ++ch) sums[ch] += grid.at(r, c, ch);
        }
      }
      const double count = static_cast<double>((rows.end - rows.begin) * (cols.end - cols.begin));
      for (std::size_t ch = 0; ch < channels; ++ch) out.at(i, j, ch) = sums[ch] / count;
    }
  }
  return out;
}

FeatureGrid load_feature_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading " + path.string());

  if (bytes.size() < 12) throw FormatError(path.string() + ": truncated feature grid header");
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t height = read_u32_le(data);
  const std::size_t width = read_u32_le(data + 4);
  const std::size_t channels = read_u32_le(data + 8);
  if (height == 0 || width == 0 || channels == 0) {
    throw FormatError(path.string() + ": feature grid dimensions must be non-zero");
  }
  const std::size_t count = height * width * channels;
  if (bytes.size() != 12 + 4 * count) {
    throw FormatError(path.string() + ": expected " + std::to_string(12 + 4 * count) +
                      " bytes, found " + std::to_string(bytes.size()));
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float f = std::bit_cast<float>(read_u32_le(data + 12 + 4 * i));
    if (!std::isfinite(f)) throw FormatError(path.string() + ": non-finite feature value");
    values[i] = f;
  }
  return FeatureGrid(height, width, channels, std::move(values));
}

void save_feature_grid(const FeatureGrid& grid, const std::filesystem::path& path) {
  if (grid.empty()) throw InvalidInputError("cannot save an empty feature grid");
  std::string out;
  out.reserve(12 + 4 * grid.values().size());
  write_u32_le(static_cast<std::uint32_t>(grid.height()), out);
  write_u32_le(static_cast<std::uint32_t>(grid.width()), out);
  write_u32_le(static_cast<std::uint32_t>(grid.channels()), out);
  for (double v : grid.values()) {
    write_u32_le(std::bit_cast<std::uint32_t>(static_cast<float>(v)), out);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("error while writing " + path.string());
}

}  // namespace pairhold
