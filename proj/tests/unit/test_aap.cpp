#include <algorithm>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "pairhold/aap.hpp"
#include "pairhold/errors.hpp"
#include "pairhold/random.hpp"

#include "../oracles/aap_oracle.hpp"

using namespace pairhold;

namespace {

FeatureGrid random_grid(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  std::vector<double> v(h * w * c);
  for (auto& x : v) x = rng.uniform(-5.0, 5.0);
  return FeatureGrid(h, w, c, std::move(v));
}

}  // namespace

TEST(AdaptivePool, ThreeByThreeToTwoByTwo) {
  const FeatureGrid g(3, 3, 1, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto p = adaptive_avg_pool(g, 2, 2);
  const std::vector<double> expect = {3, 4, 6, 7};
  EXPECT_EQ(std::vector<double>(p.values().begin(), p.values().end()), expect);
  EXPECT_EQ(oracle::pool_by_membership({1, 2, 3, 4, 5, 6, 7, 8, 9}, 3, 3, 1, 2, 2), expect);
}

TEST(AdaptivePool, SameSizeIsIdentity) {
  Rng rng(1);
  const auto g = random_grid(rng, 7, 7, 2);
  EXPECT_EQ(adaptive_avg_pool(g, 7, 7), g);
}

TEST(AdaptivePool, ConstantStaysConstant) {
  const FeatureGrid g(11, 5, 2, std::vector<double>(110, 2.5));
  const auto p = adaptive_avg_pool(g);
  for (double v : p.values()) EXPECT_EQ(v, 2.5);
  EXPECT_EQ(p.height(), 7u);
  EXPECT_EQ(p.width(), 7u);
}

TEST(AdaptivePool, EmptyGridThrows) {
  EXPECT_THROW(adaptive_avg_pool(FeatureGrid{}), InvalidInputError);
  EXPECT_THROW(FeatureGrid(0, 3, 1), InvalidInputError);
}

TEST(AdaptiveBin, CoversEveryCell) {
  for (std::size_t in = 1; in <= 20; ++in) {
    for (std::size_t out = 1; out <= 9; ++out) {
      std::vector<int> hit(in, 0);
      for (std::size_t i = 0; i < out; ++i) {
        const auto b = adaptive_bin(i, in, out);
        ASSERT_LT(b.begin, b.end);
        for (std::size_t r = b.begin; r < b.end; ++r) {
          ASSERT_TRUE(oracle::in_bin(r, i, in, out));
          ++hit[r];
        }
      }
      ASSERT_TRUE(std::all_of(hit.begin(), hit.end(), [](int n) { return n > 0; }));
    }
  }
}

TEST(AdaptivePool, BoundedByInputRangePerChannel) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t h = 1 + rng.below(12), w = 1 + rng.below(12), c = 1 + rng.below(3);
    const auto g = random_grid(rng, h, w, c);
    const auto p = adaptive_avg_pool(g, 1 + rng.below(7), 1 + rng.below(7));
    for (std::size_t ch = 0; ch < c; ++ch) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t col = 0; col < w; ++col) {
          lo = std::min(lo, g.at(r, col, ch));
          hi = std::max(hi, g.at(r, col, ch));
        }
      for (std::size_t r = 0; r < p.height(); ++r)
        for (std::size_t col = 0; col < p.width(); ++col) {
          ASSERT_GE(p.at(r, col, ch), lo);
          ASSERT_LE(p.at(r, col, ch), hi);
        }
    }
  }
}

TEST(AdaptivePool, ChannelsPoolIndependently) {
  Rng rng(3);
  const auto g = random_grid(rng, 9, 6, 3);
  const auto stacked = adaptive_avg_pool(g, 4, 5);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    FeatureGrid single(9, 6, 1);
    for (std::size_t r = 0; r < 9; ++r)
      for (std::size_t c = 0; c < 6; ++c) single.at(r, c, 0) = g.at(r, c, ch);
    const auto p = adaptive_avg_pool(single, 4, 5);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 5; ++c) ASSERT_EQ(p.at(r, c, 0), stacked.at(r, c, ch));
  }
}

TEST(FeatureGridFile, RoundTripAtFloatPrecision) {
  const FeatureGrid g(2, 3, 2, {0.5, -1.25, 3, 4, 5, 6, 7, 8, 9, 10, 11, 0.125});
  const auto path = std::filesystem::temp_directory_path() / "pairhold_grid.bin";
  save_feature_grid(g, path);
  EXPECT_EQ(std::filesystem::file_size(path), 12u + 4u * 12u);
  EXPECT_EQ(load_feature_grid(path), g);
}

TEST(FeatureGridFile, TruncatedFileIsFormatError) {
  const auto path = std::filesystem::temp_directory_path() / "pairhold_grid_bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "abc";
  }
  EXPECT_THROW(load_feature_grid(path), FormatError);
  EXPECT_THROW(load_feature_grid("/nonexistent/grid.bin"), IoError);
}
