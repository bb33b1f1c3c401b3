#include <gtest/gtest.h>

#include "pairhold/errors.hpp"
#include "pairhold/pairing.hpp"
#include "pairhold/random.hpp"

#include "../support/generators.hpp"

using namespace pairhold;

namespace {

CandidatePair pair_of(const Box& human, const Box& firearm) {
  CandidatePair p;
  p.human_bbox = human;
  p.firearm_bbox = firearm;
  p.paired_bbox = union_box(human, firearm);
  return p;
}

}  // namespace

TEST(EnumeratePairs, NoHumansNoPairs) {
  ImageRecord r;
  r.firearms.assign(3, FirearmDetection{Box{0, 0, 1, 1}, FirearmClass::kGun, 0.5});
  EXPECT_TRUE(enumerate_pairs(r).empty());
}

TEST(EnumeratePairs, HumanMajorOrder) {
  ImageRecord r;
  r.humans = {{Box{0, 0, 2, 4}, 0.9}, {Box{5, 0, 7, 4}, 0.8}};
  r.firearms = {{Box{3, 1, 5, 2}, FirearmClass::kGun, 0.6}, {Box{1, 1, 2, 2}, FirearmClass::kRifle, 0.4}};
  const auto pairs = enumerate_pairs(r);
  ASSERT_EQ(pairs.size(), 4u);
  const std::pair<std::size_t, std::size_t> order[] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(pairs[i].human_index, order[i].first);
    EXPECT_EQ(pairs[i].firearm_index, order[i].second);
  }
  EXPECT_EQ(pairs[0].paired_bbox, (Box{0, 0, 5, 4}));
  EXPECT_EQ(pairs[1].firearm_class, FirearmClass::kRifle);
  EXPECT_DOUBLE_EQ(pairs[3].human_score, 0.8);
  EXPECT_DOUBLE_EQ(pairs[3].firearm_score, 0.4);
}

TEST(EnumeratePairs, PairedBoxContainsBothMembers) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto scene = testgen::crowded_scene(rng, "s");
    const auto pairs = enumerate_pairs(scene);
    ASSERT_EQ(pairs.size(), scene.humans.size() * scene.firearms.size());
    for (const auto& p : pairs) {
      ASSERT_EQ(enclosure(p.human_bbox, p.paired_bbox), 1.0);
      ASSERT_EQ(enclosure(p.firearm_bbox, p.paired_bbox), 1.0);
      ASSERT_EQ(p.human_bbox, scene.humans[p.human_index].bbox);
      ASSERT_EQ(p.firearm_bbox, scene.firearms[p.firearm_index].bbox);
    }
  }
}

TEST(CropSpec, AlreadyAtTarget) {
  const auto c = crop_spec(pair_of(Box{0, 0, 600, 300}, Box{10, 10, 20, 20}), 1000, 1000);
  EXPECT_EQ(c.crop, (Box{0, 0, 600, 300}));
  EXPECT_DOUBLE_EQ(c.scale, 1.0);
  EXPECT_EQ(c.width, 600);
  EXPECT_EQ(c.height, 300);
}

TEST(CropSpec, Downscale) {
  const auto c = crop_spec(pair_of(Box{0, 0, 1200, 600}, Box{10, 10, 20, 20}), 2000, 2000);
  EXPECT_DOUBLE_EQ(c.scale, 0.5);
  EXPECT_EQ(c.width, 600);
  EXPECT_EQ(c.height, 300);
}

TEST(CropSpec, ClipThenScale) {
  const auto c = crop_spec(pair_of(Box{-10, -10, 90, 40}, Box{0, 0, 5, 5}), 80, 80);
  EXPECT_EQ(c.crop, (Box{0, 0, 80, 40}));
  EXPECT_DOUBLE_EQ(c.scale, 600.0 / 80.0);
  EXPECT_EQ(c.width, 600);
  EXPECT_EQ(c.height, 300);
}

TEST(CropSpec, MarginGrowsBeforeClipping) {
  const auto c = crop_spec(pair_of(Box{10, 10, 30, 20}, Box{12, 12, 14, 14}), 100, 100, 600, 5);
  EXPECT_EQ(c.crop, (Box{5, 5, 35, 25}));
}

TEST(CropSpec, OutOfFrameThrows) {
  EXPECT_THROW(crop_spec(pair_of(Box{200, 200, 300, 300}, Box{210, 210, 220, 220}), 100, 100),
               GeometryError);
}
