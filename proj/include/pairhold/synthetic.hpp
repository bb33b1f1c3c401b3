#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pairhold/records.hpp"

namespace pairhold {

/// Knobs of the synthetic crowd-scene generator. Scenes place a row of
/// partially overlapping people; each carried firearm sits under its
/// carrier's hand keypoints, often reaching into a neighbour's box.
struct SyntheticConfig {
  std::size_t images = 10;
  std::uint64_t seed = 0;
  std::size_t min_humans = 2;
  std::size_t max_humans = 5;
  std::size_t max_firearms = 2;
  double rifle_prob = 0.5;
  double uncarried_prob = 0.15;      // firearm leaning/lying, nobody holds it
  double hidden_hands_prob = 0.05;   // pose estimator lost both hands
  double unlinked_pose_prob = 0.3;   // pose carries no human_index
  double spurious_firearm_prob = 0.1;  // unannotated false detection
};

/// Deterministic for a given config. Coordinates and scores are rounded to
/// three decimals so the records survive the 6-decimal file format exactly.
std::vector<ImageRecord> generate_synthetic(const SyntheticConfig& cfg);

}  // namespace pairhold
