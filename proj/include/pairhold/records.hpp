#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairhold/geometry.hpp"

namespace pairhold {

enum class FirearmClass { kGun, kRifle };

/// "gun" or "rifle".
std::string_view to_string(FirearmClass cls);

/// Parses "gun" / "rifle"; anything else yields nullopt.
std::optional<FirearmClass> parse_firearm_class(std::string_view text);

struct HumanDetection {
  Box bbox;
  double score = 1.0;

  friend bool operator==(const HumanDetection&, const HumanDetection&) = default;
};

struct FirearmDetection {
  Box bbox;
  FirearmClass cls = FirearmClass::kGun;
  double score = 1.0;

  friend bool operator==(const FirearmDetection&, const FirearmDetection&) = default;
};

/// One person's body and hand keypoints. Keypoint lists are empty when the
/// pose estimator missed the part (occlusion, partial appearance).
struct PoseEstimate {
  std::optional<std::size_t> human_index;
  std::vector<Keypoint> body;
  std::vector<Keypoint> left_hand;
  std::vector<Keypoint> right_hand;

  friend bool operator==(const PoseEstimate&, const PoseEstimate&) = default;
};

/// Annotated human/firearm couple. Membership is stored by boxes, not by
/// detection indices, so ground truth is independent of detector output.
struct GroundTruthPair {
  Box human_bbox;
  Box firearm_bbox;
  FirearmClass firearm_class = FirearmClass::kGun;
  bool carried = false;

  friend bool operator==(const GroundTruthPair&, const GroundTruthPair&) = default;
};

struct ImageRecord {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<HumanDetection> humans;
  std::vector<FirearmDetection> firearms;
  std::vector<PoseEstimate> poses;
  std::vector<GroundTruthPair> gt_pairs;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// A scored claim that `human_bbox` carries `firearm_bbox` in `image_id`.
struct PairPrediction {
  std::string image_id;
  Box human_bbox;
  Box firearm_bbox;
  FirearmClass firearm_class = FirearmClass::kGun;
  double score = 0.0;

  friend bool operator==(const PairPrediction&, const PairPrediction&) = default;
};

}  // namespace pairhold
