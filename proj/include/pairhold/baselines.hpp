#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pairhold/records.hpp"

namespace pairhold {

/// Hands-inside-firearm-box rule: a firearm is carried when at least
/// `min_keypoints` hand keypoints with confidence strictly above `alpha`
/// fall inside its box.
struct HifbConfig {
  double alpha = 0.3;
  std::size_t min_keypoints = 3;

  void validate() const;  // throws ConfigError
};

/// Pose-conditioned rule. `beta` counts hand keypoints (both hands of one
/// pose) inside the firearm box.
struct BcfdConfig {
  std::size_t beta = 1;

  void validate() const;
};

enum class OverlapMetric { kIou, kEnclosure };

std::string_view to_string(OverlapMetric metric);
std::optional<OverlapMetric> parse_overlap_metric(std::string_view text);

/// Max-overlap association. kEnclosure measures the fraction of the firearm
/// box covered by the human box.
struct OhfbConfig {
  OverlapMetric overlap_metric = OverlapMetric::kEnclosure;
  double min_overlap = 0.5;

  void validate() const;
};

bool hifb_classify(const FirearmDetection& firearm, std::span<const Keypoint> hand_keypoints,
                   const HifbConfig& cfg);

struct BcfdDecision {
  bool carried = false;
  std::optional<std::size_t> carrier_pose;
  std::size_t keypoints_inside = 0;  // count of the best pose
};

/// Carrier is the pose with the most hand keypoints inside the firearm box,
/// lowest pose index on ties; reported only when the count reaches beta.
BcfdDecision bcfd_classify(const FirearmDetection& firearm, std::span<const PoseEstimate> poses,
                           const BcfdConfig& cfg);

/// Left and right hand keypoints of every pose, in pose order.
std::vector<Keypoint> all_hand_keypoints(std::span<const PoseEstimate> poses);

/// Human a pose belongs to. Uses the explicit human_index when present;
/// otherwise the human boxes containing a strict majority of the pose's body
/// keypoints (hand keypoints if the body is empty) compete, highest count
/// first, then lowest human index.
std::optional<std::size_t> link_pose_to_human(const PoseEstimate& pose,
                                              std::span<const HumanDetection> humans);

/// Overlap value used by OHFB between a firearm box and a human box.
double ohfb_overlap(const Box& firearm, const Box& human, OverlapMetric metric);

/// Per-firearm outcome of a baseline on one image.
struct FirearmDecision {
  std::size_t firearm_index = 0;
  bool carried = false;
  std::optional<std::size_t> human_index;  // identified carrier, if any
  double score = 0.0;                      // ranking score of the pair claim
};

std::vector<FirearmDecision> hifb_decide(const ImageRecord& record, const HifbConfig& cfg);
std::vector<FirearmDecision> bcfd_decide(const ImageRecord& record, const BcfdConfig& cfg);

/// For each firearm, the human of maximum overlap (lowest index on ties),
/// kept only when the overlap reaches min_overlap. Score is
/// overlap * firearm score.
std::vector<FirearmDecision> ohfb_decide(const ImageRecord& record, const OhfbConfig& cfg);

/// Pair predictions for every decision that identified a carrier.
std::vector<PairPrediction> decisions_to_predictions(const ImageRecord& record,
                                                     std::span<const FirearmDecision> decisions);

std::vector<PairPrediction> ohfb_associate(const ImageRecord& record, const OhfbConfig& cfg);

}  // namespace pairhold
