#include "pairhold/baselines.hpp"

#include <cmath>

#include "pairhold/errors.hpp"
#include "pairhold/geometry.hpp"

namespace pairhold {

void HifbConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (min_keypoints < 1) throw ConfigError("min_keypoints must be at least 1");
}

void BcfdConfig::validate() const {
  if (beta < 1) throw ConfigError("beta must be at least 1");
}

void OhfbConfig::validate() const {
  if (!(min_overlap >= 0.0 && min_overlap <= 1.0)) {
    throw ConfigError("min_overlap must lie in [0, 1]");
  }
}

std::string_view to_string(OverlapMetric metric) {
  return metric == OverlapMetric::kIou ? "iou" : "enclosure";
}

std::optional<OverlapMetric> parse_overlap_metric(std::string_view text) {
  if (text == "iou") return OverlapMetric::kIou;
  if (text == "enclosure") return OverlapMetric::kEnclosure;
  return std::nullopt;
}

bool hifb_classify(const FirearmDetection& firearm, std::span<const Keypoint> hand_keypoints,
                   const HifbConfig& cfg) {
  std::size_t qualifying = 0;
  for (const auto& kp : hand_keypoints) {
    if (kp.confidence > cfg.alpha && contains(firearm.bbox, kp.x, kp.y)) ++qualifying;
  }
  return qualifying >= cfg.min_keypoints;
}

namespace {

std::size_t count_inside(const Box& box, std::span<const Keypoint> kps) {
  std::size_t n = 0;
  for (const auto& kp : kps) {
    if (contains(box, kp.x, kp.y)) ++n;
  }
  return n;
}

}  // namespace

BcfdDecision bcfd_classify(const FirearmDetection& firearm, std::span<const PoseEstimate> poses,
                           const BcfdConfig& cfg) {
  BcfdDecision best;
  std::optional<std::size_t> best_pose;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const std::size_t n = count_inside(firearm.bbox, poses[i].left_hand) +
                          count_inside(firearm.bbox, poses[i].right_hand);
    if (!best_pose || n > best.keypoints_inside) {
      best_pose = i;
      best.keypoints_inside = n;
    }
  }
  if (best_pose && best.keypoints_inside >= cfg.beta) {
    best.carried = true;
    best.carrier_pose = best_pose;
  }
  return best;
}

std::vector<Keypoint> all_hand_keypoints(std::span<const PoseEstimate> poses) {
  std::vector<Keypoint> out;
  for (const auto& pose : poses) {
    out.insert(out.end(), pose.left_hand.begin(), pose.left_hand.end());
    out.insert(out.end(), pose.right_hand.begin(), pose.right_hand.end());
  }
  return out;
}

std::optional<std::size_t> link_pose_to_human(const PoseEstimate& pose,
                                              std::span<const HumanDetection> humans) {
  if (pose.human_index) {
    if (*pose.human_index < humans.size()) return pose.human_index;
    return std::nullopt;
  }
  std::vector<Keypoint> points = pose.body;
  if (points.empty()) {
    points.insert(points.end(), pose.left_hand.begin(), pose.left_hand.end());
    points.insert(points.end(), pose.right_hand.begin(), pose.right_hand.end());
  }
  if (points.empty()) return std::nullopt;

  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t h = 0; h < humans.size(); ++h) {
    const std::size_t n = count_inside(humans[h].bbox, points);
    if (2 * n <= points.size()) continue;  // needs a strict majority
    if (!best || n > best_count) {
      best = h;
      best_count = n;
    }
  }
  return best;
}

double ohfb_overlap(const Box& firearm, const Box& human, OverlapMetric metric) {
  return metric == OverlapMetric::kIou ? iou(firearm, human) : enclosure(firearm, human);
}

std::vector<FirearmDecision> hifb_decide(const ImageRecord& record, const HifbConfig& cfg) {
  cfg.validate();
  const auto hands = all_hand_keypoints(record.poses);
  std::vector<FirearmDecision> out;
  for (std::size_t f = 0; f < record.firearms.size(); ++f) {
    const bool carried = hifb_classify(record.firearms[f], hands, cfg);
    out.push_back({f, carried, std::nullopt, carried ? record.firearms[f].score : 0.0});
  }
  return out;
}

std::vector<FirearmDecision> bcfd_decide(const ImageRecord& record, const BcfdConfig& cfg) {
  cfg.validate();
  std::vector<FirearmDecision> out;
  for (std::size_t f = 0; f < record.firearms.size(); ++f) {
    const auto decision = bcfd_classify(record.firearms[f], record.poses, cfg);
    FirearmDecision d{f, decision.carried, std::nullopt, 0.0};
    if (decision.carried) {
      d.human_index = link_pose_to_human(record.poses[*decision.carrier_pose], record.humans);
      d.score = record.firearms[f].score;
    }
    out.push_back(d);
  }
  return out;
}

std::vector<FirearmDecision> ohfb_decide(const ImageRecord& record, const OhfbConfig& cfg) {
  cfg.validate();
  std::vector<FirearmDecision> out;
  for (std::size_t f = 0; f < record.firearms.size(); ++f) {
    const auto& firearm = record.firearms[f];
    std::optional<std::size_t> best;
    double best_overlap = 0.0;
    for (std::size_t h = 0; h < record.humans.size(); ++h) {
      const double overlap = ohfb_overlap(firearm.bbox, record.humans[h].bbox, cfg.overlap_metric);
      if (!best || overlap > best_overlap) {
        best = h;
        best_overlap = overlap;
      }
    }
    FirearmDecision d{f, false, std::nullopt, 0.0};
    if (best && best_overlap >= cfg.min_overlap) {
      d.carried = true;
      d.human_index = best;
      d.score = best_overlap * firearm.score;
    }
    out.push_back(d);
  }
  return out;
}

std::vector<PairPrediction> decisions_to_predictions(const ImageRecord& record,
                                                     std::span<const FirearmDecision> decisions) {
  std::vector<PairPrediction> out;
  for (const auto& d : decisions) {
    if (!d.carried || !d.human_index) continue;
    const auto& firearm = record.firearms[d.firearm_index];
    out.push_back(PairPrediction{record.image_id, record.humans[*d.human_index].bbox,
                                 firearm.bbox, firearm.cls, d.score});
  }
  return out;
}

std::vector<PairPrediction> ohfb_associate(const ImageRecord& record, const OhfbConfig& cfg) {
  const auto decisions = ohfb_decide(record, cfg);
  return decisions_to_predictions(record, decisions);
}

}  // namespace pairhold
