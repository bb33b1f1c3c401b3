#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairhold/baselines.hpp"
#include "pairhold/records.hpp"

namespace pairhold {

/// Ground-truth pairs keyed by image_id.
using GroundTruthIndex = std::map<std::string, std::vector<GroundTruthPair>>;

GroundTruthIndex index_ground_truth(std::span<const ImageRecord> records);

/// Canonical ranking order: score descending, then image_id, human box and
/// firearm box ascending (lexicographic on x1, y1, x2, y2), then class.
bool ranks_before(const PairPrediction& a, const PairPrediction& b);

/// Indices of `preds` in canonical ranking order.
std::vector<std::size_t> rank_predictions(std::span<const PairPrediction> preds);

struct MatchResult {
  std::vector<std::size_t> ranking;  // indices into the predictions, best first
  std::vector<bool> is_tp;           // aligned with ranking
  /// Index into the image's ground-truth list of the GT each ranked
  /// prediction claimed, aligned with ranking.
  std::vector<std::optional<std::size_t>> matched_gt;
};

/// Greedy matching in ranking order. A prediction is a true positive iff an
/// unclaimed carried GT of the same image and firearm class overlaps it with
/// IoU >= iou_thresh on both the human and the firearm box. Among eligible
/// GTs the one maximising min(human IoU, firearm IoU) is claimed (lowest
/// index on ties). Predictions for images absent from `gts` are false
/// positives.
MatchResult match_pairs(std::span<const PairPrediction> preds, const GroundTruthIndex& gts,
                        double iou_thresh = 0.5);

/// All-point interpolated AP of TP/FP flags given in ranking order.
/// With no positives: 1 if there are also no predictions, else 0.
double average_precision(const std::vector<bool>& flags, std::size_t num_gt_positives);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score = 0.0;  // score of the prediction at this rank
};

struct ApStats {
  double ap = 0.0;
  std::size_t positives = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<PrPoint> curve;  // one point per ranked prediction
};

struct EvalReport {
  double iou_thresh = 0.5;
  ApStats gun;     // AP_Ghold
  ApStats rifle;   // AP_Rhold
  ApStats pooled;  // AP_hold

  double ap_ghold() const { return gun.ap; }
  double ap_rhold() const { return rifle.ap; }
  double ap_hold() const { return pooled.ap; }
};

enum class EvalMode { kStrict, kLenient };

/// Runs match_pairs over the pooled predictions and reports per-class and
/// pooled AP. Only carried GT pairs are positives. In strict mode a
/// prediction whose image_id has no ground-truth record throws
/// InvalidInputError; in lenient mode it counts as a false positive.
EvalReport evaluate(std::span<const PairPrediction> preds, const GroundTruthIndex& gts,
                    double iou_thresh = 0.5, EvalMode mode = EvalMode::kStrict);

/// Single-line JSON document with scalar metrics, counts and PR curves.
std::string format_report_json(const EvalReport& report);

struct ApTableRow {
  std::string method;
  std::string backbone;
  const EvalReport* report = nullptr;
};

/// Plain-text table: Methods | Backbone | AP_Ghold | AP_Rhold | AP_hold,
/// AP values in percent with one decimal.
std::string format_ap_table(std::span<const ApTableRow> rows);

struct ClassificationAccuracy {
  std::optional<double> gun;      // nullopt when no gun entries
  std::optional<double> rifle;
  std::optional<double> overall;  // pooled over all firearms
};

/// Per-class and pooled share of firearms whose predicted carried flag
/// equals ground truth. Throws InvalidInputError on length mismatch.
ClassificationAccuracy classification_accuracy(const std::vector<bool>& predicted,
                                               const std::vector<bool>& truth,
                                               std::span<const FirearmClass> classes);

/// Distinct annotated firearm of an image; carried if any of its GT pairs is.
struct AnnotatedFirearm {
  Box bbox;
  FirearmClass cls = FirearmClass::kGun;
  bool carried = false;
};

std::vector<AnnotatedFirearm> annotated_firearms(const ImageRecord& record);

/// Aligned inputs for classification_accuracy, one entry per annotated firearm.
struct FirearmFlags {
  std::vector<bool> predicted;
  std::vector<bool> truth;
  std::vector<FirearmClass> classes;
};

/// Appends one entry per annotated firearm of `record`. The predicted flag is
/// that of the same-class detection with the highest IoU (>= iou_thresh);
/// unmatched annotated firearms count as predicted not carried.
void append_firearm_flags(const ImageRecord& record, std::span<const FirearmDecision> decisions,
                          FirearmFlags& out, double iou_thresh = 0.5);

}  // namespace pairhold
