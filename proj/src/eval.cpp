#include "pairhold/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "pairhold/errors.hpp"
#include "pairhold/geometry.hpp"
#include "pairhold/json_format.hpp"

namespace pairhold {

GroundTruthIndex index_ground_truth(std::span<const ImageRecord> records) {
  GroundTruthIndex index;
  for (const auto& r : records) {
    auto& list = index[r.image_id];
    list.insert(list.end(), r.gt_pairs.begin(), r.gt_pairs.end());
  }
  return index;
}

namespace {

auto box_key(const Box& b) { return std::tie(b.x1, b.y1, b.x2, b.y2); }

void finalize_stats(ApStats& stats, const std::vector<bool>& flags,
                    const std::vector<double>& scores) {
  stats.ap = average_precision(flags, stats.positives);
  stats.tp = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  stats.fp = flags.size() - stats.tp;
  stats.fn = stats.positives - stats.tp;
  stats.curve.clear();
  std::size_t tp = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) ++tp;
    const double recall =
        stats.positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(stats.positives);
    stats.curve.push_back({recall, static_cast<double>(tp) / static_cast<double>(i + 1), scores[i]});
  }
}

std::string percent(double ap) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * ap);
  return buf;
}

std::string stats_json(const ApStats& s) {
  std::string out = "{\"ap\":" + json::fixed6(s.ap) +
                    ",\"positives\":" + std::to_string(s.positives) +
                    ",\"tp\":" + std::to_string(s.tp) + ",\"fp\":" + std::to_string(s.fp) +
                    ",\"fn\":" + std::to_string(s.fn) + ",\"pr_curve\":[";
  for (std::size_t i = 0; i < s.curve.size(); ++i) {
    if (i > 0) out += ",";
    out += "[" + json::fixed6(s.curve[i].recall) + "," + json::fixed6(s.curve[i].precision) +
           "," + json::fixed6(s.curve[i].score) + "]";
  }
  return out + "]}";
}

}  // namespace

bool ranks_before(const PairPrediction& a, const PairPrediction& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.image_id != b.image_id) return a.image_id < b.image_id;
  if (box_key(a.human_bbox) != box_key(b.human_bbox)) {
    return box_key(a.human_bbox) < box_key(b.human_bbox);
  }
  if (box_key(a.firearm_bbox) != box_key(b.firearm_bbox)) {
    return box_key(a.firearm_bbox) < box_key(b.firearm_bbox);
  }
  return a.firearm_class < b.firearm_class;
}

std::vector<std::size_t> rank_predictions(std::span<const PairPrediction> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(preds[a], preds[b]);
  });
  return order;
}

MatchResult match_pairs(std::span<const PairPrediction> preds, const GroundTruthIndex& gts,
                        double iou_thresh) {
  MatchResult result;
  result.ranking = rank_predictions(preds);
  std::map<std::string, std::vector<bool>> claimed;
  for (const auto& [id, list] : gts) claimed[id].assign(list.size(), false);

  for (std::size_t idx : result.ranking) {
    const PairPrediction& pred = preds[idx];
    std::optional<std::size_t> best;
    double best_quality = -1.0;
    auto it = gts.find(pred.image_id);
    if (it != gts.end()) {
      const auto& list = it->second;
      auto& taken = claimed[pred.image_id];
      for (std::size_t g = 0; g < list.size(); ++g) {
        const auto& gt = list[g];
        if (taken[g] || !gt.carried || gt.firearm_class != pred.firearm_class) continue;
        const double iou_h = iou(pred.human_bbox, gt.human_bbox);
        const double iou_f = iou(pred.firearm_bbox, gt.firearm_bbox);
        if (iou_h < iou_thresh || iou_f < iou_thresh) continue;
        const double quality = std::min(iou_h, iou_f);
        if (quality > best_quality) {
          best = g;
          best_quality = quality;
        }
      }
      if (best) taken[*best] = true;
    }
    result.is_tp.push_back(best.has_value());
    result.matched_gt.push_back(best);
  }
  return result;
}

double average_precision(const std::vector<bool>& flags, std::size_t num_gt_positives) {
  if (num_gt_positives == 0) return flags.empty() ? 1.0 : 0.0;
  const std::size_t n = flags.size();
  if (n == 0) return 0.0;
  const double positives = static_cast<double>(num_gt_positives);

  std::vector<double> recall(n);
  std::vector<double> precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i]) ++tp;
    recall[i] = static_cast<double>(tp) / positives;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Precision envelope: best precision at this recall or beyond.
  for (std::size_t i = n - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return std::clamp(ap, 0.0, 1.0);
}

EvalReport evaluate(std::span<const PairPrediction> preds, const GroundTruthIndex& gts,
                    double iou_thresh, EvalMode mode) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) {
    throw ConfigError("IoU threshold must lie in (0, 1]");
  }
  if (mode == EvalMode::kStrict) {
    for (const auto& p : preds) {
      if (gts.find(p.image_id) == gts.end()) {
        throw InvalidInputError("prediction for image \"" + p.image_id +
                                "\" has no ground-truth record");
      }
    }
  }

  EvalReport report;
  report.iou_thresh = iou_thresh;
  for (const auto& [id, list] : gts) {
    for (const auto& gt : list) {
      if (!gt.carried) continue;
      ++report.pooled.positives;
      (gt.firearm_class == FirearmClass::kGun ? report.gun : report.rifle).positives++;
    }
  }

  const MatchResult match = match_pairs(preds, gts, iou_thresh);
  std::vector<bool> pooled_flags, gun_flags, rifle_flags;
  std::vector<double> pooled_scores, gun_scores, rifle_scores;
  for (std::size_t r = 0; r < match.ranking.size(); ++r) {
    const auto& pred = preds[match.ranking[r]];
    const bool tp = match.is_tp[r];
    pooled_flags.push_back(tp);
    pooled_scores.push_back(pred.score);
    if (pred.firearm_class == FirearmClass::kGun) {
      gun_flags.push_back(tp);
      gun_scores.push_back(pred.score);
    } else {
      rifle_flags.push_back(tp);
      rifle_scores.push_back(pred.score);
    }
  }
  finalize_stats(report.gun, gun_flags, gun_scores);
  finalize_stats(report.rifle, rifle_flags, rifle_scores);
  finalize_stats(report.pooled, pooled_flags, pooled_scores);
  return report;
}

std::string format_report_json(const EvalReport& report) {
  return "{\"iou_thresh\":" + json::fixed6(report.iou_thresh) +
         ",\"ap_ghold\":" + json::fixed6(report.ap_ghold()) +
         ",\"ap_rhold\":" + json::fixed6(report.ap_rhold()) +
         ",\"ap_hold\":" + json::fixed6(report.ap_hold()) + ",\"gun\":" + stats_json(report.gun) +
         ",\"rifle\":" + stats_json(report.rifle) + ",\"pooled\":" + stats_json(report.pooled) +
         "}";
}

std::string format_ap_table(std::span<const ApTableRow> rows) {
  const std::vector<std::string> header = {"Methods", "Backbone", "AP_Ghold", "AP_Rhold",
                                           "AP_hold"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    cells.push_back({row.method, row.backbone, percent(row.report->ap_ghold()),
                     percent(row.report->ap_rhold()), percent(row.report->ap_hold())});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  auto render = [&](const std::vector<std::string>& line) {
    std::string out;
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out += " | ";
      const std::string pad(width[c] - line[c].size(), ' ');
      // Text columns left-aligned, metric columns right-aligned.
      out += c < 2 ? line[c] + pad : pad + line[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string rule;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c > 0) rule += "-+-";
    rule += std::string(width[c], '-');
  }
  std::string out = render(header) + rule + "\n";
  for (const auto& line : cells) out += render(line);
  return out;
}

ClassificationAccuracy classification_accuracy(const std::vector<bool>& predicted,
                                               const std::vector<bool>& truth,
                                               std::span<const FirearmClass> classes) {
  if (predicted.size() != truth.size() || truth.size() != classes.size()) {
    throw InvalidInputError("classification_accuracy: inputs differ in length");
  }
  std::size_t correct[2] = {0, 0};
  std::size_t total[2] = {0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t c = classes[i] == FirearmClass::kGun ? 0 : 1;
    ++total[c];
    if (predicted[i] == truth[i]) ++correct[c];
  }
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return ClassificationAccuracy{ratio(correct[0], total[0]), ratio(correct[1], total[1]),
                                ratio(correct[0] + correct[1], total[0] + total[1])};
}

std::vector<AnnotatedFirearm> annotated_firearms(const ImageRecord& record) {
  std::vector<AnnotatedFirearm> out;
  for (const auto& gt : record.gt_pairs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AnnotatedFirearm& a) {
      return a.bbox == gt.firearm_bbox && a.cls == gt.firearm_class;
    });
    if (it == out.end()) {
      out.push_back({gt.firearm_bbox, gt.firearm_class, gt.carried});
    } else {
      it->carried = it->carried || gt.carried;
    }
  }
  return out;
}

void append_firearm_flags(const ImageRecord& record, std::span<const FirearmDecision> decisions,
                          FirearmFlags& out, double iou_thresh) {
  for (const auto& annotated : annotated_firearms(record)) {
    bool predicted = false;
    double best_iou = -1.0;
    for (const auto& d : decisions) {
      const auto& det = record.firearms.at(d.firearm_index);
      if (det.cls != annotated.cls) continue;
      const double overlap = iou(det.bbox, annotated.bbox);
      if (overlap >= iou_thresh && overlap > best_iou) {
        best_iou = overlap;
        predicted = d.carried;
      }
    }
    out.predicted.push_back(predicted);
    out.truth.push_back(annotated.carried);
    out.classes.push_back(annotated.cls);
  }
}

}  // namespace pairhold
