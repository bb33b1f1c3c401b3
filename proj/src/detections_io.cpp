#include "pairhold/detections_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pairhold/errors.hpp"
#include "pairhold/json_format.hpp"

namespace pairhold {

using Json = nlohmann::json;

std::string_view to_string(FirearmClass cls) {
  return cls == FirearmClass::kGun ? "gun" : "rifle";
}

std::optional<FirearmClass> parse_firearm_class(std::string_view text) {
  if (text == "gun") return FirearmClass::kGun;
  if (text == "rifle") return FirearmClass::kRifle;
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kSchema: return "schema";
    case ViolationKind::kRange: return "range";
    case ViolationKind::kGeometry: return "geometry";
    case ViolationKind::kReference: return "reference";
    case ViolationKind::kDuplicate: return "duplicate";
    case ViolationKind::kClip: return "clip";
  }
  return "unknown";
}

std::string_view to_string(Severity severity) {
  return severity == Severity::kError ? "error" : "warning";
}

bool Dataset::has_errors() const {
  return std::any_of(issues.begin(), issues.end(), [](const LoadIssue& issue) {
    return issue.violation.severity == Severity::kError;
  });
}

namespace {

std::string indexed(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

bool is_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// Walks a parsed JSON value and collects schema violations with field paths.
class RecordParser {
 public:
  explicit RecordParser(std::vector<Violation>& issues) : issues_(issues) {}

  bool ok() const { return ok_; }

  void fail(std::string path, std::string message) {
    ok_ = false;
    issues_.push_back(Violation{std::move(path), ViolationKind::kSchema,
                                Severity::kError, std::move(message)});
  }

  const Json* field(const Json& obj, const char* key, const std::string& path,
                    bool required = true) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  double number(const Json& obj, const char* key, const std::string& path) {
    const Json* v = field(obj, key, path);
    if (v == nullptr) return 0.0;
    if (!v->is_number()) {
      fail(path, "expected a number");
      return 0.0;
    }
    return v->get<double>();
  }

  std::string string(const Json& obj, const char* key, const std::string& path) {
    const Json* v = field(obj, key, path);
    if (v == nullptr) return {};
    if (!v->is_string()) {
      fail(path, "expected a string");
      return {};
    }
    return v->get<std::string>();
  }

  Box box(const Json& obj, const char* key, const std::string& path) {
    const Json* v = field(obj, key, path);
    if (v == nullptr) return {};
    if (!v->is_array() || v->size() != 4 ||
        !std::all_of(v->begin(), v->end(), [](const Json& e) { return e.is_number(); })) {
      fail(path, "expected [x1, y1, x2, y2] of numbers");
      return {};
    }
    return Box{(*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>(),
               (*v)[3].get<double>()};
  }

  FirearmClass firearm_class(const Json& obj, const char* key, const std::string& path) {
    const Json* v = field(obj, key, path);
    if (v == nullptr) return FirearmClass::kGun;
    if (!v->is_string()) {
      fail(path, "expected \"gun\" or \"rifle\"");
      return FirearmClass::kGun;
    }
    const auto text = v->get<std::string>();
    auto cls = parse_firearm_class(text);
    if (!cls) {
      fail(path, "unknown firearm class \"" + text + "\" (expected gun or rifle)");
      return FirearmClass::kGun;
    }
    return *cls;
  }

  // Calls fn(element, path) for each element of an array field.
  template <typename Fn>
  void array(const Json& obj, const char* key, const std::string& path,
             bool required, Fn&& fn) {
    const Json* v = field(obj, key, path, required);
    if (v == nullptr) return;
    if (!v->is_array()) {
      fail(path, "expected an array");
      return;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      const Json& element = (*v)[i];
      const std::string element_path = indexed(path, i);
      if (!element.is_object()) {
        fail(element_path, "expected an object");
        continue;
      }
      fn(element, element_path);
    }
  }

  std::vector<Keypoint> keypoints(const Json& obj, const char* key, const std::string& path) {
    std::vector<Keypoint> out;
    array(obj, key, path, false, [&](const Json& kp, const std::string& p) {
      Keypoint k;
      k.name = string(kp, "name", p + ".name");
      k.x = number(kp, "x", p + ".x");
      k.y = number(kp, "y", p + ".y");
      k.confidence = number(kp, "confidence", p + ".confidence");
      out.push_back(std::move(k));
    });
    return out;
  }

 private:
  std::vector<Violation>& issues_;
  bool ok_ = true;
};

void check_box(const Box& box, const std::string& path, double width, double height,
               bool frame_known, std::vector<Violation>& out) {
  if (!box.is_valid()) {
    out.push_back({path, ViolationKind::kGeometry, Severity::kError,
                   "box must satisfy x2 > x1 and y2 > y1"});
    return;
  }
  if (!frame_known) return;
  if (box.x1 >= 0.0 && box.y1 >= 0.0 && box.x2 <= width && box.y2 <= height) return;
  if (!clip_to_frame(box, width, height).is_valid()) {
    out.push_back({path, ViolationKind::kGeometry, Severity::kError,
                   "box lies entirely outside the image frame"});
    return;
  }
  out.push_back({path, ViolationKind::kClip, Severity::kWarning,
                 "box exceeds the image frame and is clipped"});
}

void check_score(double score, const std::string& path, std::vector<Violation>& out) {
  if (!is_unit_interval(score)) {
    std::ostringstream msg;
    msg << "value " << score << " outside [0, 1]";
    out.push_back({path, ViolationKind::kRange, Severity::kError, msg.str()});
  }
}

void check_keypoints(const std::vector<Keypoint>& kps, const std::string& path,
                     std::vector<Violation>& out) {
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const std::string p = indexed(path, i);
    if (!std::isfinite(kps[i].x) || !std::isfinite(kps[i].y)) {
      out.push_back({p, ViolationKind::kRange, Severity::kError,
                     "keypoint coordinates must be finite"});
    }
    check_score(kps[i].confidence, p + ".confidence", out);
  }
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t'; });
}

std::string format_keypoints(const std::vector<Keypoint>& kps) {
  std::string out = "[";
  for (std::size_t i = 0; i < kps.size(); ++i) {
    if (i > 0) out += ",";
    out += "{\"name\":" + json::quote(kps[i].name) + ",\"x\":" + json::fixed6(kps[i].x) +
           ",\"y\":" + json::fixed6(kps[i].y) +
           ",\"confidence\":" + json::fixed6(kps[i].confidence) + "}";
  }
  return out + "]";
}

}  // namespace

std::vector<Violation> validate_record(const ImageRecord& record) {
  std::vector<Violation> out;
  if (record.image_id.empty()) {
    out.push_back({"image_id", ViolationKind::kSchema, Severity::kError,
                   "image_id must be non-empty"});
  }
  const bool frame_known = std::isfinite(record.width) && std::isfinite(record.height) &&
                           record.width > 0.0 && record.height > 0.0;
  if (!(std::isfinite(record.width) && record.width > 0.0)) {
    out.push_back({"width", ViolationKind::kRange, Severity::kError, "width must be positive"});
  }
  if (!(std::isfinite(record.height) && record.height > 0.0)) {
    out.push_back({"height", ViolationKind::kRange, Severity::kError, "height must be positive"});
  }
  for (std::size_t i = 0; i < record.humans.size(); ++i) {
    const std::string p = indexed("humans", i);
    check_box(record.humans[i].bbox, p + ".bbox", record.width, record.height, frame_known, out);
    check_score(record.humans[i].score, p + ".score", out);
  }
  for (std::size_t i = 0; i < record.firearms.size(); ++i) {
    const std::string p = indexed("firearms", i);
    check_box(record.firearms[i].bbox, p + ".bbox", record.width, record.height, frame_known, out);
    check_score(record.firearms[i].score, p + ".score", out);
  }
  for (std::size_t i = 0; i < record.poses.size(); ++i) {
    const std::string p = indexed("poses", i);
    const auto& pose = record.poses[i];
    if (pose.human_index && *pose.human_index >= record.humans.size()) {
      out.push_back({p + ".human_index", ViolationKind::kReference, Severity::kError,
                     "human_index " + std::to_string(*pose.human_index) +
                         " out of range for " + std::to_string(record.humans.size()) +
                         " humans"});
    }
    check_keypoints(pose.body, p + ".body", out);
    check_keypoints(pose.left_hand, p + ".left_hand", out);
    check_keypoints(pose.right_hand, p + ".right_hand", out);
  }
  for (std::size_t i = 0; i < record.gt_pairs.size(); ++i) {
    const std::string p = indexed("gt_pairs", i);
    check_box(record.gt_pairs[i].human_bbox, p + ".human_bbox", record.width, record.height,
              frame_known, out);
    check_box(record.gt_pairs[i].firearm_bbox, p + ".firearm_bbox", record.width,
              record.height, frame_known, out);
  }
  return out;
}

ImageRecord clip_record(const ImageRecord& record) {
  ImageRecord out = record;
  const double w = record.width;
  const double h = record.height;
  for (auto& human : out.humans) human.bbox = clip_to_frame(human.bbox, w, h);
  for (auto& firearm : out.firearms) firearm.bbox = clip_to_frame(firearm.bbox, w, h);
  for (auto& gt : out.gt_pairs) {
    gt.human_bbox = clip_to_frame(gt.human_bbox, w, h);
    gt.firearm_bbox = clip_to_frame(gt.firearm_bbox, w, h);
  }
  return out;
}

std::optional<ImageRecord> parse_record_line(std::string_view line,
                                             std::vector<Violation>& issues) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::parse_error& e) {
    issues.push_back({"", ViolationKind::kSchema, Severity::kError,
                      std::string("malformed JSON: ") + e.what()});
    return std::nullopt;
  }
  if (!doc.is_object()) {
    issues.push_back({"", ViolationKind::kSchema, Severity::kError,
                      "record must be a JSON object"});
    return std::nullopt;
  }

  RecordParser parser(issues);
  ImageRecord record;
  record.image_id = parser.string(doc, "image_id", "image_id");
  record.width = parser.number(doc, "width", "width");
  record.height = parser.number(doc, "height", "height");

  parser.array(doc, "humans", "humans", true, [&](const Json& obj, const std::string& p) {
    HumanDetection h;
    h.bbox = parser.box(obj, "bbox", p + ".bbox");
    h.score = parser.number(obj, "score", p + ".score");
    record.humans.push_back(h);
  });
  parser.array(doc, "firearms", "firearms", true, [&](const Json& obj, const std::string& p) {
    FirearmDetection f;
    f.bbox = parser.box(obj, "bbox", p + ".bbox");
    f.cls = parser.firearm_class(obj, "class", p + ".class");
    f.score = parser.number(obj, "score", p + ".score");
    record.firearms.push_back(f);
  });
  parser.array(doc, "poses", "poses", false, [&](const Json& obj, const std::string& p) {
    PoseEstimate pose;
    if (const Json* idx = parser.field(obj, "human_index", p + ".human_index", false);
        idx != nullptr && !idx->is_null()) {
      if (idx->is_number_integer() && idx->get<long long>() >= 0) {
        pose.human_index = idx->get<std::size_t>();
      } else {
        parser.fail(p + ".human_index", "expected a non-negative integer or null");
      }
    }
    pose.body = parser.keypoints(obj, "body", p + ".body");
    pose.left_hand = parser.keypoints(obj, "left_hand", p + ".left_hand");
    pose.right_hand = parser.keypoints(obj, "right_hand", p + ".right_hand");
    record.poses.push_back(std::move(pose));
  });
  parser.array(doc, "gt_pairs", "gt_pairs", false, [&](const Json& obj, const std::string& p) {
    GroundTruthPair gt;
    gt.human_bbox = parser.box(obj, "human_bbox", p + ".human_bbox");
    gt.firearm_bbox = parser.box(obj, "firearm_bbox", p + ".firearm_bbox");
    gt.firearm_class = parser.firearm_class(obj, "firearm_class", p + ".firearm_class");
    const Json* carried = parser.field(obj, "carried", p + ".carried");
    if (carried != nullptr) {
      if (carried->is_boolean()) {
        gt.carried = carried->get<bool>();
      } else if (carried->is_number_integer() &&
                 (carried->get<long long>() == 0 || carried->get<long long>() == 1)) {
        gt.carried = carried->get<long long>() == 1;
      } else {
        parser.fail(p + ".carried", "expected 0 or 1");
      }
    }
    record.gt_pairs.push_back(gt);
  });

  if (!parser.ok()) return std::nullopt;
  return record;
}

Dataset parse_dataset(std::string_view text) {
  Dataset dataset;
  std::set<std::string> seen_ids;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (is_blank(lines[n])) continue;
    const std::size_t line_no = n + 1;

    std::vector<Violation> violations;
    auto record = parse_record_line(lines[n], violations);
    if (!record) {
      for (auto& v : violations) dataset.issues.push_back({line_no, {}, std::move(v)});
      continue;
    }
    violations = validate_record(*record);
    if (!record->image_id.empty() && !seen_ids.insert(record->image_id).second) {
      violations.push_back({"image_id", ViolationKind::kDuplicate, Severity::kError,
                            "image_id \"" + record->image_id + "\" already used"});
    }
    const bool rejected = std::any_of(violations.begin(), violations.end(), [](const auto& v) {
      return v.severity == Severity::kError;
    });
    for (auto& v : violations) {
      dataset.issues.push_back({line_no, record->image_id, std::move(v)});
    }
    if (!rejected) dataset.records.push_back(clip_record(*record));
  }
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_text_file(path));
}

std::string format_record(const ImageRecord& r) {
  std::string out = "{\"image_id\":" + json::quote(r.image_id) +
                    ",\"width\":" + json::fixed6(r.width) +
                    ",\"height\":" + json::fixed6(r.height) + ",\"humans\":[";
  for (std::size_t i = 0; i < r.humans.size(); ++i) {
    if (i > 0) out += ",";
    out += "{\"bbox\":" + json::box(r.humans[i].bbox) +
           ",\"score\":" + json::fixed6(r.humans[i].score) + "}";
  }
  out += "],\"firearms\":[";
  for (std::size_t i = 0; i < r.firearms.size(); ++i) {
    if (i > 0) out += ",";
    out += "{\"bbox\":" + json::box(r.firearms[i].bbox) + ",\"class\":" +
           json::quote(to_string(r.firearms[i].cls)) +
           ",\"score\":" + json::fixed6(r.firearms[i].score) + "}";
  }
  out += "],\"poses\":[";
  for (std::size_t i = 0; i < r.poses.size(); ++i) {
    const auto& pose = r.poses[i];
    if (i > 0) out += ",";
    out += "{\"human_index\":";
    out += pose.human_index ? std::to_string(*pose.human_index) : "null";
    out += ",\"body\":" + format_keypoints(pose.body) +
           ",\"left_hand\":" + format_keypoints(pose.left_hand) +
           ",\"right_hand\":" + format_keypoints(pose.right_hand) + "}";
  }
  out += "],\"gt_pairs\":[";
  for (std::size_t i = 0; i < r.gt_pairs.size(); ++i) {
    const auto& gt = r.gt_pairs[i];
    if (i > 0) out += ",";
    out += "{\"human_bbox\":" + json::box(gt.human_bbox) +
           ",\"firearm_bbox\":" + json::box(gt.firearm_bbox) +
           ",\"firearm_class\":" + json::quote(to_string(gt.firearm_class)) +
           ",\"carried\":" + (gt.carried ? "1" : "0") + "}";
  }
  out += "]}";
  return out;
}

void save_dataset(const std::vector<ImageRecord>& records, const std::filesystem::path& path) {
  std::string text;
  for (const auto& r : records) text += format_record(r) + "\n";
  write_text_file(path, text);
}

std::string format_prediction(const PairPrediction& p) {
  return "{\"image_id\":" + json::quote(p.image_id) +
         ",\"human_bbox\":" + json::box(p.human_bbox) +
         ",\"firearm_bbox\":" + json::box(p.firearm_bbox) +
         ",\"firearm_class\":" + json::quote(to_string(p.firearm_class)) +
         ",\"score\":" + json::fixed6(p.score) + "}";
}

PairPrediction parse_prediction_line(std::string_view line) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("prediction must be a JSON object");

  std::vector<Violation> issues;
  RecordParser parser(issues);
  PairPrediction pred;
  pred.image_id = parser.string(doc, "image_id", "image_id");
  pred.human_bbox = parser.box(doc, "human_bbox", "human_bbox");
  pred.firearm_bbox = parser.box(doc, "firearm_bbox", "firearm_bbox");
  pred.firearm_class = parser.firearm_class(doc, "firearm_class", "firearm_class");
  pred.score = parser.number(doc, "score", "score");
  if (parser.ok()) {
    if (pred.image_id.empty()) {
      issues.push_back({"image_id", ViolationKind::kSchema, Severity::kError,
                        "image_id must be non-empty"});
    }
    if (!pred.human_bbox.is_valid()) {
      issues.push_back({"human_bbox", ViolationKind::kGeometry, Severity::kError,
                        "box must satisfy x2 > x1 and y2 > y1"});
    }
    if (!pred.firearm_bbox.is_valid()) {
      issues.push_back({"firearm_bbox", ViolationKind::kGeometry, Severity::kError,
                        "box must satisfy x2 > x1 and y2 > y1"});
    }
    check_score(pred.score, "score", issues);
  }
  if (!issues.empty()) {
    throw FormatError(issues.front().field_path + ": " + issues.front().message);
  }
  return pred;
}

void save_predictions(const std::vector<PairPrediction>& preds,
                      const std::filesystem::path& path) {
  std::string text;
  for (const auto& p : preds) text += format_prediction(p) + "\n";
  write_text_file(path, text);
}

std::vector<PairPrediction> load_predictions(const std::filesystem::path& path) {
  const auto lines = split_lines(read_text_file(path));
  std::vector<PairPrediction> preds;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (is_blank(lines[n])) continue;
    try {
      preds.push_back(parse_prediction_line(lines[n]));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return preds;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("error while writing " + path.string());
}

}  // namespace pairhold
