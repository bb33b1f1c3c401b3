#include "pairhold/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pairhold/baselines.hpp"
#include "pairhold/detections_io.hpp"
#include "pairhold/errors.hpp"
#include "pairhold/geometry.hpp"
#include "pairhold/random.hpp"

namespace pairhold {

namespace {

constexpr double kProbFloor = 1e-12;

void require_box(const Box& box, const char* what) {
  if (!box.is_valid()) throw InvalidInputError(std::string("degenerate ") + what + " box");
}

std::string pair_name(const ImageRecord& record, const CandidatePair& pair) {
  return "image \"" + record.image_id + "\" pair (human " + std::to_string(pair.human_index) +
         ", firearm " + std::to_string(pair.firearm_index) + ")";
}

}  // namespace

FeatureVector extract_features(const CandidatePair& pair, std::span<const Keypoint> carrier_hands,
                               double frame_width, double frame_height) {
  require_box(pair.human_bbox, "human");
  require_box(pair.firearm_bbox, "firearm");
  require_box(pair.paired_bbox, "paired");
  if (!(frame_width > 0.0) || !(frame_height > 0.0)) {
    throw InvalidInputError("frame size must be positive");
  }
  const Box& h = pair.human_bbox;
  const Box& f = pair.firearm_bbox;
  const Box& p = pair.paired_bbox;

  FeatureVector x(kGeomFeatureDim, 0.0);
  x[feature::kIou] = iou(h, f);
  x[feature::kFirearmEnclosure] = enclosure(f, h);
  x[feature::kRelCenterX] = (f.center_x() - h.x1) / h.width();
  x[feature::kRelCenterY] = (f.center_y() - h.y1) / h.height();
  x[feature::kLogAreaRatio] = std::log(f.area() / h.area());
  x[feature::kHumanAspect] = h.width() / h.height();
  x[feature::kFirearmAspect] = f.width() / f.height();
  x[feature::kPairedAspect] = p.width() / p.height();
  x[feature::kIsGun] = pair.firearm_class == FirearmClass::kGun ? 1.0 : 0.0;
  x[feature::kIsRifle] = pair.firearm_class == FirearmClass::kRifle ? 1.0 : 0.0;

  const double diagonal = std::hypot(h.width(), h.height());
  double nearest = kNoHandDistance;
  std::size_t inside = 0;
  for (const auto& kp : carrier_hands) {
    const double d = std::hypot(kp.x - f.center_x(), kp.y - f.center_y()) / diagonal;
    nearest = std::min(nearest, d);
    if (contains(f, kp.x, kp.y)) ++inside;
  }
  x[feature::kHandDistance] = nearest;
  x[feature::kHandsInside] = static_cast<double>(inside) / 10.0;
  x[feature::kCenterOffsetX] = (f.center_x() - h.center_x()) / frame_width;
  x[feature::kCenterOffsetY] = (f.center_y() - h.center_y()) / frame_height;
  x[feature::kFirearmScore] = pair.firearm_score;
  x[feature::kHumanScore] = pair.human_score;
  return x;
}

FeatureVector extract_features(const ImageRecord& record, const CandidatePair& pair) {
  std::vector<Keypoint> hands;
  for (const auto& pose : record.poses) {
    if (link_pose_to_human(pose, record.humans) != pair.human_index) continue;
    hands.insert(hands.end(), pose.left_hand.begin(), pose.left_hand.end());
    hands.insert(hands.end(), pose.right_hand.begin(), pose.right_hand.end());
  }
  return extract_features(pair, hands, record.width, record.height);
}

ClassProbs softmax(std::array<double, 2> z) {
  if (!std::isfinite(z[0]) || !std::isfinite(z[1])) {
    throw NumericError("softmax: non-finite logits");
  }
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m);
  const double e1 = std::exp(z[1] - m);
  const double sum = e0 + e1;
  return ClassProbs{e0 / sum, e1 / sum};
}

std::array<double, 2> one_hot(bool carried) {
  return carried ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
}

double cross_entropy(const ClassProbs& p, std::array<double, 2> g) {
  const bool is_one_hot = (g[0] == 1.0 && g[1] == 0.0) || (g[0] == 0.0 && g[1] == 1.0);
  if (!is_one_hot) throw InvalidInputError("cross_entropy: target must be one-hot");
  const double pc = std::clamp(p.p_carried, kProbFloor, 1.0);
  const double pn = std::clamp(p.p_not_carried, kProbFloor, 1.0);
  // g is one-hot, so only the selected term contributes.
  return g[0] == 1.0 ? -std::log(pc) : -std::log(pn);
}

namespace {

// -log softmax(z)[target] via log-sum-exp, with the same floor as
// cross_entropy. Going through probabilities would lose every digit of a
// loss below ~1e-16 to the rounding of p near 1.
double logit_cross_entropy(std::array<double, 2> z, bool carried) {
  const double margin = carried ? z[1] - z[0] : z[0] - z[1];
  const double loss = margin > 0.0 ? margin + std::log1p(std::exp(-margin))
                                   : std::log1p(std::exp(margin));
  return std::min(loss, -std::log(kProbFloor));
}

}  // namespace

GeomPairModel GeomPairModel::zeros(std::size_t dim) {
  GeomPairModel m;
  m.weights.assign(2 * dim, 0.0);
  m.feature_means.assign(dim, 0.0);
  m.feature_stds.assign(dim, 1.0);
  return m;
}

void GeomPairModel::validate() const {
  const std::size_t d = feature_means.size();
  if (d == 0) throw InvalidInputError("model has zero feature dimension");
  if (feature_stds.size() != d || weights.size() != 2 * d) {
    throw InvalidInputError("model arrays have inconsistent dimensions");
  }
  for (double s : feature_stds) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidInputError("model feature stds must be strictly positive");
    }
  }
}

std::array<double, 2> logits(const GeomPairModel& model, std::span<const double> x) {
  const std::size_t d = model.dim();
  if (x.size() != d) {
    throw InvalidInputError("feature dimension " + std::to_string(x.size()) +
                            " does not match model dimension " + std::to_string(d));
  }
  std::array<double, 2> z = model.bias;
  for (std::size_t k = 0; k < d; ++k) {
    const double xs = (x[k] - model.feature_means[k]) / model.feature_stds[k];
    z[0] += model.weights[k] * xs;
    z[1] += model.weights[d + k] * xs;
  }
  return z;
}

ClassProbs score_pair(const GeomPairModel& model, std::span<const double> features) {
  return softmax(logits(model, features));
}

GeomPairModel fold_standardization(const GeomPairModel& model) {
  model.validate();
  const std::size_t d = model.dim();
  GeomPairModel out = GeomPairModel::zeros(d);
  out.bias = model.bias;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < d; ++k) {
      const double w = model.weights[c * d + k] / model.feature_stds[k];
      out.weights[c * d + k] = w;
      out.bias[c] -= w * model.feature_means[k];
    }
  }
  return out;
}

double mean_loss(const GeomPairModel& model, std::span<const LabeledSample> batch,
                 Gradient* grad) {
  const std::size_t d = model.dim();
  if (grad != nullptr) {
    grad->weights.assign(2 * d, 0.0);
    grad->bias = {0.0, 0.0};
  }
  if (batch.empty()) return 0.0;

  std::vector<double> xs(d);
  double total = 0.0;
  for (const auto& sample : batch) {
    if (sample.features.size() != d) {
      throw InvalidInputError("sample feature dimension does not match model");
    }
    for (std::size_t k = 0; k < d; ++k) {
      xs[k] = (sample.features[k] - model.feature_means[k]) / model.feature_stds[k];
    }
    const auto z = logits(model, sample.features);
    const ClassProbs p = softmax(z);
    const auto g = one_hot(sample.carried);
    total += logit_cross_entropy(z, sample.carried);
    if (grad != nullptr) {
      // d(-log softmax)/dz = p - g
      const double dz0 = p.p_carried - g[0];
      const double dz1 = p.p_not_carried - g[1];
      for (std::size_t k = 0; k < d; ++k) {
        grad->weights[k] += dz0 * xs[k];
        grad->weights[d + k] += dz1 * xs[k];
      }
      grad->bias[0] += dz0;
      grad->bias[1] += dz1;
    }
  }
  const double n = static_cast<double>(batch.size());
  if (grad != nullptr) {
    for (double& w : grad->weights) w /= n;
    grad->bias[0] /= n;
    grad->bias[1] /= n;
  }
  return total / n;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (dropout != 0.0) throw ConfigError("dropout is not supported by the linear pair model");
}

TrainResult train(std::span<const LabeledSample> samples, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw InvalidInputError("degenerate data: no training samples");
  const std::size_t d = samples.front().features.size();
  if (d == 0) throw InvalidInputError("degenerate data: empty feature vectors");
  std::size_t positives = 0;
  for (const auto& s : samples) {
    if (s.features.size() != d) throw InvalidInputError("training samples differ in dimension");
    if (!std::all_of(s.features.begin(), s.features.end(),
                     [](double v) { return std::isfinite(v); })) {
      throw InvalidInputError("training features must be finite");
    }
    if (s.carried) ++positives;
  }
  if (positives == 0 || positives == samples.size()) {
    throw InvalidInputError("degenerate data: training set contains a single class");
  }

  GeomPairModel model = GeomPairModel::zeros(d);
  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < d; ++k) model.feature_means[k] += s.features[k];
  }
  for (double& m : model.feature_means) m /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < d; ++k) {
      const double dev = s.features[k] - model.feature_means[k];
      var[k] += dev * dev;
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double sd = std::sqrt(var[k] / n);
    model.feature_stds[k] = sd > 1e-12 ? sd : 1.0;
  }

  TrainResult result;
  result.epoch_losses.push_back(mean_loss(model, samples));

  Rng rng(cfg.seed);
  std::vector<double> velocity_w(2 * d, 0.0);
  std::array<double, 2> velocity_b{0.0, 0.0};
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<LabeledSample> batch;
  Gradient grad;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      try {
        mean_loss(model, batch, &grad);
      } catch (const NumericError&) {
        throw DivergenceError("training diverged in epoch " + std::to_string(epoch + 1) +
                              " (non-finite logits); lower the learning rate");
      }
      for (std::size_t k = 0; k < 2 * d; ++k) {
        velocity_w[k] = cfg.momentum * velocity_w[k] - cfg.learning_rate * grad.weights[k];
        model.weights[k] += velocity_w[k];
      }
      for (std::size_t c = 0; c < 2; ++c) {
        velocity_b[c] = cfg.momentum * velocity_b[c] - cfg.learning_rate * grad.bias[c];
        model.bias[c] += velocity_b[c];
      }
    }
    bool finite = std::all_of(model.weights.begin(), model.weights.end(),
                              [](double w) { return std::isfinite(w); }) &&
                  std::isfinite(model.bias[0]) && std::isfinite(model.bias[1]);
    double loss = std::numeric_limits<double>::quiet_NaN();
    if (finite) {
      try {
        loss = mean_loss(model, samples);
      } catch (const NumericError&) {
        finite = false;
      }
    }
    if (!finite || !std::isfinite(loss)) {
      throw DivergenceError("training diverged in epoch " + std::to_string(epoch + 1) +
                            " (non-finite loss); lower the learning rate");
    }
    result.epoch_losses.push_back(loss);
  }
  result.model = std::move(model);
  return result;
}

namespace {

void append_row(std::string& out, std::span<const double> values) {
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", values[i]);
    if (i > 0) out += ' ';
    out += buf;
  }
  out += '\n';
}

std::vector<double> parse_row(const std::string& line, std::size_t expected, int line_no) {
  std::istringstream in(line);
  in.imbue(std::locale::classic());
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw FormatError("model line " + std::to_string(line_no) + ": bad number \"" + token + "\"");
    }
    values.push_back(v);
  }
  if (values.size() != expected) {
    throw FormatError("model line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expected) + " values, found " +
                      std::to_string(values.size()));
  }
  return values;
}

}  // namespace

std::string format_model(const GeomPairModel& model) {
  model.validate();
  const std::size_t d = model.dim();
  std::string out = "geom_pair_model " + std::to_string(d) + "\n";
  append_row(out, model.feature_means);
  append_row(out, model.feature_stds);
  append_row(out, std::span<const double>(model.weights).subspan(0, d));
  append_row(out, std::span<const double>(model.weights).subspan(d, d));
  append_row(out, model.bias);
  return out;
}

GeomPairModel parse_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model file is empty");
  std::istringstream header(line);
  std::string tag;
  long long dim = 0;
  if (!(header >> tag >> dim) || tag != "geom_pair_model" || dim <= 0) {
    throw FormatError("model header must read \"geom_pair_model <dim>\"");
  }
  const auto d = static_cast<std::size_t>(dim);
  std::vector<std::vector<double>> rows;
  const std::size_t expected[] = {d, d, d, d, 2};
  for (int i = 0; i < 5; ++i) {
    if (!std::getline(in, line)) throw FormatError("model file is truncated");
    rows.push_back(parse_row(line, expected[i], i + 2));
  }
  GeomPairModel model;
  model.feature_means = rows[0];
  model.feature_stds = rows[1];
  model.weights = rows[2];
  model.weights.insert(model.weights.end(), rows[3].begin(), rows[3].end());
  model.bias = {rows[4][0], rows[4][1]};
  try {
    model.validate();
  } catch (const InvalidInputError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return model;
}

void save_model(const GeomPairModel& model, const std::filesystem::path& path) {
  write_text_file(path, format_model(model));
}

GeomPairModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path));
}

ModelScorer::ModelScorer(GeomPairModel model) : model_(std::move(model)) { model_.validate(); }

double ModelScorer::score(const ImageRecord& record, const CandidatePair& pair) const {
  return score_pair(model_, extract_features(record, pair)).p_carried;
}

ExternalScorer::ExternalScorer(std::vector<PairPrediction> predictions, double tolerance)
    : tolerance_(tolerance) {
  for (auto& p : predictions) by_image_[p.image_id].push_back(std::move(p));
}

double ExternalScorer::score(const ImageRecord& record, const CandidatePair& pair) const {
  auto it = by_image_.find(record.image_id);
  if (it == by_image_.end()) return 0.0;
  auto near = [this](const Box& a, const Box& b) {
    return std::fabs(a.x1 - b.x1) <= tolerance_ && std::fabs(a.y1 - b.y1) <= tolerance_ &&
           std::fabs(a.x2 - b.x2) <= tolerance_ && std::fabs(a.y2 - b.y2) <= tolerance_;
  };
  double best = 0.0;
  for (const auto& p : it->second) {
    if (p.firearm_class == pair.firearm_class && near(p.human_bbox, pair.human_bbox) &&
        near(p.firearm_bbox, pair.firearm_bbox)) {
      best = std::max(best, p.score);
    }
  }
  return best;
}

std::vector<PairPrediction> hfpd_predict(const ImageRecord& record, const PairScorer& scorer,
                                         double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("decision threshold must lie in [0, 1]");
  }
  std::vector<PairPrediction> out;
  for (const auto& pair : enumerate_pairs(record)) {
    double p = 0.0;
    try {
      p = scorer.score(record, pair);
    } catch (const std::exception& e) {
      throw ScorerError(pair_name(record, pair) + ": " + e.what());
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ScorerError(pair_name(record, pair) + ": score outside [0, 1]");
    }
    if (p >= threshold) {
      out.push_back(PairPrediction{record.image_id, pair.human_bbox, pair.firearm_bbox,
                                   pair.firearm_class, p});
    }
  }
  return out;
}

bool pair_is_carried(const CandidatePair& pair, std::span<const GroundTruthPair> gts,
                     double iou_thresh) {
  return std::any_of(gts.begin(), gts.end(), [&](const GroundTruthPair& gt) {
    return gt.carried && gt.firearm_class == pair.firearm_class &&
           iou(pair.human_bbox, gt.human_bbox) >= iou_thresh &&
           iou(pair.firearm_bbox, gt.firearm_bbox) >= iou_thresh;
  });
}

std::vector<LabeledSample> labeled_samples(const ImageRecord& record, double iou_thresh) {
  std::vector<LabeledSample> out;
  for (const auto& pair : enumerate_pairs(record)) {
    out.push_back({extract_features(record, pair),
                   pair_is_carried(pair, record.gt_pairs, iou_thresh)});
  }
  return out;
}

DatasetSplit split_dataset(std::span<const ImageRecord> records, double train_ratio,
                           std::uint64_t seed) {
  if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) {
    throw ConfigError("split ratio must lie in [0, 1]");
  }
  Rng rng(seed);
  const auto order = rng.permutation(records.size());
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_ratio * static_cast<double>(records.size())));
  std::vector<bool> in_train(records.size(), false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
  DatasetSplit split;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(records[i]);
  }
  return split;
}

}  // namespace pairhold
