#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pairhold/pairing.hpp"
#include "pairhold/records.hpp"

namespace pairhold {

// ---------------------------------------------------------------------------
// Geometric pair features
// ---------------------------------------------------------------------------

inline constexpr std::size_t kGeomFeatureDim = 16;

using FeatureVector = std::vector<double>;

/// Layout of the geometric feature vector.
namespace feature {
inline constexpr std::size_t kIou = 0;                // iou(human, firearm)
inline constexpr std::size_t kFirearmEnclosure = 1;   // share of firearm inside human
inline constexpr std::size_t kRelCenterX = 2;         // firearm center in human box coords
inline constexpr std::size_t kRelCenterY = 3;
inline constexpr std::size_t kLogAreaRatio = 4;       // log(area firearm / area human)
inline constexpr std::size_t kHumanAspect = 5;        // width / height
inline constexpr std::size_t kFirearmAspect = 6;
inline constexpr std::size_t kPairedAspect = 7;
inline constexpr std::size_t kIsGun = 8;
inline constexpr std::size_t kIsRifle = 9;
inline constexpr std::size_t kHandDistance = 10;      // see kNoHandDistance
inline constexpr std::size_t kHandsInside = 11;       // count / 10
inline constexpr std::size_t kCenterOffsetX = 12;     // (firearm - human) center / frame
inline constexpr std::size_t kCenterOffsetY = 13;
inline constexpr std::size_t kFirearmScore = 14;
inline constexpr std::size_t kHumanScore = 15;
}  // namespace feature

/// Hand-distance value when the human has no hand keypoints; also the cap of
/// the feature (distance is measured in human-box diagonals).
inline constexpr double kNoHandDistance = 2.0;

/// Features of one pair given the hand keypoints attributed to its human.
/// Throws InvalidInputError on degenerate boxes or frame.
FeatureVector extract_features(const CandidatePair& pair, std::span<const Keypoint> carrier_hands,
                               double frame_width, double frame_height);

/// Same, attributing to the pair's human the hands of every pose linked to it
/// (see link_pose_to_human).
FeatureVector extract_features(const ImageRecord& record, const CandidatePair& pair);

// ---------------------------------------------------------------------------
// Probabilities and loss
// ---------------------------------------------------------------------------

/// Class order everywhere: index 0 = carried, index 1 = not carried.
struct ClassProbs {
  double p_carried = 0.5;
  double p_not_carried = 0.5;
};

/// Max-subtracted softmax. Throws NumericError on non-finite logits.
ClassProbs softmax(std::array<double, 2> logits);

std::array<double, 2> one_hot(bool carried);

/// -sum_j g_j log(p_j) with p clamped to [1e-12, 1].
/// Throws InvalidInputError unless `target` is (1,0) or (0,1).
double cross_entropy(const ClassProbs& p, std::array<double, 2> target);

// ---------------------------------------------------------------------------
// Linear-softmax pair model
// ---------------------------------------------------------------------------

/// logits = weights * ((x - feature_means) / feature_stds) + bias.
/// `weights` is 2 x dim, row-major, row 0 scoring "carried".
struct GeomPairModel {
  std::vector<double> weights;
  std::array<double, 2> bias{0.0, 0.0};
  std::vector<double> feature_means;
  std::vector<double> feature_stds;

  std::size_t dim() const { return feature_means.size(); }

  /// Zero weights and bias, identity standardization.
  static GeomPairModel zeros(std::size_t dim);

  /// Throws InvalidInputError on inconsistent sizes or non-positive stds.
  void validate() const;

  friend bool operator==(const GeomPairModel&, const GeomPairModel&) = default;
};

/// Throws InvalidInputError on dimension mismatch.
std::array<double, 2> logits(const GeomPairModel& model, std::span<const double> features);

ClassProbs score_pair(const GeomPairModel& model, std::span<const double> features);

/// Equivalent model with standardization folded into weights and bias
/// (means 0, stds 1).
GeomPairModel fold_standardization(const GeomPairModel& model);

struct LabeledSample {
  FeatureVector features;
  bool carried = false;
};

/// Gradient of the mean cross-entropy w.r.t. weights (2 x dim) and bias.
struct Gradient {
  std::vector<double> weights;
  std::array<double, 2> bias{0.0, 0.0};
};

/// Mean cross-entropy of `model` over `batch`; fills `grad` when non-null.
/// Standardization parameters are treated as constants.
double mean_loss(const GeomPairModel& model, std::span<const LabeledSample> batch,
                 Gradient* grad = nullptr);

/// SGD settings. Defaults follow the fine-tuning recipe the classifier was
/// designed around. Dropout is not applicable to a linear model and must stay 0.
struct TrainConfig {
  double learning_rate = 0.00001;
  double momentum = 0.9;
  std::size_t epochs = 20;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  bool shuffle = true;
  double dropout = 0.0;

  void validate() const;  // throws ConfigError
};

struct TrainResult {
  GeomPairModel model;
  /// Mean training loss before the first epoch, then after each epoch.
  std::vector<double> epoch_losses;
};

/// Standardizes features with training-set statistics, starts from zero
/// weights and runs classic momentum SGD (v = mu*v - lr*grad; w += v) on the
/// mean cross-entropy of shuffled mini-batches. Deterministic given the seed.
/// Throws InvalidInputError if a class is missing, DivergenceError if the
/// loss becomes non-finite.
TrainResult train(std::span<const LabeledSample> samples, const TrainConfig& cfg);

/// Text model file: header "geom_pair_model <dim>", then lines of means,
/// stds, carried weights, not-carried weights and bias, values space
/// separated with 9 significant digits.
std::string format_model(const GeomPairModel& model);
GeomPairModel parse_model(std::string_view text);  // throws FormatError
void save_model(const GeomPairModel& model, const std::filesystem::path& path);
GeomPairModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Pair scoring and prediction
// ---------------------------------------------------------------------------

/// Produces p_carried in [0,1] for one candidate pair.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual double score(const ImageRecord& record, const CandidatePair& pair) const = 0;
};

class ModelScorer final : public PairScorer {
 public:
  explicit ModelScorer(GeomPairModel model);
  double score(const ImageRecord& record, const CandidatePair& pair) const override;

 private:
  GeomPairModel model_;
};

/// Scores taken from an external prediction file. A pair's score is the
/// highest score among predictions of the same image and class whose boxes
/// equal the pair's boxes within `tolerance` per coordinate; pairs without
/// such a prediction score 0.
class ExternalScorer final : public PairScorer {
 public:
  explicit ExternalScorer(std::vector<PairPrediction> predictions, double tolerance = 1e-5);
  double score(const ImageRecord& record, const CandidatePair& pair) const override;

 private:
  std::unordered_map<std::string, std::vector<PairPrediction>> by_image_;
  double tolerance_;
};

class FunctionScorer final : public PairScorer {
 public:
  using Fn = std::function<double(const ImageRecord&, const CandidatePair&)>;
  explicit FunctionScorer(Fn fn) : fn_(std::move(fn)) {}
  double score(const ImageRecord& record, const CandidatePair& pair) const override {
    return fn_(record, pair);
  }

 private:
  Fn fn_;
};

/// Scores every candidate pair and keeps those with p_carried >= threshold,
/// in enumeration order, with score = p_carried. Scorer exceptions and
/// out-of-range scores are rethrown as ScorerError naming the pair.
std::vector<PairPrediction> hfpd_predict(const ImageRecord& record, const PairScorer& scorer,
                                         double threshold = 0.5);

// ---------------------------------------------------------------------------
// Training data
// ---------------------------------------------------------------------------

/// True when a carried ground-truth pair of the same class matches both
/// member boxes at IoU >= iou_thresh.
bool pair_is_carried(const CandidatePair& pair, std::span<const GroundTruthPair> gts,
                     double iou_thresh = 0.5);

/// Features and labels for every candidate pair of the record.
std::vector<LabeledSample> labeled_samples(const ImageRecord& record, double iou_thresh = 0.5);

struct DatasetSplit {
  std::vector<ImageRecord> train;
  std::vector<ImageRecord> test;
};

/// Image-level seeded split; round(train_ratio * n) images go to train.
/// Both halves keep the original file order.
DatasetSplit split_dataset(std::span<const ImageRecord> records, double train_ratio,
                           std::uint64_t seed);

}  // namespace pairhold
