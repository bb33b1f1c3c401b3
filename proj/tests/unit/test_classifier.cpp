#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "pairhold/classifier.hpp"
#include "pairhold/detections_io.hpp"
#include "pairhold/errors.hpp"
#include "pairhold/random.hpp"

#include "../oracles/gradient_oracle.hpp"
#include "../support/generators.hpp"

using namespace pairhold;

namespace {

CandidatePair make_pair(const Box& h, const Box& f, FirearmClass cls = FirearmClass::kGun) {
  CandidatePair p;
  p.human_bbox = h;
  p.firearm_bbox = f;
  p.paired_bbox = union_box(h, f);
  p.firearm_class = cls;
  return p;
}

ImageRecord two_by_two() {
  ImageRecord r;
  r.image_id = "grid";
  r.width = 100;
  r.height = 100;
  r.humans = {{Box{0, 0, 20, 50}, 0.9}, {Box{40, 0, 60, 50}, 0.9}};
  r.firearms = {{Box{15, 20, 25, 25}, FirearmClass::kGun, 0.8},
                {Box{30, 30, 45, 35}, FirearmClass::kRifle, 0.7}};
  return r;
}

}  // namespace

TEST(Features, IdenticalBoxesGiveIdentityGeometry) {
  const auto x = extract_features(make_pair(Box{0, 0, 10, 20}, Box{0, 0, 10, 20}), {}, 100, 100);
  ASSERT_EQ(x.size(), kGeomFeatureDim);
  EXPECT_EQ(x[feature::kIou], 1.0);
  EXPECT_EQ(x[feature::kRelCenterX], 0.5);
  EXPECT_EQ(x[feature::kRelCenterY], 0.5);
  EXPECT_EQ(x[feature::kLogAreaRatio], 0.0);
}

TEST(Features, ClassOneHot) {
  const Box h{0, 0, 10, 20}, f{2, 2, 4, 4};
  const auto gun = extract_features(make_pair(h, f, FirearmClass::kGun), {}, 50, 50);
  const auto rifle = extract_features(make_pair(h, f, FirearmClass::kRifle), {}, 50, 50);
  EXPECT_EQ(gun[feature::kIsGun], 1.0);
  EXPECT_EQ(gun[feature::kIsRifle], 0.0);
  EXPECT_EQ(rifle[feature::kIsGun], 0.0);
  EXPECT_EQ(rifle[feature::kIsRifle], 1.0);
}

TEST(Features, NoPosesGiveSentinels) {
  auto r = two_by_two();
  const auto pairs = enumerate_pairs(r);
  const auto x = extract_features(r, pairs[0]);
  EXPECT_EQ(x[feature::kHandDistance], kNoHandDistance);
  EXPECT_EQ(x[feature::kHandsInside], 0.0);
}

TEST(Features, HandsOfLinkedPoseOnly) {
  auto r = two_by_two();
  PoseEstimate p;
  p.human_index = 1;
  p.left_hand = {{"h", 20, 22.5, 0.9}};  // firearm 0 center
  r.poses = {p};
  const auto pairs = enumerate_pairs(r);
  EXPECT_EQ(extract_features(r, pairs[0])[feature::kHandDistance], kNoHandDistance);
  EXPECT_EQ(extract_features(r, pairs[2])[feature::kHandDistance], 0.0);
  EXPECT_EQ(extract_features(r, pairs[2])[feature::kHandsInside], 0.1);
}

TEST(Features, DegenerateInputThrows) {
  EXPECT_THROW(extract_features(make_pair(Box{0, 0, 10, 10}, Box{1, 1, 2, 2}), {}, 0, 10),
               InvalidInputError);
  CandidatePair bad = make_pair(Box{0, 0, 10, 10}, Box{1, 1, 2, 2});
  bad.firearm_bbox = Box{3, 3, 3, 5};
  EXPECT_THROW(extract_features(bad, {}, 10, 10), InvalidInputError);
}

TEST(Softmax, SymmetricAndShiftInvariant) {
  const auto p = softmax({0.0, 0.0});
  EXPECT_EQ(p.p_carried, 0.5);
  EXPECT_EQ(p.p_not_carried, 0.5);
  const auto q = softmax({123.4, 123.4});
  EXPECT_EQ(q.p_carried, 0.5);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(-20, 20), b = rng.uniform(-20, 20), c = rng.uniform(-50, 50);
    const auto base = softmax({a, b}), shifted = softmax({a + c, b + c});
    ASSERT_EQ(base.p_carried > base.p_not_carried, shifted.p_carried > shifted.p_not_carried);
    ASSERT_NEAR(base.p_carried, shifted.p_carried, 1e-12);
  }
}

TEST(Softmax, LogThreeGivesThreeQuarters) {
  const auto p = softmax({std::log(3.0), 0.0});
  EXPECT_NEAR(p.p_carried, 0.75, 1e-15);
  EXPECT_NEAR(p.p_not_carried, 0.25, 1e-15);
}

TEST(Softmax, NonFiniteThrows) {
  EXPECT_THROW(softmax({std::nan(""), 0.0}), NumericError);
  EXPECT_THROW(softmax({INFINITY, 0.0}), NumericError);
}

TEST(CrossEntropy, KnownValues) {
  EXPECT_EQ(cross_entropy({1.0, 0.0}, one_hot(true)), 0.0);
  EXPECT_NEAR(cross_entropy({0.5, 0.5}, one_hot(true)), 0.693147, 1e-6);
  EXPECT_NEAR(cross_entropy({0.75, 0.25}, one_hot(false)), 1.386294, 1e-6);
  EXPECT_NEAR(cross_entropy({0.0, 1.0}, one_hot(true)), -std::log(1e-12), 1e-9);
}

TEST(CrossEntropy, RejectsSoftLabels) {
  EXPECT_THROW(cross_entropy({0.5, 0.5}, {0.5, 0.5}), InvalidInputError);
}

TEST(ScorePair, ZeroModelIsUndecided) {
  const auto m = GeomPairModel::zeros(kGeomFeatureDim);
  const auto p = score_pair(m, FeatureVector(kGeomFeatureDim, 3.0));
  EXPECT_EQ(p.p_carried, 0.5);
}

TEST(ScorePair, HandSetWeight) {
  auto m = GeomPairModel::zeros(kGeomFeatureDim);
  m.weights[feature::kIou] = 1.0;
  FeatureVector x(kGeomFeatureDim, 0.0);
  x[feature::kIou] = 2.0;
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(score_pair(m, x).p_carried, e2 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(score_pair(m, x).p_carried, 0.8808, 1e-4);
  EXPECT_EQ(score_pair(m, x).p_carried, score_pair(m, x).p_carried);
}

TEST(ScorePair, FoldedStandardizationAgrees) {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto m = testgen::random_model(rng, 5);
    const auto folded = fold_standardization(m);
    for (double s : folded.feature_stds) ASSERT_EQ(s, 1.0);
    FeatureVector x(5);
    for (auto& v : x) v = rng.uniform(-3, 3);
    const auto a = score_pair(m, x), b = score_pair(folded, x);
    ASSERT_EQ(a.p_carried >= 0.5, b.p_carried >= 0.5);
    ASSERT_NEAR(a.p_carried, b.p_carried, 1e-12);
  }
}

TEST(ScorePair, DimensionMismatchThrows) {
  EXPECT_THROW(logits(GeomPairModel::zeros(3), FeatureVector(4, 0.0)), InvalidInputError);
}

TEST(Gradient, MatchesCentralDifferences) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const std::size_t dim = 1 + rng.below(kGeomFeatureDim);
    const auto m = testgen::random_model(rng, dim);
    const auto batch = testgen::random_samples(rng, 1 + rng.below(6), dim);
    Gradient g;
    mean_loss(m, batch, &g);
    std::vector<double> analytic = g.weights;
    analytic.push_back(g.bias[0]);
    analytic.push_back(g.bias[1]);
    ASSERT_LE(oracle::relative_error(analytic, oracle::numeric_gradient(m, batch, 1e-5)), 1e-6);
  }
}

TEST(Train, StartsAtLogTwoAndLearnsSeparableData) {
  Rng rng(7);
  const auto samples = testgen::separable_samples(rng, 200, kGeomFeatureDim, 1.0);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.seed = 7;
  const auto result = train(samples, cfg);
  ASSERT_EQ(result.epoch_losses.size(), cfg.epochs + 1);
  EXPECT_NEAR(result.epoch_losses.front(), std::log(2.0), 1e-12);
  EXPECT_LT(result.epoch_losses.back(), result.epoch_losses.front());
  EXPECT_GE(testgen::training_accuracy(result.model, samples), 0.95);
}

TEST(Train, SameSeedSameBytes) {
  Rng rng(10);
  const auto samples = testgen::separable_samples(rng, 60, 4, 0.5);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.seed = 3;
  EXPECT_EQ(format_model(train(samples, cfg).model), format_model(train(samples, cfg).model));
  cfg.seed = 4;
  const auto other = train(samples, cfg).model;
  cfg.seed = 3;
  EXPECT_NE(format_model(other), format_model(train(samples, cfg).model));
}

TEST(Train, SingleClassIsDegenerate) {
  std::vector<LabeledSample> samples(5, LabeledSample{FeatureVector{1.0, 2.0}, true});
  EXPECT_THROW(train(samples, TrainConfig{}), InvalidInputError);
}

TEST(Train, HugeStepsDiverge) {
  Rng rng(11);
  auto samples = testgen::separable_samples(rng, 20, 2, 1.0);
  samples[0].carried = !samples[0].carried;  // keep gradients alive
  TrainConfig cfg;
  cfg.learning_rate = 1e306;
  cfg.momentum = 0.99;
  cfg.epochs = 50;
  EXPECT_THROW(train(samples, cfg), DivergenceError);
}

TEST(TrainConfig, RejectsBadSettings) {
  TrainConfig cfg;
  cfg.dropout = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ModelFile, RoundTripIsExactEnough) {
  Rng rng(12);
  const auto m = testgen::random_model(rng, 6);
  const auto back = parse_model(format_model(m));
  ASSERT_EQ(back.dim(), 6u);
  for (std::size_t i = 0; i < m.weights.size(); ++i) EXPECT_NEAR(back.weights[i], m.weights[i], 1e-8);
  EXPECT_EQ(format_model(back), format_model(m));
  EXPECT_THROW(parse_model("geom_pair_model 2\n1 2\n"), FormatError);
  EXPECT_THROW(parse_model("something else"), FormatError);
}

TEST(Hfpd, ScoreFilterAtThreshold) {
  const auto r = two_by_two();
  const double scores[] = {0.9, 0.2, 0.4, 0.7};
  const FunctionScorer scorer([&](const ImageRecord&, const CandidatePair& p) {
    return scores[p.human_index * 2 + p.firearm_index];
  });
  const auto preds = hfpd_predict(r, scorer);
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(preds[0].score, 0.9);
  EXPECT_EQ(preds[1].score, 0.7);
  EXPECT_EQ(preds[1].human_bbox, r.humans[1].bbox);
  EXPECT_EQ(preds[1].firearm_bbox, r.firearms[1].bbox);
}

TEST(Hfpd, AllOrNothingScorers) {
  const auto r = two_by_two();
  EXPECT_TRUE(hfpd_predict(r, FunctionScorer([](auto&, auto&) { return 0.0; })).empty());
  EXPECT_EQ(hfpd_predict(r, FunctionScorer([](auto&, auto&) { return 1.0; })).size(), 4u);
}

TEST(Hfpd, OutputIsSubsetOfPairs) {
  Rng rng(14);
  for (int i = 0; i < 30; ++i) {
    const auto scene = testgen::crowded_scene(rng, "s");
    Rng scorer_rng(static_cast<std::uint64_t>(i));
    std::vector<double> draws(64);
    for (auto& d : draws) d = scorer_rng.uniform();
    const FunctionScorer scorer([&](const ImageRecord&, const CandidatePair& p) {
      return draws[(p.human_index * 7 + p.firearm_index) % draws.size()];
    });
    const auto pairs = enumerate_pairs(scene);
    for (const auto& pred : hfpd_predict(scene, scorer, 0.3)) {
      const bool found = std::any_of(pairs.begin(), pairs.end(), [&](const CandidatePair& p) {
        return p.human_bbox == pred.human_bbox && p.firearm_bbox == pred.firearm_bbox &&
               p.firearm_class == pred.firearm_class;
      });
      ASSERT_TRUE(found);
      ASSERT_GE(pred.score, 0.3);
    }
  }
}

TEST(Hfpd, ScorerFailuresAreWrapped) {
  const auto r = two_by_two();
  EXPECT_THROW(hfpd_predict(r, FunctionScorer([](auto&, auto&) { return 1.5; })), ScorerError);
  EXPECT_THROW(hfpd_predict(r, FunctionScorer([](auto&, auto&) -> double {
                 throw std::runtime_error("boom");
               })),
               ScorerError);
  EXPECT_THROW(hfpd_predict(r, FunctionScorer([](auto&, auto&) { return 0.5; }), 2.0),
               ConfigError);
}

TEST(ExternalScorer, MatchesByBoxesAndClass) {
  const auto r = two_by_two();
  const PairPrediction known{"grid", r.humans[0].bbox, r.firearms[0].bbox, FirearmClass::kGun, 0.8};
  const ExternalScorer scorer({known});
  const auto pairs = enumerate_pairs(r);
  EXPECT_EQ(scorer.score(r, pairs[0]), 0.8);
  EXPECT_EQ(scorer.score(r, pairs[1]), 0.0);
}

TEST(Labels, CarriedNeedsBothBoxesAndClass) {
  auto r = two_by_two();
  r.gt_pairs = {{r.humans[0].bbox, r.firearms[0].bbox, FirearmClass::kGun, true},
                {r.humans[1].bbox, r.firearms[1].bbox, FirearmClass::kRifle, false}};
  const auto samples = labeled_samples(r);
  ASSERT_EQ(samples.size(), 4u);
  EXPECT_TRUE(samples[0].carried);
  EXPECT_FALSE(samples[1].carried);
  EXPECT_FALSE(samples[2].carried);
  EXPECT_FALSE(samples[3].carried);
}

TEST(Split, ImageLevelAndOrderPreserving) {
  std::vector<ImageRecord> records(10);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].image_id = "r" + std::to_string(i);
  const auto s = split_dataset(records, 0.8, 5);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  auto ordered = [](const std::vector<ImageRecord>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i - 1].image_id.back() >= v[i].image_id.back()) return false;
    return true;
  };
  EXPECT_TRUE(ordered(s.train));
  EXPECT_TRUE(ordered(s.test));
  const auto again = split_dataset(records, 0.8, 5);
  EXPECT_EQ(again.test, s.test);
}
