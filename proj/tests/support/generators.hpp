#pragma once

// Seeded random fixtures shared by the unit and acceptance tests.

#include <cmath>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "pairhold/classifier.hpp"
#include "pairhold/random.hpp"
#include "pairhold/records.hpp"
#include "../oracles/geometry_oracle.hpp"

namespace testgen {

using pairhold::Box;
using pairhold::Rng;

inline oracle::IntBox int_box(Rng& rng, long span = 40, long max_side = 25) {
  const long x1 = rng.between(-span / 2, span / 2);
  const long y1 = rng.between(-span / 2, span / 2);
  return {x1, y1, x1 + rng.between(1, max_side), y1 + rng.between(1, max_side)};
}

inline Box to_box(const oracle::IntBox& b) {
  return Box{static_cast<double>(b.x1), static_cast<double>(b.y1), static_cast<double>(b.x2),
             static_cast<double>(b.y2)};
}

inline pairhold::FirearmClass any_class(Rng& rng) {
  return rng.chance(0.5) ? pairhold::FirearmClass::kGun : pairhold::FirearmClass::kRifle;
}

// Integer box near `b`, so IoU with it is often but not always >= 0.5.
inline Box jitter(Rng& rng, const Box& b, long amount) {
  Box out{b.x1 + static_cast<double>(rng.between(-amount, amount)),
          b.y1 + static_cast<double>(rng.between(-amount, amount)),
          b.x2 + static_cast<double>(rng.between(-amount, amount)),
          b.y2 + static_cast<double>(rng.between(-amount, amount))};
  if (out.x2 <= out.x1) out.x2 = out.x1 + 1;
  if (out.y2 <= out.y1) out.y2 = out.y1 + 1;
  return out;
}

struct EvalFixture {
  std::vector<pairhold::PairPrediction> preds;
  std::map<std::string, std::vector<pairhold::GroundTruthPair>> gts;
};

// Up to 5 images, 20 GTs and 50 predictions; scores on a 1/100 grid so ties
// occur. Predictions are perturbed copies of GTs or free boxes, and some
// refer to an image without annotations.
inline EvalFixture eval_fixture(Rng& rng) {
  EvalFixture fx;
  const long images = rng.between(1, 5);
  const long n_gt = rng.between(0, 20);
  for (long i = 0; i < images; ++i) fx.gts["img" + std::to_string(i)];
  for (long g = 0; g < n_gt; ++g) {
    const std::string id = "img" + std::to_string(rng.between(0, images - 1));
    oracle::IntBox h = int_box(rng, 200, 60), f = int_box(rng, 200, 20);
    fx.gts[id].push_back({to_box(h), to_box(f), any_class(rng), rng.chance(0.8)});
  }
  const long n_pred = rng.between(0, 50);
  for (long p = 0; p < n_pred; ++p) {
    pairhold::PairPrediction pred;
    pred.score = static_cast<double>(rng.between(0, 100)) / 100.0;
    const long pick = rng.between(0, 9);
    if (pick < 7 && n_gt > 0) {
      auto it = fx.gts.begin();
      std::advance(it, rng.between(0, images - 1));
      if (!it->second.empty()) {
        const auto& gt = it->second[rng.below(it->second.size())];
        pred.image_id = it->first;
        pred.human_bbox = pick < 3 ? gt.human_bbox : jitter(rng, gt.human_bbox, 6);
        pred.firearm_bbox = pick < 3 ? gt.firearm_bbox : jitter(rng, gt.firearm_bbox, 4);
        pred.firearm_class = rng.chance(0.9) ? gt.firearm_class : any_class(rng);
        fx.preds.push_back(pred);
        continue;
      }
    }
    pred.image_id = pick == 9 ? "unannotated" : "img" + std::to_string(rng.between(0, images - 1));
    pred.human_bbox = to_box(int_box(rng, 200, 60));
    pred.firearm_bbox = to_box(int_box(rng, 200, 20));
    pred.firearm_class = any_class(rng);
    fx.preds.push_back(pred);
  }
  return fx;
}

// Crowded scene: several overlapping people and firearms scattered around
// and between them, many overlaps landing near the 0.5 cutoff.
inline pairhold::ImageRecord crowded_scene(Rng& rng, const std::string& id) {
  pairhold::ImageRecord r;
  r.image_id = id;
  r.width = 400;
  r.height = 300;
  const long humans = rng.between(0, 8);
  for (long h = 0; h < humans; ++h) {
    const double x = static_cast<double>(rng.between(0, 320));
    const double y = static_cast<double>(rng.between(0, 150));
    r.humans.push_back({Box{x, y, x + static_cast<double>(rng.between(30, 80)),
                            y + static_cast<double>(rng.between(80, 150))},
                        static_cast<double>(rng.between(30, 100)) / 100.0});
  }
  const long firearms = rng.between(0, 6);
  for (long f = 0; f < firearms; ++f) {
    const double x = static_cast<double>(rng.between(0, 380));
    const double y = static_cast<double>(rng.between(0, 280));
    r.firearms.push_back({Box{x, y, x + static_cast<double>(rng.between(4, 40)),
                              y + static_cast<double>(rng.between(2, 20))},
                          any_class(rng), static_cast<double>(rng.between(30, 100)) / 100.0});
  }
  // Occasionally duplicate a human so equal-overlap ties are exercised.
  if (!r.humans.empty() && rng.chance(0.3)) r.humans.push_back(r.humans[rng.below(r.humans.size())]);
  return r;
}

// Linearly separable samples: label is the sign of feature 0, which is kept
// at least `margin` away from zero; other features are noise.
inline std::vector<pairhold::LabeledSample> separable_samples(Rng& rng, std::size_t n,
                                                              std::size_t dim, double margin) {
  std::vector<pairhold::LabeledSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    pairhold::LabeledSample s;
    s.carried = i % 2 == 0;
    s.features.resize(dim);
    for (auto& v : s.features) v = rng.uniform(-2.0, 2.0);
    const double mag = margin + rng.uniform(0.0, 2.0);
    s.features[0] = s.carried ? mag : -mag;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<pairhold::LabeledSample> random_samples(Rng& rng, std::size_t n,
                                                           std::size_t dim) {
  std::vector<pairhold::LabeledSample> out(n);
  for (auto& s : out) {
    s.features.resize(dim);
    for (auto& v : s.features) v = rng.uniform(-3.0, 3.0);
    s.carried = rng.chance(0.5);
  }
  return out;
}

inline pairhold::GeomPairModel random_model(Rng& rng, std::size_t dim) {
  auto m = pairhold::GeomPairModel::zeros(dim);
  for (auto& w : m.weights) w = rng.uniform(-1.0, 1.0);
  m.bias = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  for (std::size_t i = 0; i < dim; ++i) {
    m.feature_means[i] = rng.uniform(-0.5, 0.5);
    m.feature_stds[i] = rng.uniform(0.5, 2.0);
  }
  return m;
}

inline double training_accuracy(const pairhold::GeomPairModel& m,
                                const std::vector<pairhold::LabeledSample>& samples) {
  std::size_t right = 0;
  for (const auto& s : samples) {
    const bool predicted = pairhold::score_pair(m, s.features).p_carried >= 0.5;
    right += predicted == s.carried ? 1 : 0;
  }
  return static_cast<double>(right) / static_cast<double>(samples.size());
}

}  // namespace testgen
