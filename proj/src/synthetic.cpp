#include "pairhold/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "pairhold/errors.hpp"
#include "pairhold/geometry.hpp"
#include "pairhold/random.hpp"

namespace pairhold {

namespace {

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

Box round3(const Box& b) { return Box{round3(b.x1), round3(b.y1), round3(b.x2), round3(b.y2)}; }

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Person {
  Box box;
  Point left_hand;
  Point right_hand;
};

struct Weapon {
  Box box;
  FirearmClass cls = FirearmClass::kGun;
  std::optional<std::size_t> carrier;
};

constexpr std::array<const char*, 5> kHandNames = {"wrist", "thumb_tip", "index_tip",
                                                   "middle_tip", "pinky_tip"};

// (name, relative x, relative y) inside the person box.
struct BodyPart {
  const char* name;
  double rx;
  double ry;
};
constexpr std::array<BodyPart, 8> kBodyParts = {{{"nose", 0.50, 0.08},
                                                 {"neck", 0.50, 0.18},
                                                 {"r_shoulder", 0.30, 0.22},
                                                 {"l_shoulder", 0.70, 0.22},
                                                 {"r_hip", 0.38, 0.55},
                                                 {"l_hip", 0.62, 0.55},
                                                 {"r_knee", 0.38, 0.78},
                                                 {"l_knee", 0.62, 0.78}}};

Box jitter(Rng& rng, const Box& b, double amount) {
  const double w = b.width();
  const double h = b.height();
  Box out{b.x1 + rng.uniform(-amount, amount) * w, b.y1 + rng.uniform(-amount, amount) * h,
          b.x2 + rng.uniform(-amount, amount) * w, b.y2 + rng.uniform(-amount, amount) * h};
  return out;
}

std::vector<Keypoint> hand_keypoints(Rng& rng, Point hand, double radius, double width,
                                     double height) {
  std::vector<Keypoint> kps;
  for (const char* name : kHandNames) {
    Keypoint kp;
    kp.name = name;
    kp.x = round3(std::clamp(hand.x + rng.uniform(-radius, radius), 0.0, width));
    kp.y = round3(std::clamp(hand.y + rng.uniform(-radius, radius), 0.0, height));
    kp.confidence = round3(rng.uniform(0.4, 1.0));
    kps.push_back(std::move(kp));
  }
  return kps;
}

Box place_gun(Rng& rng, Person& carrier, int side) {
  const Box& c = carrier.box;
  const double gw = c.width() * rng.uniform(0.35, 0.6);
  const double gh = gw * rng.uniform(0.45, 0.7);
  const double edge = side > 0 ? c.x2 : c.x1;
  const Point grip{edge + side * rng.uniform(-0.05, 0.15) * c.width(),
                   c.y1 + rng.uniform(0.35, 0.55) * c.height()};
  // Grip sits a quarter of the way in from the gun's inner end.
  const double x1 = side > 0 ? grip.x - 0.25 * gw : grip.x - 0.75 * gw;
  const double y1 = grip.y - rng.uniform(0.35, 0.65) * gh;
  (side > 0 ? carrier.right_hand : carrier.left_hand) = grip;
  return Box{x1, y1, x1 + gw, y1 + gh};
}

Box place_rifle(Rng& rng, Person& carrier, int side) {
  const Box& c = carrier.box;
  const double rw = c.width() * rng.uniform(0.9, 1.5);
  const double rh = rw * rng.uniform(0.18, 0.3);
  const double cx = c.center_x() + side * rng.uniform(0.1, 0.4) * c.width();
  const double cy = c.y1 + rng.uniform(0.35, 0.55) * c.height();
  carrier.left_hand = {cx - 0.2 * rw, cy + 0.15 * rh};
  carrier.right_hand = {cx + 0.2 * rw, cy - 0.15 * rh};
  return Box{cx - 0.5 * rw, cy - 0.5 * rh, cx + 0.5 * rw, cy + 0.5 * rh};
}

Box place_loose(Rng& rng, FirearmClass cls, double mean_width, double width, double height) {
  const double fw = mean_width * (cls == FirearmClass::kGun ? rng.uniform(0.35, 0.6)
                                                            : rng.uniform(0.9, 1.5));
  const double fh = fw * (cls == FirearmClass::kGun ? rng.uniform(0.45, 0.7) : rng.uniform(0.18, 0.3));
  const double x1 = rng.uniform(0.0, std::max(1.0, width - fw));
  const double y1 = rng.uniform(0.5 * height, std::max(0.5 * height + 1.0, height - fh));
  return Box{x1, y1, x1 + fw, y1 + fh};
}

ImageRecord make_scene(Rng& rng, const SyntheticConfig& cfg, std::size_t index) {
  ImageRecord rec;
  char id[48];
  std::snprintf(id, sizeof(id), "syn-%llu-%04zu", static_cast<unsigned long long>(cfg.seed), index);
  rec.image_id = id;

  const double height = std::round(rng.uniform(480.0, 900.0));
  const auto n_humans = static_cast<std::size_t>(
      rng.between(static_cast<long>(cfg.min_humans), static_cast<long>(cfg.max_humans)));
  const double base_h = height * rng.uniform(0.5, 0.75);

  std::vector<Person> people;
  double cursor = rng.uniform(20.0, 80.0);
  for (std::size_t i = 0; i < n_humans; ++i) {
    const double h = std::min(base_h * rng.uniform(0.9, 1.1), 0.96 * height);
    const double w = h * rng.uniform(0.33, 0.45);
    const double y1 = rng.uniform(0.02 * height, height - h - 0.02 * height);
    Person p;
    p.box = Box{cursor, y1, cursor + w, y1 + h};
    p.left_hand = {p.box.x1 + 0.1 * w, y1 + rng.uniform(0.5, 0.62) * h};
    p.right_hand = {p.box.x2 - 0.1 * w, y1 + rng.uniform(0.5, 0.62) * h};
    people.push_back(p);
    // Neighbours overlap: the next person starts before this one ends.
    cursor += w * rng.uniform(0.55, 1.05);
  }
  double right_edge = 0.0;
  double mean_width = 0.0;
  for (const auto& p : people) {
    right_edge = std::max(right_edge, p.box.x2);
    mean_width += p.box.width() / static_cast<double>(people.size());
  }
  const double width = std::round(std::max(640.0, right_edge + rng.uniform(40.0, 160.0)));
  rec.width = width;
  rec.height = height;

  const std::size_t max_f = std::max<std::size_t>(1, std::min(cfg.max_firearms, n_humans));
  const auto n_firearms = static_cast<std::size_t>(rng.between(1, static_cast<long>(max_f)));
  const auto carriers = rng.permutation(n_humans);
  std::vector<Weapon> weapons;
  for (std::size_t k = 0; k < n_firearms; ++k) {
    Weapon wpn;
    wpn.cls = rng.chance(cfg.rifle_prob) ? FirearmClass::kRifle : FirearmClass::kGun;
    if (!rng.chance(cfg.uncarried_prob)) {
      wpn.carrier = carriers[k];
      Person& carrier = people[carriers[k]];
      const int side = rng.chance(0.5) ? 1 : -1;
      wpn.box = wpn.cls == FirearmClass::kGun ? place_gun(rng, carrier, side)
                                              : place_rifle(rng, carrier, side);
    } else {
      wpn.box = place_loose(rng, wpn.cls, mean_width, width, height);
    }
    wpn.box = round3(clip_to_frame(wpn.box, width, height));
    weapons.push_back(wpn);
  }

  for (auto& p : people) p.box = round3(p.box);

  for (const auto& p : people) {
    Box det = round3(clip_to_frame(jitter(rng, p.box, 0.02), width, height));
    if (!det.is_valid()) det = p.box;
    rec.humans.push_back({det, round3(rng.uniform(0.7, 1.0))});
  }
  for (const auto& wpn : weapons) {
    Box det = round3(clip_to_frame(jitter(rng, wpn.box, 0.03), width, height));
    if (!det.is_valid()) det = wpn.box;
    rec.firearms.push_back({det, wpn.cls, round3(rng.uniform(0.6, 1.0))});
  }
  if (rng.chance(cfg.spurious_firearm_prob)) {
    const auto cls = rng.chance(0.5) ? FirearmClass::kRifle : FirearmClass::kGun;
    rec.firearms.push_back(
        {round3(place_loose(rng, cls, mean_width, width, height)), cls, round3(rng.uniform(0.3, 0.7))});
  }

  // Pose estimates come out in arbitrary order, like a bottom-up detector.
  for (std::size_t i : rng.permutation(n_humans)) {
    const Person& p = people[i];
    PoseEstimate pose;
    if (!rng.chance(cfg.unlinked_pose_prob)) pose.human_index = i;
    for (const auto& part : kBodyParts) {
      Keypoint kp;
      kp.name = part.name;
      kp.x = round3(p.box.x1 + (part.rx + rng.uniform(-0.04, 0.04)) * p.box.width());
      kp.y = round3(p.box.y1 + (part.ry + rng.uniform(-0.02, 0.02)) * p.box.height());
      kp.confidence = round3(rng.uniform(0.5, 1.0));
      pose.body.push_back(std::move(kp));
    }
    if (!rng.chance(cfg.hidden_hands_prob)) {
      const double radius = 0.025 * p.box.height();
      pose.left_hand = hand_keypoints(rng, p.left_hand, radius, width, height);
      pose.right_hand = hand_keypoints(rng, p.right_hand, radius, width, height);
    }
    rec.poses.push_back(std::move(pose));
  }

  for (std::size_t i = 0; i < people.size(); ++i) {
    for (const auto& wpn : weapons) {
      rec.gt_pairs.push_back({people[i].box, wpn.box, wpn.cls, wpn.carrier == i});
    }
  }
  return rec;
}

}  // namespace

std::vector<ImageRecord> generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.min_humans < 1 || cfg.max_humans < cfg.min_humans) {
    throw ConfigError("synthetic scenes need 1 <= min_humans <= max_humans");
  }
  if (cfg.max_firearms < 1) throw ConfigError("synthetic scenes need max_firearms >= 1");
  Rng rng(cfg.seed);
  std::vector<ImageRecord> out;
  out.reserve(cfg.images);
  for (std::size_t i = 0; i < cfg.images; ++i) out.push_back(make_scene(rng, cfg, i));
  return out;
}

}  // namespace pairhold
