#pragma once

#include <cstddef>
#include <vector>

#include "pairhold/geometry.hpp"
#include "pairhold/records.hpp"

namespace pairhold {

/// One human x firearm combination of an image. `paired_bbox` is always the
/// union of the two member boxes.
struct CandidatePair {
  std::size_t human_index = 0;
  std::size_t firearm_index = 0;
  Box human_bbox;
  Box firearm_bbox;
  Box paired_bbox;
  FirearmClass firearm_class = FirearmClass::kGun;
  double human_score = 1.0;
  double firearm_score = 1.0;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

/// All |humans| * |firearms| pairs, human-major then firearm-minor.
std::vector<CandidatePair> enumerate_pairs(const ImageRecord& record);

struct CropSpec {
  Box crop;  // paired box (plus margin) clipped to the frame
  long width = 0;
  long height = 0;
  double scale = 1.0;
};

/// Clips the paired box, grown by `margin` pixels on every side, to
/// [0,frame_width]x[0,frame_height] and resizes it so the long side equals
/// `target_long_side`. Throws GeometryError when nothing of the box remains
/// inside the frame.
CropSpec crop_spec(const CandidatePair& pair, double frame_width, double frame_height,
                   double target_long_side = 600.0, double margin = 0.0);

}  // namespace pairhold
