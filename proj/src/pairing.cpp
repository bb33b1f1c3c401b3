#include "pairhold/pairing.hpp"

#include <cmath>

#include "pairhold/errors.hpp"

namespace pairhold {

std::vector<CandidatePair> enumerate_pairs(const ImageRecord& record) {
  std::vector<CandidatePair> pairs;
  pairs.reserve(record.humans.size() * record.firearms.size());
  for (std::size_t h = 0; h < record.humans.size(); ++h) {
    for (std::size_t f = 0; f < record.firearms.size(); ++f) {
      const auto& human = record.humans[h];
      const auto& firearm = record.firearms[f];
      pairs.push_back(CandidatePair{h, f, human.bbox, firearm.bbox,
                                    union_box(human.bbox, firearm.bbox), firearm.cls,
                                    human.score, firearm.score});
    }
  }
  return pairs;
}

CropSpec crop_spec(const CandidatePair& pair, double frame_width, double frame_height,
                   double target_long_side, double margin) {
  if (!(frame_width > 0.0) || !(frame_height > 0.0)) {
    throw GeometryError("invalid geometry: frame must have positive size");
  }
  if (!(margin >= 0.0) || !std::isfinite(margin)) {
    throw GeometryError("invalid geometry: crop margin must be non-negative");
  }
  const Box& p = pair.paired_bbox;
  const Box grown{p.x1 - margin, p.y1 - margin, p.x2 + margin, p.y2 + margin};
  const Box clipped = clip_to_frame(grown, frame_width, frame_height);
  if (!clipped.is_valid()) {
    throw GeometryError("degenerate crop: pair (" + std::to_string(pair.human_index) + ", " +
                        std::to_string(pair.firearm_index) + ") lies outside the frame");
  }
  const auto dims = resize_long_side(clipped.width(), clipped.height(), target_long_side);
  return CropSpec{clipped, dims.width, dims.height, dims.scale};
}

}  // namespace pairhold
