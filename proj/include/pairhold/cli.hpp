#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairhold/records.hpp"

namespace pairhold::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kIoFailure = 2,
  kConfigFailure = 3,
  kNumericDivergence = 4,
};

/// Runs one command line (args exclude the program name). Regular output
/// goes to `out`, logs and errors to `err`. Log verbosity comes from the
/// PAIRHOLD_LOG environment variable (trace, debug, info, warn, error, off).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// SVG drawing of one image: human detections in blue, firearm detections in
/// green, and the paired box of each positive prediction in red.
std::string render_overlay_svg(const ImageRecord& record, std::span<const PairPrediction> preds);

/// File name for an image's overlay; characters outside [A-Za-z0-9._-] are
/// replaced by '_'.
std::string overlay_file_name(std::string_view image_id);

}  // namespace pairhold::cli
