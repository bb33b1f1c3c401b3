#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pairhold/records.hpp"

namespace pairhold {

enum class ViolationKind {
  kSchema,     // missing field, wrong JSON type, unknown enum label
  kRange,      // score/confidence outside [0,1], non-positive frame size
  kGeometry,   // box without positive extent
  kReference,  // pose human_index out of range
  kDuplicate,  // image_id repeated within a dataset
  kClip,       // box overshoots the frame and was clipped
};

enum class Severity { kError, kWarning };

std::string_view to_string(ViolationKind kind);
std::string_view to_string(Severity severity);

/// One broken invariant. `field_path` is machine readable, e.g.
/// "humans[0].score" or "gt_pairs[2].firearm_bbox".
struct Violation {
  std::string field_path;
  ViolationKind kind = ViolationKind::kSchema;
  Severity severity = Severity::kError;
  std::string message;
};

/// Checks every record invariant. Out-of-frame boxes yield kClip warnings,
/// everything else is an error. Never throws.
std::vector<Violation> validate_record(const ImageRecord& record);

/// Clips all boxes to the image frame. Boxes that become degenerate are left
/// degenerate so that validation still reports them.
ImageRecord clip_record(const ImageRecord& record);

struct LoadIssue {
  std::size_t line = 0;  // 1-based
  std::string image_id;  // empty when the line could not be parsed that far
  Violation violation;
};

/// Loaded records in file order. Lines with any error-severity violation are
/// dropped and reported; clip warnings are reported and the record is kept
/// with its boxes clipped.
struct Dataset {
  std::vector<ImageRecord> records;
  std::vector<LoadIssue> issues;

  bool has_errors() const;
};

/// Parses one dataset line. Schema problems are appended to `issues` and the
/// result is nullopt. Range/geometry checks are not applied here.
std::optional<ImageRecord> parse_record_line(std::string_view line,
                                             std::vector<Violation>& issues);

/// Reads a JSON-lines dataset file. Throws IoError if the file can't be read.
Dataset load_dataset(const std::filesystem::path& path);

/// Same as load_dataset over in-memory text.
Dataset parse_dataset(std::string_view text);

/// Serializes one record as a single JSON line (no trailing newline). Reals
/// are written with 6 fixed decimals.
std::string format_record(const ImageRecord& record);
void save_dataset(const std::vector<ImageRecord>& records,
                  const std::filesystem::path& path);

std::string format_prediction(const PairPrediction& pred);
PairPrediction parse_prediction_line(std::string_view line);

/// Writes one line per prediction. Throws IoError on failure.
void save_predictions(const std::vector<PairPrediction>& preds,
                      const std::filesystem::path& path);

/// Throws IoError if unreadable, FormatError (with line number) if a line
/// does not follow the prediction schema or breaks its invariants.
std::vector<PairPrediction> load_predictions(const std::filesystem::path& path);

/// Whole-file helpers shared by the loaders and the CLI.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace pairhold
