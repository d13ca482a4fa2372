#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpe/datapipe/geometry.hpp"
#include "hpe/datapipe/sample.hpp"

namespace hpe::datapipe {

/// Malformed input file. The message names the file and 1-based line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DetectionRecord {
  std::filesystem::path image;
  Detection detection;
};

struct AnnotationRecord {
  std::filesystem::path image;
  Annotation annotation;
  Source source = Source::synthetic;
};

// JSON-lines readers. Relative image paths resolve against the file's directory.
// Blank lines are skipped.
//   detections:  {"image": str, "bbox": [x, y, w, h], "conf": real}
//   annotations: {"image": str, "bbox": [x, y, w, h], "tilt": real, "pan": real, "source": "p04"|"aflw"|"synthetic"}
std::vector<DetectionRecord> read_detections(const std::filesystem::path& path);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);

void write_detections(const std::filesystem::path& path, const std::vector<DetectionRecord>& records);
void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationRecord>& records);

inline constexpr const char* kSampleIndexName = "index.jsonl";

/// Writes one 8-bit P5 file per sample plus index.jsonl with
/// {"file", "tilt", "pan", "source", "class_id"} records. Creates `dir`.
void write_sample_store(const std::filesystem::path& dir, const std::vector<Sample>& samples);

/// Loads a store written by write_sample_store. Images must be 64x64 gray and
/// class ids must agree with discretize_pose.
std::vector<Sample> read_sample_store(const std::filesystem::path& dir);

}  // namespace hpe::datapipe
