#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hpe/datapipe/geometry.hpp"
#include "hpe/datapipe/image.hpp"
#include "hpe/engine/network.hpp"

namespace hpe::cli {

struct PredictionRecord {
  std::filesystem::path image;
  datapipe::BoundingBox bbox;
  double tilt = 0.0;  // degrees
  double pan = 0.0;   // degrees
  double latency_ms = 0.0;
  bool operator==(const PredictionRecord&) const = default;
};

/// One compact JSON object: {"image", "bbox", "tilt", "pan", "latency_ms"}.
std::string prediction_to_json(const PredictionRecord& r);
PredictionRecord prediction_from_json(const std::string& line);

/// A head box from a detections file (with "conf") or a manifest (without).
struct HeadBox {
  std::filesystem::path image;
  datapipe::BoundingBox bbox;
  std::optional<double> confidence;
};

/// Reads either JSON-lines layout; extra fields are ignored. Relative image
/// paths resolve against the file's directory.
std::vector<HeadBox> read_head_boxes(const std::filesystem::path& path);

/// Squarify and shift the box into the frame, crop, gray, resize to 64x64,
/// then run the network. Empty when the box cannot fit inside the frame.
std::optional<std::array<double, 2>> estimate_pose(const engine::Network<float>& net, const datapipe::Image& frame,
                                                   const datapipe::BoundingBox& box,
                                                   const datapipe::PipelineConfig& cfg);

}  // namespace hpe::cli
