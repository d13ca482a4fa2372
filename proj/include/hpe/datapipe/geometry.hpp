#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hpe::datapipe {

/// Axis-aligned pixel box; (x, y) is the top-left corner.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  long long area() const { return static_cast<long long>(w) * h; }
  bool valid() const { return w > 0 && h > 0; }
  bool operator==(const BoundingBox&) const = default;
};

struct Detection {
  BoundingBox bbox;
  double confidence = 0.0;
};

struct Annotation {
  BoundingBox bbox;
  double tilt = 0.0;  // degrees
  double pan = 0.0;   // degrees
};

struct Match {
  std::size_t gt_index;
  std::size_t det_index;
  double iou;
  bool operator==(const Match&) const = default;
};

/// Detections with confidence >= threshold, in input order.
std::vector<Detection> filter_by_confidence(std::span<const Detection> detections, double threshold);

/// Largest square of side min(w, h), centred along the longer axis
/// (offset floor((long - short) / 2)).
BoundingBox squarify(const BoundingBox& box);

/// Minimal per-axis translation that puts `box` inside [0, width) x [0, height).
/// Empty when the box is larger than the image on either axis.
std::optional<BoundingBox> shift_into_bounds(const BoundingBox& box, int image_width, int image_height);

double iou(const BoundingBox& a, const BoundingBox& b);

/// Greedy one-to-one assignment in descending IoU order (ties: lower gt index,
/// then lower detection index). Pairs need IoU >= min_iou and a non-empty
/// overlap. Result is ordered by gt index.
std::vector<Match> match_detections(std::span<const Annotation> gts, std::span<const Detection> dets,
                                    double min_iou);

struct ImageCounts {
  std::size_t n_detected = 0;
  std::size_t n_annotated = 0;
};

struct DetectionStats {
  double t_ratio = 0.0;
  double f_ratio = 0.0;
  std::size_t n_valid_crops = 0;
};

/// t = sum min(detected, annotated) / sum annotated;
/// f = sum max(detected - annotated, 0) / sum detected. Empty sums give 0.
DetectionStats detection_ratios(std::span<const ImageCounts> per_image);

}  // namespace hpe::datapipe
