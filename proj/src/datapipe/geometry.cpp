#include "hpe/datapipe/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace hpe::datapipe {

std::vector<Detection> filter_by_confidence(std::span<const Detection> detections, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) throw std::invalid_argument("confidence threshold must be in [0, 1]");
  std::vector<Detection> kept;
  std::copy_if(detections.begin(), detections.end(), std::back_inserter(kept),
               [threshold](const Detection& d) { return d.confidence >= threshold; });
  return kept;
}

BoundingBox squarify(const BoundingBox& box) {
  const int side = std::min(box.w, box.h);
  BoundingBox out{box.x, box.y, side, side};
  if (box.w > box.h) out.x += (box.w - side) / 2;
  if (box.h > box.w) out.y += (box.h - side) / 2;
  return out;
}

std::optional<BoundingBox> shift_into_bounds(const BoundingBox& box, int image_width, int image_height) {
  if (box.w > image_width || box.h > image_height) return std::nullopt;
  BoundingBox out = box;
  out.x = std::clamp(box.x, 0, image_width - box.w);
  out.y = std::clamp(box.y, 0, image_height - box.h);
  return out;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const long long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::vector<Match> match_detections(std::span<const Annotation> gts, std::span<const Detection> dets,
                                    double min_iou) {
  if (min_iou < 0.0 || min_iou > 1.0) throw std::invalid_argument("min_iou must be in [0, 1]");
  std::vector<Match> candidates;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      const double overlap = iou(gts[g].bbox, dets[d].bbox);
      if (overlap > 0.0 && overlap >= min_iou) candidates.push_back({g, d, overlap});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    return std::tie(b.iou, a.gt_index, a.det_index) < std::tie(a.iou, b.gt_index, b.det_index);
  });

  std::vector<bool> gt_used(gts.size()), det_used(dets.size());
  std::vector<Match> matches;
  for (const Match& m : candidates) {
    if (gt_used[m.gt_index] || det_used[m.det_index]) continue;
    gt_used[m.gt_index] = true;
    det_used[m.det_index] = true;
    matches.push_back(m);
  }
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) { return a.gt_index < b.gt_index; });
  return matches;
}

DetectionStats detection_ratios(std::span<const ImageCounts> per_image) {
  std::size_t true_detections = 0, annotated = 0, extra = 0, detected = 0;
  for (const auto& c : per_image) {
    true_detections += std::min(c.n_detected, c.n_annotated);
    annotated += c.n_annotated;
    extra += c.n_detected > c.n_annotated ? c.n_detected - c.n_annotated : 0;
    detected += c.n_detected;
  }
  DetectionStats stats;
  stats.t_ratio = annotated ? static_cast<double>(true_detections) / static_cast<double>(annotated) : 0.0;
  stats.f_ratio = detected ? static_cast<double>(extra) / static_cast<double>(detected) : 0.0;
  return stats;
}

}  // namespace hpe::datapipe
