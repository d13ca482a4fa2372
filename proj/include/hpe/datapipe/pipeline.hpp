#pragma once

#include <functional>
#include <vector>

#include "hpe/datapipe/formats.hpp"
#include "hpe/datapipe/image.hpp"

namespace hpe::datapipe {

struct PreprocessResult {
  std::vector<Sample> samples;  // each accepted crop followed by its mirror
  DetectionStats stats;
  std::size_t rejected_out_of_bounds = 0;
  std::vector<std::filesystem::path> unreadable_images;  // skipped, with their heads
};

using ImageLoader = std::function<Image(const std::filesystem::path&)>;

/// Per image: drop detections below the confidence threshold, match the rest
/// to annotations, squarify and shift each matched box into the frame, then
/// emit the 64x64 crop and its horizontal flip. Images are visited in order
/// of first appearance in `annotations`. Images the loader cannot read
/// (ImageIoError) are listed in `unreadable_images` and skipped.
PreprocessResult preprocess(const std::vector<AnnotationRecord>& annotations,
                            const std::vector<DetectionRecord>& detections, const PipelineConfig& cfg,
                            const ImageLoader& load = read_netpbm);

}  // namespace hpe::datapipe
