#include "hpe/datapipe/pipeline.hpp"

#include <map>

namespace hpe::datapipe {

PreprocessResult preprocess(const std::vector<AnnotationRecord>& annotations,
                            const std::vector<DetectionRecord>& detections, const PipelineConfig& cfg,
                            const ImageLoader& load) {
  struct Group {
    std::vector<Annotation> gts;
    std::vector<Source> sources;
    std::vector<Detection> dets;
  };
  std::vector<std::filesystem::path> order;
  std::map<std::filesystem::path, Group> groups;
  for (const auto& a : annotations) {
    auto [it, inserted] = groups.try_emplace(a.image);
    if (inserted) order.push_back(a.image);
    it->second.gts.push_back(a.annotation);
    it->second.sources.push_back(a.source);
  }
  for (const auto& d : detections) {
    auto it = groups.find(d.image);
    if (it != groups.end()) it->second.dets.push_back(d.detection);
  }

  PreprocessResult result;
  std::vector<ImageCounts> counts;
  for (const auto& path : order) {
    const Group& g = groups.at(path);
    const auto kept = filter_by_confidence(g.dets, cfg.confidence_threshold);
    counts.push_back({kept.size(), g.gts.size()});
    const auto matches = match_detections(g.gts, kept, cfg.min_match_iou);
    if (matches.empty()) continue;
    Image image;
    try {
      image = load(path);
    } catch (const ImageIoError&) {
      result.unreadable_images.push_back(path);
      continue;
    }
    for (const Match& m : matches) {
      const auto box = shift_into_bounds(squarify(kept[m.det_index].bbox), image.width, image.height);
      if (!box) {
        ++result.rejected_out_of_bounds;
        continue;
      }
      const Annotation& gt = g.gts[m.gt_index];
      Sample s = make_sample(extract_crop(image, *box, cfg), gt.tilt, gt.pan, g.sources[m.gt_index]);
      Sample flipped = hflip_sample(s);
      result.samples.push_back(std::move(s));
      result.samples.push_back(std::move(flipped));
      ++result.stats.n_valid_crops;
    }
  }
  const DetectionStats ratios = detection_ratios(counts);
  result.stats.t_ratio = ratios.t_ratio;
  result.stats.f_ratio = ratios.f_ratio;
  return result;
}

}  // namespace hpe::datapipe
