#include "hpe/cli/predict.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "hpe/datapipe/formats.hpp"
#include "hpe/trainsearch/train.hpp"

namespace hpe::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string prediction_to_json(const PredictionRecord& r) {
  const json j = {{"image", r.image.generic_string()},
                  {"bbox", {r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h}},
                  {"tilt", r.tilt},
                  {"pan", r.pan},
                  {"latency_ms", r.latency_ms}};
  return j.dump();
}

PredictionRecord prediction_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    PredictionRecord r;
    r.image = j.at("image").get<std::string>();
    const auto& b = j.at("bbox");
    if (!b.is_array() || b.size() != 4) throw std::invalid_argument("bbox must be [x, y, w, h]");
    r.bbox = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    r.tilt = j.at("tilt").get<double>();
    r.pan = j.at("pan").get<double>();
    r.latency_ms = j.at("latency_ms").get<double>();
    if (!std::isfinite(r.tilt) || !std::isfinite(r.pan)) throw std::invalid_argument("angles must be finite");
    if (!(r.latency_ms >= 0.0)) throw std::invalid_argument("latency must be non-negative");
    return r;
  } catch (const json::exception& e) {
    throw datapipe::FormatError(std::string("prediction record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw datapipe::FormatError(std::string("prediction record: ") + e.what());
  }
}

std::vector<HeadBox> read_head_boxes(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw datapipe::FormatError("cannot open " + path.string());
  std::vector<HeadBox> boxes;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      HeadBox h;
      h.image = j.at("image").get<std::string>();
      if (h.image.is_relative()) h.image = path.parent_path() / h.image;
      const auto& b = j.at("bbox");
      if (!b.is_array() || b.size() != 4) throw std::invalid_argument("bbox must be [x, y, w, h]");
      h.bbox = {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
      if (!h.bbox.valid()) throw std::invalid_argument("bbox width and height must be positive");
      if (j.contains("conf")) h.confidence = j.at("conf").get<double>();
      boxes.push_back(std::move(h));
    } catch (const std::exception& e) {
      throw datapipe::FormatError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return boxes;
}

std::optional<std::array<double, 2>> estimate_pose(const engine::Network<float>& net, const datapipe::Image& frame,
                                                   const datapipe::BoundingBox& box,
                                                   const datapipe::PipelineConfig& cfg) {
  const auto placed = datapipe::shift_into_bounds(datapipe::squarify(box), frame.width, frame.height);
  if (!placed) return std::nullopt;
  const datapipe::Image crop = datapipe::extract_crop(frame, *placed, cfg);
  const auto out = net.forward(trainsearch::image_batch({&crop}));
  return std::array<double, 2>{out[0] * trainsearch::kLabelScale, out[1] * trainsearch::kLabelScale};
}

}  // namespace hpe::cli
