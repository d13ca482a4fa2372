#include "hpe/datapipe/formats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

namespace hpe::datapipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw FormatError(path.string() + ":" + std::to_string(line) + ": " + what);
}

template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::exception& e) {
      fail(path, line, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) fail(path, line, "expected a JSON object");
    try {
      fn(record, line);
    } catch (const json::exception& e) {
      fail(path, line, e.what());
    } catch (const std::invalid_argument& e) {
      fail(path, line, e.what());
    }
  }
}

double number_field(const json& record, const char* key) {
  const json& v = record.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw std::invalid_argument(std::string("field '") + key + "' must be finite");
  return d;
}

BoundingBox bbox_field(const json& record) {
  const json& v = record.at("bbox");
  if (!v.is_array() || v.size() != 4) throw std::invalid_argument("bbox must be [x, y, w, h]");
  int xywh[4];
  for (int i = 0; i < 4; ++i) {
    if (!v[i].is_number_integer() && !(v[i].is_number() && std::floor(v[i].get<double>()) == v[i].get<double>())) {
      throw std::invalid_argument("bbox entries must be integers");
    }
    xywh[i] = static_cast<int>(v[i].get<double>());
  }
  BoundingBox box{xywh[0], xywh[1], xywh[2], xywh[3]};
  if (!box.valid()) throw std::invalid_argument("bbox width and height must be positive");
  return box;
}

fs::path image_field(const json& record, const fs::path& base) {
  fs::path image = record.at("image").get<std::string>();
  return image.is_relative() ? base / image : image;
}

json bbox_json(const BoundingBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

void write_lines(const fs::path& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace

std::vector<DetectionRecord> read_detections(const fs::path& path) {
  std::vector<DetectionRecord> out;
  const fs::path base = path.parent_path();
  for_each_record(path, [&](const json& r, std::size_t) {
    const double conf = number_field(r, "conf");
    if (conf < 0.0 || conf > 1.0) throw std::invalid_argument("conf must be in [0, 1]");
    out.push_back({image_field(r, base), {bbox_field(r), conf}});
  });
  return out;
}

std::vector<AnnotationRecord> read_annotations(const fs::path& path) {
  std::vector<AnnotationRecord> out;
  const fs::path base = path.parent_path();
  for_each_record(path, [&](const json& r, std::size_t) {
    const double tilt = number_field(r, "tilt");
    const double pan = number_field(r, "pan");
    if (tilt < kTiltMin || tilt > kTiltMax) throw std::invalid_argument("tilt must be in [-90, 90]");
    if (pan < kPanMin || pan > kPanMax) throw std::invalid_argument("pan must be in [-100, 100]");
    out.push_back({image_field(r, base), {bbox_field(r), tilt, pan}, parse_source(r.at("source").get<std::string>())});
  });
  return out;
}

void write_detections(const fs::path& path, const std::vector<DetectionRecord>& records) {
  std::vector<json> lines;
  for (const auto& r : records) {
    lines.push_back({{"image", r.image.generic_string()}, {"bbox", bbox_json(r.detection.bbox)},
                     {"conf", r.detection.confidence}});
  }
  write_lines(path, lines);
}

void write_annotations(const fs::path& path, const std::vector<AnnotationRecord>& records) {
  std::vector<json> lines;
  for (const auto& r : records) {
    lines.push_back({{"image", r.image.generic_string()},
                     {"bbox", bbox_json(r.annotation.bbox)},
                     {"tilt", r.annotation.tilt},
                     {"pan", r.annotation.pan},
                     {"source", source_name(r.source)}});
  }
  write_lines(path, lines);
}

void write_sample_store(const fs::path& dir, const std::vector<Sample>& samples) {
  fs::create_directories(dir);
  std::vector<json> lines;
  lines.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    char name[32];
    std::snprintf(name, sizeof name, "%07zu.pgm", i);
    write_pgm(dir / name, s.image);
    lines.push_back(
        {{"file", name}, {"tilt", s.tilt}, {"pan", s.pan}, {"source", source_name(s.source)}, {"class_id", s.class_id}});
  }
  write_lines(dir / kSampleIndexName, lines);
}

std::vector<Sample> read_sample_store(const fs::path& dir) {
  std::vector<Sample> samples;
  const fs::path index = dir / kSampleIndexName;
  for_each_record(index, [&](const json& r, std::size_t) {
    Image image = read_netpbm(dir / r.at("file").get<std::string>());
    if (image.width != kCropSide || image.height != kCropSide || image.channels != 1) {
      throw std::invalid_argument("sample images must be 64x64 grayscale");
    }
    Sample s = make_sample(std::move(image), number_field(r, "tilt"), number_field(r, "pan"),
                           parse_source(r.at("source").get<std::string>()));
    if (r.at("class_id").get<int>() != s.class_id) throw std::invalid_argument("class_id disagrees with tilt/pan");
    samples.push_back(std::move(s));
  });
  return samples;
}

}  // namespace hpe::datapipe
