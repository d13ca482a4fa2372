#include "hpe/datapipe/sample.hpp"

#include <algorithm>
#include <cmath>

namespace hpe::datapipe {

std::string source_name(Source source) {
  switch (source) {
    case Source::pointing04: return "p04";
    case Source::aflw: return "aflw";
    case Source::synthetic: return "synthetic";
  }
  return "synthetic";
}

Source parse_source(const std::string& text) {
  if (text == "p04" || text == "pointing04") return Source::pointing04;
  if (text == "aflw") return Source::aflw;
  if (text == "synthetic") return Source::synthetic;
  throw std::invalid_argument("unknown sample source '" + text + "'");
}

namespace {

int bin_of(double value, double lo, double hi) {
  const double clamped = std::clamp(value, lo, hi);
  const int bin = static_cast<int>(std::floor((clamped - lo) / ((hi - lo) / kPoseBins)));
  return std::min(bin, kPoseBins - 1);
}

}  // namespace

int discretize_pose(double tilt, double pan) {
  return bin_of(tilt, kTiltMin, kTiltMax) * kPoseBins + bin_of(pan, kPanMin, kPanMax);
}

Sample make_sample(Image image, double tilt, double pan, Source source) {
  return {std::move(image), tilt, pan, source, discretize_pose(tilt, pan)};
}

Sample hflip_sample(const Sample& s) {
  // 0.0 - pan keeps pan == 0 at +0 rather than producing -0.
  return make_sample(hflip(s.image), s.tilt, 0.0 - s.pan, s.source);
}

}  // namespace hpe::datapipe
