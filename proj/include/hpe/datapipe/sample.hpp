#pragma once

#include <string>

#include "hpe/datapipe/image.hpp"

namespace hpe::datapipe {

enum class Source { pointing04, aflw, synthetic };

/// Wire names: "p04", "aflw", "synthetic".
std::string source_name(Source source);
Source parse_source(const std::string& text);

inline constexpr double kTiltMin = -90.0, kTiltMax = 90.0;
inline constexpr double kPanMin = -100.0, kPanMax = 100.0;
inline constexpr int kPoseBins = 8;
inline constexpr int kPoseClasses = kPoseBins * kPoseBins;

/// 8 equal tilt bins over [-90, 90] x 8 equal pan bins over [-100, 100];
/// class = tilt_bin * 8 + pan_bin. Inputs are clamped; upper edges land in the last bin.
int discretize_pose(double tilt, double pan);

/// A 64x64 gray head crop with its pose label.
struct Sample {
  Image image;
  double tilt = 0.0;
  double pan = 0.0;
  Source source = Source::synthetic;
  int class_id = 0;
};

Sample make_sample(Image image, double tilt, double pan, Source source);

/// Mirrors the image left-right and negates pan; tilt is unchanged.
Sample hflip_sample(const Sample& s);

}  // namespace hpe::datapipe
