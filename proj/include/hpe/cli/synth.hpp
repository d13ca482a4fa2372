#pragma once

#include <cstdint>
#include <vector>

#include "hpe/datapipe/sample.hpp"

namespace hpe::cli {

struct SyntheticSpec {
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  /// Amplitude of uniform additive noise, in intensity units.
  double noise_level = 0.02;

  void validate() const;
};

inline constexpr double kSynthPanLimit = 90.0;
inline constexpr double kSynthTiltLimit = 60.0;

/// Procedural 64x64 head: a shaded ellipse whose left/right brightness slope
/// follows pan, two eye dots whose height follows tilt, and a nose dot whose
/// horizontal offset follows pan. Mirroring the image is exactly the render
/// of the negated pan when noise is zero.
datapipe::Image render_head(double tilt, double pan, double noise_level, std::uint64_t noise_seed);

/// Deterministic per (seed, index): tilt ~ U[-60, 60], pan ~ U[-90, 90].
datapipe::Sample synth_sample(const SyntheticSpec& spec, std::size_t index);

std::vector<datapipe::Sample> synth_corpus(const SyntheticSpec& spec);

}  // namespace hpe::cli
