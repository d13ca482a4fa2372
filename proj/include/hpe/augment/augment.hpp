#pragma once

#include <random>
#include <vector>

#include "hpe/datapipe/image.hpp"
#include "hpe/datapipe/sample.hpp"

namespace hpe::augment {

using datapipe::Image;

/// Random perturbation ranges. shift_range is a fraction of the image side per
/// axis; brightness and zoom are multiplicative factor ranges.
struct AugmentConfig {
  double shift_range = 0.0;
  double brightness_min = 1.0;
  double brightness_max = 1.0;
  double zoom_min = 1.0;
  double zoom_max = 1.0;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  bool is_identity() const;
  bool operator==(const AugmentConfig&) const = default;
};

/// One concrete perturbation.
struct AugmentDraw {
  int dx = 0;
  int dy = 0;
  double brightness = 1.0;
  double zoom = 1.0;
  bool operator==(const AugmentDraw&) const = default;
};

/// Translates content by (dx, dy); vacated pixels repeat the nearest edge.
Image apply_shift(const Image& image, int dx, int dy);

/// Multiplies intensities by `factor` and clamps to [0, 1].
Image apply_brightness(const Image& image, double factor);

/// Bilinear resize to round(side * factor), then a centred crop back to the
/// original size, or centred edge padding when the resized image is smaller.
Image apply_zoom(const Image& image, double factor);

/// dx, dy uniform in [-floor(shift_range * 64), +floor(shift_range * 64)];
/// brightness and zoom uniform in their ranges.
AugmentDraw sample_augmentation(const AugmentConfig& cfg, std::mt19937_64& rng);

/// Zoom, then shift, then brightness. The identity draw returns the input unchanged.
Image apply_augmentation(const Image& image, const AugmentDraw& draw);

/// Same labels, perturbed image.
datapipe::Sample augment_sample(const datapipe::Sample& sample, const AugmentDraw& draw);

/// The 4 x 3 x 3 grid: shift {0, .1, .2, .3}, brightness {1-1, .75-1.25, .5-1.5},
/// zoom {1-1, .75-1.25, .5-1.5}, shift varying slowest.
std::vector<AugmentConfig> augment_grid();

}  // namespace hpe::augment
