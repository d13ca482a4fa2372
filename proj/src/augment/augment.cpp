#include "hpe/augment/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hpe/common/random.hpp"

namespace hpe::augment {

void AugmentConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(shift_range) || shift_range < 0.0 || shift_range >= 1.0) {
    throw std::invalid_argument("shift_range must be in [0, 1)");
  }
  if (!finite(brightness_min) || !finite(brightness_max) || brightness_min <= 0.0 || brightness_min > brightness_max) {
    throw std::invalid_argument("brightness range must satisfy 0 < min <= max");
  }
  if (!finite(zoom_min) || !finite(zoom_max) || zoom_min <= 0.0 || zoom_min > zoom_max) {
    throw std::invalid_argument("zoom range must satisfy 0 < min <= max");
  }
}

bool AugmentConfig::is_identity() const { return *this == AugmentConfig{}; }

Image apply_shift(const Image& image, int dx, int dy) {
  if (dx == 0 && dy == 0) return image;
  Image out(image.width, image.height, image.channels);
  for (int y = 0; y < image.height; ++y) {
    const int sy = std::clamp(y - dy, 0, image.height - 1);
    for (int x = 0; x < image.width; ++x) {
      const int sx = std::clamp(x - dx, 0, image.width - 1);
      for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = image.at(sx, sy, c);
    }
  }
  return out;
}

Image apply_brightness(const Image& image, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("brightness factor must be positive");
  if (factor == 1.0) return image;
  Image out = image;
  const float f = static_cast<float>(factor);
  for (float& v : out.pixels) v = std::clamp(v * f, 0.0f, 1.0f);
  return out;
}

Image apply_zoom(const Image& image, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("zoom factor must be positive");
  const int w = std::max(1, static_cast<int>(std::lround(image.width * factor)));
  const int h = std::max(1, static_cast<int>(std::lround(image.height * factor)));
  if (w == image.width && h == image.height) return image;
  const Image scaled = datapipe::resize_bilinear(image, w, h);
  // Offset of the output window inside the scaled image; negative means padding.
  const int ox = (w - image.width) / 2;
  const int oy = (h - image.height) / 2;
  Image out(image.width, image.height, image.channels);
  for (int y = 0; y < image.height; ++y) {
    const int sy = std::clamp(y + oy, 0, h - 1);
    for (int x = 0; x < image.width; ++x) {
      const int sx = std::clamp(x + ox, 0, w - 1);
      for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = scaled.at(sx, sy, c);
    }
  }
  return out;
}

AugmentDraw sample_augmentation(const AugmentConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const int max_shift = static_cast<int>(std::floor(cfg.shift_range * datapipe::kCropSide));
  AugmentDraw d;
  d.dx = static_cast<int>(uniform_int(rng, -max_shift, max_shift));
  d.dy = static_cast<int>(uniform_int(rng, -max_shift, max_shift));
  d.brightness = uniform_real(rng, cfg.brightness_min, cfg.brightness_max);
  d.zoom = uniform_real(rng, cfg.zoom_min, cfg.zoom_max);
  return d;
}

Image apply_augmentation(const Image& image, const AugmentDraw& draw) {
  if (draw == AugmentDraw{}) return image;
  return apply_brightness(apply_shift(apply_zoom(image, draw.zoom), draw.dx, draw.dy), draw.brightness);
}

datapipe::Sample augment_sample(const datapipe::Sample& sample, const AugmentDraw& draw) {
  datapipe::Sample out = sample;
  out.image = apply_augmentation(sample.image, draw);
  return out;
}

std::vector<AugmentConfig> augment_grid() {
  const double shifts[] = {0.0, 0.1, 0.2, 0.3};
  const double spreads[] = {0.0, 0.25, 0.5};
  std::vector<AugmentConfig> grid;
  for (double s : shifts)
    for (double b : spreads)
      for (double z : spreads) grid.push_back({s, 1.0 - b, 1.0 + b, 1.0 - z, 1.0 + z});
  return grid;
}

}  // namespace hpe::augment
