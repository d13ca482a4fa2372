#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hpe/datapipe/geometry.hpp"

namespace hpe::datapipe {

/// Interleaved image with 1 (gray) or 3 (RGB) channels, intensities in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h, int c = 1, float fill = 0.0f);

  float& at(int x, int y, int c = 0) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ResizeMethod { bilinear, pixel_area };

ResizeMethod parse_resize_method(const std::string& text);

struct PipelineConfig {
  double confidence_threshold = 0.65;
  double min_match_iou = 0.0;
  ResizeMethod resize_method = ResizeMethod::bilinear;
};

inline constexpr int kCropSide = 64;

/// 0.299 R + 0.587 G + 0.114 B; gray input is returned unchanged.
Image to_grayscale(const Image& image);

/// Throws std::invalid_argument unless `box` lies inside the image.
Image crop(const Image& image, const BoundingBox& box);

/// Half-pixel-centred bilinear interpolation with replicated borders.
/// Resizing to the same size reproduces the input exactly.
Image resize_bilinear(const Image& image, int width, int height);

/// Area-weighted average for downscaling; falls back to bilinear when
/// either axis is enlarged.
Image resize_area(const Image& image, int width, int height);

Image resize(const Image& image, int width, int height, ResizeMethod method);

/// Crop, convert to grayscale, resize to 64x64.
Image extract_crop(const Image& image, const BoundingBox& box, const PipelineConfig& cfg);

Image hflip(const Image& image);

/// Binary Netpbm: P5 (gray) or P6 (RGB), maxval up to 65535.
Image read_netpbm(const std::filesystem::path& path);

/// Gray image as 8-bit binary P5; intensities are clamped and rounded.
void write_pgm(const std::filesystem::path& path, const Image& image);

/// RGB image as 8-bit binary P6.
void write_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace hpe::datapipe
