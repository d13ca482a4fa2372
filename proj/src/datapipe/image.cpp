#include "hpe/datapipe/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

namespace hpe::datapipe {

Image::Image(int w, int h, int c, float fill) : width(w), height(h), channels(c) {
  if (w <= 0 || h <= 0 || (c != 1 && c != 3)) throw std::invalid_argument("invalid image dimensions");
  pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
}

ResizeMethod parse_resize_method(const std::string& text) {
  if (text == "bilinear") return ResizeMethod::bilinear;
  if (text == "pixel_area" || text == "area") return ResizeMethod::pixel_area;
  throw std::invalid_argument("unknown resize method '" + text + "' (expected bilinear or pixel_area)");
}

Image to_grayscale(const Image& image) {
  if (image.channels == 1) return image;
  Image out(image.width, image.height, 1);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const float* rgb = &image.pixels[i * 3];
    out.pixels[i] = 0.299f * rgb[0] + 0.587f * rgb[1] + 0.114f * rgb[2];
  }
  return out;
}

Image crop(const Image& image, const BoundingBox& box) {
  if (!box.valid() || box.x < 0 || box.y < 0 || box.x + box.w > image.width || box.y + box.h > image.height) {
    throw std::invalid_argument("crop box lies outside the image");
  }
  Image out(box.w, box.h, image.channels);
  const std::size_t row = static_cast<std::size_t>(box.w) * image.channels;
  for (int y = 0; y < box.h; ++y) {
    const float* src = &image.pixels[(static_cast<std::size_t>(box.y + y) * image.width + box.x) * image.channels];
    std::copy(src, src + row, &out.pixels[static_cast<std::size_t>(y) * row]);
  }
  return out;
}

namespace {

struct Tap {
  int lo, hi;
  float frac;  // weight of `hi`
};

std::vector<Tap> bilinear_taps(int src, int dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    taps[i] = {lo, std::min(lo + 1, src - 1), static_cast<float>(s - lo)};
  }
  return taps;
}

struct AreaWeights {
  std::vector<std::vector<std::pair<int, float>>> per_output;
};

AreaWeights area_weights(int src, int dst) {
  AreaWeights aw;
  aw.per_output.resize(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double begin = i * scale;
    const double end = (i + 1) * scale;
    for (int k = static_cast<int>(std::floor(begin)); k < src && k < end; ++k) {
      const double overlap = std::min<double>(k + 1, end) - std::max<double>(k, begin);
      if (overlap > 0) aw.per_output[i].emplace_back(k, static_cast<float>(overlap / scale));
    }
  }
  return aw;
}

}  // namespace

Image resize_bilinear(const Image& image, int width, int height) {
  Image out(width, height, image.channels);
  const auto xt = bilinear_taps(image.width, width);
  const auto yt = bilinear_taps(image.height, height);
  for (int y = 0; y < height; ++y) {
    const Tap ty = yt[y];
    for (int x = 0; x < width; ++x) {
      const Tap tx = xt[x];
      for (int c = 0; c < image.channels; ++c) {
        const float top = image.at(tx.lo, ty.lo, c) * (1.0f - tx.frac) + image.at(tx.hi, ty.lo, c) * tx.frac;
        const float bottom = image.at(tx.lo, ty.hi, c) * (1.0f - tx.frac) + image.at(tx.hi, ty.hi, c) * tx.frac;
        out.at(x, y, c) = top * (1.0f - ty.frac) + bottom * ty.frac;
      }
    }
  }
  return out;
}

Image resize_area(const Image& image, int width, int height) {
  if (width > image.width || height > image.height) return resize_bilinear(image, width, height);
  const auto xw = area_weights(image.width, width);
  const auto yw = area_weights(image.height, height);
  Image horizontal(width, image.height, image.channels);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        float acc = 0.0f;
        for (const auto& [k, w] : xw.per_output[x]) acc += image.at(k, y, c) * w;
        horizontal.at(x, y, c) = acc;
      }
  Image out(width, height, image.channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        float acc = 0.0f;
        for (const auto& [k, w] : yw.per_output[y]) acc += horizontal.at(x, k, c) * w;
        out.at(x, y, c) = acc;
      }
  return out;
}

Image resize(const Image& image, int width, int height, ResizeMethod method) {
  return method == ResizeMethod::pixel_area ? resize_area(image, width, height)
                                            : resize_bilinear(image, width, height);
}

Image extract_crop(const Image& image, const BoundingBox& box, const PipelineConfig& cfg) {
  return resize(to_grayscale(crop(image, box)), kCropSide, kCropSide, cfg.resize_method);
}

Image hflip(const Image& image) {
  Image out = image;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) out.at(image.width - 1 - x, y, c) = image.at(x, y, c);
  return out;
}

namespace {

std::string next_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

int header_int(std::istream& in, const std::filesystem::path& path) {
  const std::string token = next_token(in);
  try {
    return std::stoi(token);
  } catch (const std::exception&) {
    throw ImageIoError(path.string() + ": malformed Netpbm header");
  }
}

void write_netpbm(const std::filesystem::path& path, const Image& image, const char* magic) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot write " + path.string());
  out << magic << '\n' << image.width << ' ' << image.height << "\n255\n";
  std::string bytes(image.pixels.size(), '\0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const float v = std::clamp(image.pixels[i], 0.0f, 1.0f);
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageIoError("failed writing " + path.string());
}

}  // namespace

Image read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open image " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P6") throw ImageIoError(path.string() + ": only binary P5/P6 images are supported");
  const int width = header_int(in, path);
  const int height = header_int(in, path);
  const int maxval = header_int(in, path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw ImageIoError(path.string() + ": invalid Netpbm dimensions");
  }
  Image image(width, height, magic == "P5" ? 1 : 3);
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::string raw(image.pixels.size() * bytes_per, '\0');
  if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
    throw ImageIoError(path.string() + ": truncated pixel data");
  }
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    unsigned v = static_cast<unsigned char>(raw[i * bytes_per]);
    if (bytes_per == 2) v = (v << 8) | static_cast<unsigned char>(raw[i * 2 + 1]);
    image.pixels[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1) throw ImageIoError("PGM output requires a gray image");
  write_netpbm(path, image, "P5");
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 3) throw ImageIoError("PPM output requires an RGB image");
  write_netpbm(path, image, "P6");
}

}  // namespace hpe::datapipe
