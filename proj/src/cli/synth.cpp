#include "hpe/cli/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hpe/common/random.hpp"

namespace hpe::cli {

namespace {

constexpr int kSide = datapipe::kCropSide;
constexpr double kCentre = kSide / 2.0;
constexpr double kRadiusX = 20.0, kRadiusY = 26.0;
constexpr double kBackground = 0.1;
constexpr double kDotRadius = 2.5;

// Coverage of a disc of radius `r` at distance `d`, with a one-pixel ramp.
double disc(double d, double r) { return std::clamp(r + 0.5 - d, 0.0, 1.0); }

}  // namespace

void SyntheticSpec::validate() const {
  if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw std::invalid_argument("noise_level must be in [0, 1]");
}

datapipe::Image render_head(double tilt, double pan, double noise_level, std::uint64_t noise_seed) {
  const double slope = 0.35 * (pan / kSynthPanLimit);
  const double lift = tilt / kSynthTiltLimit * 10.0;
  const double nose_dx = pan / kSynthPanLimit * 10.0;
  const double eye_y = kCentre - 6.0 - lift;
  const double nose_y = kCentre + 4.0 - lift;

  datapipe::Image img(kSide, kSide, 1, static_cast<float>(kBackground));
  std::mt19937_64 rng(noise_seed);
  for (int y = 0; y < kSide; ++y) {
    const double yc = y + 0.5 - kCentre;
    for (int x = 0; x < kSide; ++x) {
      const double xc = x + 0.5 - kCentre;
      double v = kBackground;
      const double e = (xc / kRadiusX) * (xc / kRadiusX) + (yc / kRadiusY) * (yc / kRadiusY);
      if (e <= 1.0) {
        v = 0.5 + slope * (xc / kRadiusX);
        const double py = y + 0.5;
        const double eyes = disc(std::hypot(std::abs(xc) - 8.0, py - eye_y), kDotRadius);
        const double nose = disc(std::hypot(xc - nose_dx, py - nose_y), kDotRadius);
        v = v * (1.0 - eyes) + 0.05 * eyes;
        v = v * (1.0 - nose) + 0.95 * nose;
      }
      if (noise_level > 0.0) v += noise_level * (2.0 * uniform01(rng) - 1.0);
      img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return img;
}

datapipe::Sample synth_sample(const SyntheticSpec& spec, std::size_t index) {
  std::mt19937_64 rng(derive_seed({spec.seed, index}));
  const double tilt = uniform_real(rng, -kSynthTiltLimit, kSynthTiltLimit);
  const double pan = uniform_real(rng, -kSynthPanLimit, kSynthPanLimit);
  return datapipe::make_sample(render_head(tilt, pan, spec.noise_level, rng()), tilt, pan,
                               datapipe::Source::synthetic);
}

std::vector<datapipe::Sample> synth_corpus(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<datapipe::Sample> out;
  out.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) out.push_back(synth_sample(spec, i));
  return out;
}

}  // namespace hpe::cli
