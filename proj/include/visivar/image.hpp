#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace visivar {

/// Round-half-up to the nearest integer tone, clamped to [0, 255].
inline int quantize_tone(double sample) noexcept {
  const int t = static_cast<int>(std::floor(sample + 0.5));
  return std::clamp(t, 0, 255);
}

/// Rectangular grid of real-valued brightness samples, row-major.
///
/// Samples stay real-valued throughout the pipeline; they are only collapsed
/// to integer tones when a histogram is taken or a file is written. Instances
/// are immutable after construction, so they can be shared freely across
/// threads.
class BrightnessImage {
 public:
  BrightnessImage(int width, int height, std::vector<double> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    if (width_ < 1 || height_ < 1) {
      throw std::invalid_argument("image: dimensions must be positive, got " +
                                  std::to_string(width_) + "x" +
                                  std::to_string(height_));
    }
    const std::size_t expected =
        static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    if (samples_.size() != expected) {
      throw std::invalid_argument(
          "image: sample count " + std::to_string(samples_.size()) +
          " does not match " + std::to_string(width_) + "x" +
          std::to_string(height_));
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const double s = samples_[i];
      if (!(s >= 0.0 && s <= 255.0)) {
        throw std::invalid_argument(
            "image: sample " + std::to_string(s) + " at index " +
            std::to_string(i) + " outside [0, 255]");
      }
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::int64_t pixel_count() const noexcept {
    return static_cast<std::int64_t>(width_) * height_;
  }
  const std::vector<double>& samples() const noexcept { return samples_; }

 private:
  int width_;
  int height_;
  std::vector<double> samples_;
};

/// Pixel counts per integer tone 0..255. total equals the pixel count of the
/// source image.
struct Histogram {
  std::array<std::int64_t, 256> counts{};
  std::int64_t total = 0;
};

/// Tally of quantized tones; counts always sum to width*height.
inline Histogram compute_histogram(const BrightnessImage& image) {
  Histogram h;
  for (double s : image.samples()) {
    ++h.counts[quantize_tone(s)];
  }
  h.total = image.pixel_count();
  return h;
}

/// Luminance conversion for interleaved 8-bit RGB triples, using the classic
/// 0.299/0.587/0.114 weights. Output samples are real-valued, not quantized.
inline BrightnessImage rgb_to_brightness(std::span<const unsigned char> rgb,
                                         int width, int height) {
  const std::size_t expected =
      3u * static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (width < 1 || height < 1 || rgb.size() != expected) {
    throw std::invalid_argument(
        "rgb_to_brightness: got " + std::to_string(rgb.size()) +
        " bytes, expected " + std::to_string(expected) + " for " +
        std::to_string(width) + "x" + std::to_string(height));
  }
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    samples.push_back(0.299 * rgb[i] + 0.587 * rgb[i + 1] + 0.114 * rgb[i + 2]);
  }
  return BrightnessImage(width, height, std::move(samples));
}

}  // namespace visivar
