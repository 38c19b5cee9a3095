#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

#include "visivar/image.hpp"

namespace visivar {

/// Scalar descriptors of one image (or one candidate tone transform).
///
/// `variance` is the population variance of the brightness samples;
/// `visibility` is the fringe-style contrast (high - low) / (high + low)
/// of the two mean-split subsets. Pixels exactly equal to the mean belong
/// to both subsets, so count_low + count_high can exceed the pixel count.
struct VisibilityReport {
  double mean = 0.0;
  double variance = 0.0;
  double sub_mean_low = 0.0;
  double sub_mean_high = 0.0;
  std::int64_t count_low = 0;
  std::int64_t count_high = 0;
  double visibility = 0.0;
};

struct SplitMeans {
  double sub_mean_low = 0.0;
  std::int64_t count_low = 0;
  double sub_mean_high = 0.0;
  std::int64_t count_high = 0;
};

/// Arithmetic mean of the brightness samples, accumulated in row-major order.
inline double brightness_mean(const BrightnessImage& image) {
  double sum = 0.0;
  for (double s : image.samples()) sum += s;
  return sum / static_cast<double>(image.pixel_count());
}

/// Population variance (division by the pixel count, no Bessel correction).
inline double brightness_variance(const BrightnessImage& image) {
  const double mean = brightness_mean(image);
  double sum = 0.0;
  for (double s : image.samples()) {
    const double d = s - mean;
    sum += d * d;
  }
  return sum / static_cast<double>(image.pixel_count());
}

/// Mean and cardinality of the below-mean and above-mean pixel subsets.
/// Pixels equal to the mean are counted in both.
inline SplitMeans split_sub_means(const BrightnessImage& image) {
  const double mean = brightness_mean(image);
  const auto& samples = image.samples();
  // Membership compares against the mean clamped into [min, max]: the raw
  // quotient can land one ulp outside that interval on near-constant images,
  // which would empty a subset.
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double threshold = std::clamp(mean, *mn, *mx);

  double low_sum = 0.0, high_sum = 0.0;
  std::int64_t low_n = 0, high_n = 0;
  for (double s : samples) {
    if (s <= threshold) {
      low_sum += s;
      ++low_n;
    }
    if (s >= threshold) {
      high_sum += s;
      ++high_n;
    }
  }
  return {low_sum / static_cast<double>(low_n), low_n,
          high_sum / static_cast<double>(high_n), high_n};
}

/// Optics contrast of two fringe intensities, (max - min) / (max + min).
inline double fringe_visibility(double i_max, double i_min) {
  if (!(i_min >= 0.0) || !(i_max >= i_min)) {
    throw std::domain_error("fringe_visibility: requires i_max >= i_min >= 0");
  }
  const double denom = i_max + i_min;
  if (!(denom > 0.0)) {
    throw std::domain_error("fringe_visibility: i_max + i_min must be > 0");
  }
  return (i_max - i_min) / denom;
}

/// Contrast of the mean-split subsets. An all-black image has both sub-means
/// at zero and reports visibility 0.
inline double visibility(const BrightnessImage& image) {
  const SplitMeans s = split_sub_means(image);
  const double denom = s.sub_mean_high + s.sub_mean_low;
  return denom == 0.0 ? 0.0 : (s.sub_mean_high - s.sub_mean_low) / denom;
}

/// All functional values of one image in a single bundle. Each field matches
/// its standalone operation bit-for-bit.
inline VisibilityReport report(const BrightnessImage& image) {
  VisibilityReport r;
  r.mean = brightness_mean(image);
  r.variance = brightness_variance(image);
  const SplitMeans s = split_sub_means(image);
  r.sub_mean_low = s.sub_mean_low;
  r.count_low = s.count_low;
  r.sub_mean_high = s.sub_mean_high;
  r.count_high = s.count_high;
  const double denom = r.sub_mean_high + r.sub_mean_low;
  r.visibility = denom == 0.0 ? 0.0 : (r.sub_mean_high - r.sub_mean_low) / denom;
  return r;
}

namespace detail {

// Weighted report over (value, count) pairs listed in ascending tone order.
// Shared by the public histogram path and the optimizer's candidate loop so
// the two produce bit-identical results.
inline VisibilityReport weighted_report(const double* values,
                                        const std::int64_t* counts,
                                        std::size_t n, std::int64_t total) {
  double wsum = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    wsum += static_cast<double>(counts[i]) * values[i];
    mn = std::min(mn, values[i]);
    mx = std::max(mx, values[i]);
  }
  VisibilityReport r;
  r.mean = wsum / static_cast<double>(total);
  const double threshold = std::clamp(r.mean, mn, mx);

  double var_sum = 0.0, low_sum = 0.0, high_sum = 0.0;
  std::int64_t low_n = 0, high_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    const double c = static_cast<double>(counts[i]);
    const double d = v - r.mean;
    var_sum += c * d * d;
    if (v <= threshold) {
      low_sum += c * v;
      low_n += counts[i];
    }
    if (v >= threshold) {
      high_sum += c * v;
      high_n += counts[i];
    }
  }
  r.variance = var_sum / static_cast<double>(total);
  r.sub_mean_low = low_sum / static_cast<double>(low_n);
  r.count_low = low_n;
  r.sub_mean_high = high_sum / static_cast<double>(high_n);
  r.count_high = high_n;
  const double denom = r.sub_mean_high + r.sub_mean_low;
  r.visibility = denom == 0.0 ? 0.0 : (r.sub_mean_high - r.sub_mean_low) / denom;
  return r;
}

}  // namespace detail

/// Report of the image a 256-entry tone lookup would produce, computed from
/// the histogram alone in O(256). Exact for the transformed image because a
/// lookup maps every pixel of a tone to the same value; only the summation
/// order differs from the per-pixel path.
inline VisibilityReport report_from_lut(const Histogram& histogram,
                                        std::span<const double, 256> lut) {
  if (histogram.total <= 0) {
    throw std::invalid_argument("report_from_lut: empty histogram");
  }
  double values[256];
  std::int64_t counts[256];
  std::size_t n = 0;
  for (int t = 0; t < 256; ++t) {
    if (histogram.counts[t] > 0) {
      values[n] = lut[static_cast<std::size_t>(t)];
      counts[n] = histogram.counts[t];
      ++n;
    }
  }
  return detail::weighted_report(values, counts, n, histogram.total);
}

}  // namespace visivar
