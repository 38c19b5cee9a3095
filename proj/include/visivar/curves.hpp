#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "visivar/image.hpp"

namespace visivar {

/// A tone transform compiled to a 256-entry lookup table: lut[t] is the
/// output brightness for input tone t. Entries may leave [0, 255]; range
/// checking is a separate step (validate_range / apply_curve).
struct ToneCurve {
  std::array<double, 256> lut{};
  std::string label;
};

inline ToneCurve identity_curve() {
  ToneCurve c;
  c.label = "identity";
  for (int t = 0; t < 256; ++t) c.lut[static_cast<std::size_t>(t)] = t;
  return c;
}

/// Parameters of the two-branch power transform: tones at or below the pivot
/// are darkened by a1 * |(b - 0)(b - pivot)|^alpha, tones above it are
/// brightened by a2 * |(b - 255)(b - pivot)|^beta. Both corrections vanish at
/// the tone-scale endpoints and at the pivot, so 0 and 255 stay fixed and the
/// two branches meet continuously.
struct TransformParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double pivot = 127.5;
};

namespace detail {

inline double low_branch_weight(int tone, double pivot) {
  const double b = tone;
  return std::fabs(b * (b - pivot));
}

inline double high_branch_weight(int tone, double pivot) {
  const double b = tone;
  return std::fabs((b - 255.0) * (b - pivot));
}

// The zero-amplitude guard keeps a1 = 0 an exact identity even when the
// powered weight overflows; for finite weights the arithmetic is unchanged.
inline double low_branch_value(int tone, double a1, double powered_weight) {
  const double b = tone;
  return a1 == 0.0 ? b : b - a1 * powered_weight;
}

inline double high_branch_value(int tone, double a2, double powered_weight) {
  const double b = tone;
  return a2 == 0.0 ? b : b + a2 * powered_weight;
}

inline void check_params(const TransformParams& p) {
  if (!(p.a1 >= 0.0) || !std::isfinite(p.a1) || !(p.a2 >= 0.0) ||
      !std::isfinite(p.a2)) {
    throw std::invalid_argument("transform params: a1 and a2 must be >= 0");
  }
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha) || !(p.beta > 0.0) ||
      !std::isfinite(p.beta)) {
    throw std::invalid_argument("transform params: alpha and beta must be > 0");
  }
  if (!(p.pivot >= 0.0 && p.pivot <= 255.0)) {
    throw std::invalid_argument("transform params: pivot must be in [0, 255]");
  }
}

}  // namespace detail

/// Compile the two-branch power transform to a lookup table. Tones equal to
/// the pivot take the low branch; both branches evaluate to the pivot there.
inline ToneCurve pivot_power_curve(const TransformParams& p) {
  detail::check_params(p);
  ToneCurve c;
  char label[128];
  std::snprintf(label, sizeof(label),
                "pivot-power a1=%g a2=%g alpha=%g beta=%g pivot=%g", p.a1,
                p.a2, p.alpha, p.beta, p.pivot);
  c.label = label;
  for (int t = 0; t < 256; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (t <= p.pivot) {
      c.lut[i] = detail::low_branch_value(
          t, p.a1, std::pow(detail::low_branch_weight(t, p.pivot), p.alpha));
    } else {
      c.lut[i] = detail::high_branch_value(
          t, p.a2, std::pow(detail::high_branch_weight(t, p.pivot), p.beta));
    }
  }
  return c;
}

struct ControlPoint {
  double tone = 0.0;
  double value = 0.0;
};

/// Freehand curve given as control points with strictly increasing tones.
/// The first point must sit at tone 0 and the last at tone 255.
class ControlPointCurve {
 public:
  explicit ControlPointCurve(std::vector<ControlPoint> points)
      : points_(std::move(points)) {
    if (points_.size() < 2) {
      throw std::invalid_argument("control points: need at least 2 points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const ControlPoint& p = points_[i];
      if (!(p.tone >= 0.0 && p.tone <= 255.0) ||
          !(p.value >= 0.0 && p.value <= 255.0)) {
        throw std::invalid_argument("control points: point " +
                                    std::to_string(i) + " outside [0, 255]");
      }
      if (i > 0 && !(points_[i - 1].tone < p.tone)) {
        throw std::invalid_argument(
            "control points: tones must be strictly increasing (point " +
            std::to_string(i) + ")");
      }
    }
    if (points_.front().tone != 0.0 || points_.back().tone != 255.0) {
      throw std::invalid_argument(
          "control points: endpoints at tones 0 and 255 are required");
    }
  }

  const std::vector<ControlPoint>& points() const noexcept { return points_; }

 private:
  std::vector<ControlPoint> points_;
};

/// Piecewise-linear interpolation of the control points, sampled at the 256
/// integer tones and clamped to [0, 255]. Control tones that are themselves
/// integers map to their stated values exactly.
inline ToneCurve curve_from_points(const ControlPointCurve& curve) {
  const auto& pts = curve.points();
  ToneCurve c;
  c.label = "points n=" + std::to_string(pts.size());
  std::size_t seg = 0;
  for (int t = 0; t < 256; ++t) {
    while (pts[seg + 1].tone < t) ++seg;
    const ControlPoint& p0 = pts[seg];
    const ControlPoint& p1 = pts[seg + 1];
    double v;
    if (t == p0.tone) {
      v = p0.value;
    } else if (t == p1.tone) {
      v = p1.value;
    } else {
      v = p0.value + (t - p0.tone) * (p1.value - p0.value) / (p1.tone - p0.tone);
    }
    c.lut[static_cast<std::size_t>(t)] = std::clamp(v, 0.0, 255.0);
  }
  return c;
}

/// Parse the text form "t0,v0;t1,v1;...;255,v255".
inline ControlPointCurve parse_control_points(std::string_view text) {
  std::vector<ControlPoint> points;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find(';', begin);
    if (end == std::string_view::npos) end = text.size();
    const std::string pair(text.substr(begin, end - begin));
    const std::size_t index = points.size();
    double tone = 0.0, value = 0.0;
    char trailing = '\0';
    if (std::sscanf(pair.c_str(), " %lf , %lf %c", &tone, &value, &trailing) !=
        2) {
      throw std::invalid_argument("control points: bad pair \"" + pair +
                                  "\" at index " + std::to_string(index));
    }
    points.push_back({tone, value});
    begin = end + 1;
    if (end == text.size()) break;
  }
  return ControlPointCurve(std::move(points));
}

class CurveRangeError : public std::runtime_error {
 public:
  CurveRangeError(int tone, double value)
      : std::runtime_error("curve maps tone " + std::to_string(tone) +
                           " to " + std::to_string(value) +
                           ", outside [0, 255]"),
        tone_(tone),
        value_(value) {}

  int tone() const noexcept { return tone_; }
  double value() const noexcept { return value_; }

 private:
  int tone_;
  double value_;
};

/// Look up every pixel's quantized tone in the curve. Dimensions are
/// preserved; a lookup value outside [0, 255] on a tone the image actually
/// occupies raises CurveRangeError naming that tone.
inline BrightnessImage apply_curve(const BrightnessImage& image,
                                   const ToneCurve& curve) {
  std::vector<double> out;
  out.reserve(image.samples().size());
  for (double s : image.samples()) {
    const int tone = quantize_tone(s);
    const double v = curve.lut[static_cast<std::size_t>(tone)];
    if (!(v >= 0.0 && v <= 255.0)) {
      throw CurveRangeError(tone, v);
    }
    out.push_back(v);
  }
  return BrightnessImage(image.width(), image.height(), std::move(out));
}

struct RangeViolation {
  int tone = 0;
  double value = 0.0;
};

/// First occupied tone whose lookup value leaves [0, 255], if any. Tones with
/// zero histogram count are ignored: the rejection criterion is about the
/// brightness the image would actually produce.
inline std::optional<RangeViolation> find_range_violation(
    const ToneCurve& curve, const Histogram& histogram) {
  for (int t = 0; t < 256; ++t) {
    if (histogram.counts[static_cast<std::size_t>(t)] > 0) {
      const double v = curve.lut[static_cast<std::size_t>(t)];
      if (!(v >= 0.0 && v <= 255.0)) {
        return RangeViolation{t, v};
      }
    }
  }
  return std::nullopt;
}

/// Copy of the curve with every entry clamped to [0, 255].
inline ToneCurve clamp_curve(ToneCurve curve) {
  for (double& v : curve.lut) {
    if (v < 0.0) v = 0.0;
    if (v > 255.0) v = 255.0;
  }
  return curve;
}

enum class RangeMode { kReject, kClamp };

using RangeCheckResult = std::variant<ToneCurve, RangeViolation>;

/// Reject mode: pass the curve through iff every occupied tone stays in
/// range, otherwise return the first violation. Clamp mode: force all
/// entries into [0, 255].
inline RangeCheckResult validate_range(const ToneCurve& curve,
                                       const Histogram& histogram,
                                       RangeMode mode) {
  if (mode == RangeMode::kClamp) {
    return clamp_curve(curve);
  }
  if (auto violation = find_range_violation(curve, histogram)) {
    return *violation;
  }
  return curve;
}

/// 256 lines "tone,value".
inline void write_curve_csv(std::ostream& os, const ToneCurve& curve) {
  char line[64];
  for (int t = 0; t < 256; ++t) {
    std::snprintf(line, sizeof(line), "%d,%.9g\n", t,
                  curve.lut[static_cast<std::size_t>(t)]);
    os << line;
  }
}

}  // namespace visivar
