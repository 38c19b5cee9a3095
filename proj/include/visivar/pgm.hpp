#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "visivar/image.hpp"

namespace visivar {

class PgmParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Header scanner for whitespace-separated PNM tokens. '#' starts a comment
// that runs to end of line and may appear wherever whitespace may.
struct PgmReader {
  std::span<const unsigned char> data;
  std::size_t pos = 0;

  bool eof() const { return pos >= data.size(); }

  void skip_separators() {
    while (!eof()) {
      const unsigned char c = data[pos];
      if (c == '#') {
        while (!eof() && data[pos] != '\n') ++pos;
      } else if (std::isspace(c)) {
        ++pos;
      } else {
        break;
      }
    }
  }

  long read_number(const char* field) {
    skip_separators();
    if (eof()) {
      throw PgmParseError(std::string("pgm: missing ") + field +
                          " at byte offset " + std::to_string(pos));
    }
    if (!std::isdigit(data[pos])) {
      throw PgmParseError(std::string("pgm: invalid ") + field +
                          " at byte offset " + std::to_string(pos));
    }
    long value = 0;
    while (!eof() && std::isdigit(data[pos])) {
      value = value * 10 + (data[pos] - '0');
      if (value > 1000000000L) {
        throw PgmParseError(std::string("pgm: ") + field +
                            " too large at byte offset " +
                            std::to_string(pos));
      }
      ++pos;
    }
    return value;
  }
};

inline double scale_tone(long tone, long maxval) {
  // Tones from files with maxval < 255 are mapped onto the 0..255 scale and
  // kept real-valued.
  return maxval == 255 ? static_cast<double>(tone)
                       : static_cast<double>(tone) * 255.0 / maxval;
}

}  // namespace detail

/// Parse a PGM file ("P2" ASCII or "P5" binary, maxval <= 255). Samples from
/// files with maxval m < 255 are rescaled by 255/m.
inline BrightnessImage load_pgm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '2' && bytes[1] != '5')) {
    std::string magic;
    for (std::size_t i = 0; i < bytes.size() && i < 2; ++i) {
      const unsigned char c = bytes[i];
      magic += std::isprint(c) ? static_cast<char>(c) : '?';
    }
    throw PgmParseError("pgm: unsupported magic \"" + magic +
                        "\" (expected P2 or P5)");
  }
  const bool binary = bytes[1] == '5';

  detail::PgmReader reader{bytes, 2};
  const long width = reader.read_number("width");
  const long height = reader.read_number("height");
  if (width == 0 || height == 0) {
    throw PgmParseError("pgm: zero " +
                        std::string(width == 0 ? "width" : "height") +
                        " in header");
  }
  const long maxval = reader.read_number("maxval");
  if (maxval == 0) {
    throw PgmParseError("pgm: invalid maxval 0");
  }
  if (maxval > 255) {
    throw PgmParseError("pgm: maxval " + std::to_string(maxval) +
                        " exceeds 255");
  }

  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> samples;
  samples.reserve(count);

  if (binary) {
    if (reader.eof() || !std::isspace(bytes[reader.pos])) {
      throw PgmParseError("pgm: expected whitespace after maxval at byte "
                          "offset " +
                          std::to_string(reader.pos));
    }
    ++reader.pos;  // exactly one separator byte before the raster
    if (bytes.size() - reader.pos < count) {
      throw PgmParseError(
          "pgm: truncated pixel data at byte offset " +
          std::to_string(reader.pos) + " (expected " + std::to_string(count) +
          " bytes, found " + std::to_string(bytes.size() - reader.pos) + ")");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const long tone = bytes[reader.pos + i];
      if (tone > maxval) {
        throw PgmParseError("pgm: sample " + std::to_string(tone) +
                            " exceeds maxval " + std::to_string(maxval) +
                            " at byte offset " +
                            std::to_string(reader.pos + i));
      }
      samples.push_back(detail::scale_tone(tone, maxval));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long tone = reader.read_number("sample");
      if (tone > maxval) {
        throw PgmParseError("pgm: sample " + std::to_string(tone) +
                            " exceeds maxval " + std::to_string(maxval) +
                            " at byte offset " + std::to_string(reader.pos));
      }
      samples.push_back(detail::scale_tone(tone, maxval));
    }
  }

  return BrightnessImage(static_cast<int>(width), static_cast<int>(height),
                         std::move(samples));
}

/// Serialize as binary P5 with maxval 255. Samples are quantized
/// round-half-up and clamped to [0, 255].
inline std::vector<unsigned char> save_pgm(const BrightnessImage& image) {
  char header[64];
  const int n = std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n",
                              image.width(), image.height());
  std::vector<unsigned char> out(header, header + n);
  out.reserve(out.size() + image.samples().size());
  for (double s : image.samples()) {
    out.push_back(static_cast<unsigned char>(quantize_tone(s)));
  }
  return out;
}

inline BrightnessImage load_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw PgmParseError("pgm: cannot open \"" + path + "\"");
  }
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  return load_pgm(bytes);
}

inline void save_pgm_file(const std::string& path,
                          const BrightnessImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("pgm: cannot write \"" + path + "\"");
  }
  const std::vector<unsigned char> bytes = save_pgm(image);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("pgm: write failed for \"" + path + "\"");
  }
}

}  // namespace visivar
