// SPDX-License-Identifier: Apache-2.0
//
// Text form of a keyframe payload, laid out like the OpenCV FileStorage YAML
// the robots ship:
//
//   %YAML:1.0
//   ---
//   KeyPoint:
//      - [ u, v, response, octave ]        one row per feature
//   Depth: [ d0, d1, ... ]                 meters
//   Descriptor: !!opencv-matrix
//      rows: N
//      cols: 32
//      dt: u
//      data: [ b0, b1, ... ]               N*32 bytes, row-major
//   Time: t                                seconds since epoch
//
// Reals are written as %.16e (17 significant digits), so parse followed by
// format reproduces the input byte for byte. An empty payload writes `[]`
// for KeyPoint, Depth and data.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cloudreg/detail/format.hpp"
#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/io.hpp"

namespace cloudreg::keyframe {

inline std::string format(const KeyframePayload& kf) {
  using cloudreg::detail::fmt_e16;
  kf.validate();
  const std::size_t n = kf.size();
  std::string out;
  out.reserve(256 + n * 256);
  out += "%YAML:1.0\n---\n";
  if (n == 0) {
    out += "KeyPoint: []\n";
  } else {
    out += "KeyPoint:\n";
    for (const auto& k : kf.keypoints) {
      out += "   - [ " + fmt_e16(k.u) + ", " + fmt_e16(k.v) + ", " + fmt_e16(k.response) + ", " +
             std::to_string(k.octave) + " ]\n";
    }
  }
  out += "Depth: [";
  for (std::size_t i = 0; i < n; ++i) {
    out += i == 0 ? " " : ", ";
    out += fmt_e16(kf.depths[i]);
  }
  out += n == 0 ? "]\n" : " ]\n";
  out += "Descriptor: !!opencv-matrix\n";
  out += "   rows: " + std::to_string(n) + "\n";
  out += "   cols: " + std::to_string(KeyframePayload::kDescriptorBytes) + "\n";
  out += "   dt: u\n";
  out += "   data: [";
  bool first = true;
  for (const auto& d : kf.descriptors) {
    for (const auto b : d) {
      out += first ? " " : ", ";
      first = false;
      out += std::to_string(static_cast<unsigned>(b));
    }
  }
  out += n == 0 ? "]\n" : " ]\n";
  out += "Time: " + fmt_e16(kf.timestamp) + "\n";
  return out;
}

namespace detail {

using io::detail::malformed;

// Splits the body of "[ a, b, c ]" into its comma-separated items.
inline std::vector<std::string_view> bracket_items(std::string_view s, std::size_t line) {
  s = cloudreg::detail::trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') malformed("expected '[ ... ]'", line);
  s = cloudreg::detail::trim(s.substr(1, s.size() - 2));
  std::vector<std::string_view> items;
  if (s.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    items.push_back(cloudreg::detail::trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

inline std::string_view expect_prefix(std::string_view line, std::string_view prefix, std::size_t n) {
  if (line.substr(0, prefix.size()) != prefix) {
    malformed("expected '" + std::string(prefix) + "'", n);
  }
  return line.substr(prefix.size());
}

inline double real(std::string_view s, std::size_t line) {
  const auto v = cloudreg::detail::parse_double(s);
  if (!v) malformed("bad number '" + std::string(s) + "'", line);
  return *v;
}

}  // namespace detail

inline KeyframePayload parse(std::string_view text) {
  using detail::expect_prefix;
  using detail::malformed;
  io::detail::Lines lines(text);
  std::string_view line;
  auto next = [&]() {
    if (!lines.next(line)) malformed("unexpected end of file", lines.number());
  };

  KeyframePayload kf;
  next();
  if (line != "%YAML:1.0") malformed("expected '%YAML:1.0'", lines.number());
  next();
  if (line != "---") malformed("expected '---'", lines.number());

  next();
  if (line == "KeyPoint:") {
    next();
    while (line.substr(0, 5) == "   - ") {
      const auto items = detail::bracket_items(line.substr(5), lines.number());
      if (items.size() != 4) malformed("keypoint row needs 4 values", lines.number());
      KeyPoint k;
      k.u = detail::real(items[0], lines.number());
      k.v = detail::real(items[1], lines.number());
      k.response = detail::real(items[2], lines.number());
      const auto oct = cloudreg::detail::parse_int<int>(items[3]);
      if (!oct) malformed("bad octave", lines.number());
      k.octave = *oct;
      kf.keypoints.push_back(k);
      next();
    }
    if (kf.keypoints.empty()) malformed("'KeyPoint:' block without rows", lines.number());
  } else if (line == "KeyPoint: []") {
    next();
  } else {
    malformed("expected 'KeyPoint:'", lines.number());
  }

  for (const auto item : detail::bracket_items(expect_prefix(line, "Depth: ", lines.number()), lines.number())) {
    kf.depths.push_back(detail::real(item, lines.number()));
  }

  next();
  if (line != "Descriptor: !!opencv-matrix") malformed("expected descriptor matrix", lines.number());
  next();
  const auto rows = cloudreg::detail::parse_int<std::size_t>(expect_prefix(line, "   rows: ", lines.number()));
  next();
  const auto cols = cloudreg::detail::parse_int<std::size_t>(expect_prefix(line, "   cols: ", lines.number()));
  if (!rows || !cols || *cols != KeyframePayload::kDescriptorBytes) {
    malformed("descriptor matrix must be rows x 32", lines.number());
  }
  next();
  if (line != "   dt: u") malformed("descriptor dt must be 'u'", lines.number());
  next();
  const auto data = detail::bracket_items(expect_prefix(line, "   data: ", lines.number()), lines.number());
  if (data.size() % *cols != 0 || data.size() / *cols != *rows) malformed("descriptor data length differs from rows*cols", lines.number());
  kf.descriptors.resize(*rows);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto b = cloudreg::detail::parse_int<unsigned>(data[i]);
    if (!b || *b > 255) malformed("descriptor byte out of range", lines.number());
    kf.descriptors[i / *cols][i % *cols] = static_cast<std::uint8_t>(*b);
  }

  next();
  kf.timestamp = detail::real(expect_prefix(line, "Time: ", lines.number()), lines.number());
  if (lines.next(line) && !cloudreg::detail::trim(line).empty()) malformed("trailing content", lines.number());

  if (kf.depths.size() != kf.keypoints.size() || kf.descriptors.size() != kf.keypoints.size()) {
    malformed("keypoint, depth and descriptor counts differ", lines.number());
  }
  return kf;
}

}  // namespace cloudreg::keyframe
