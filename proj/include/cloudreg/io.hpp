// SPDX-License-Identifier: Apache-2.0
//
// Point-cloud file formats: ASCII PLY and plain XYZ text.
#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cloudreg/detail/format.hpp"
#include "cloudreg/error.hpp"
#include "cloudreg/geometry.hpp"

namespace cloudreg::io {

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

// Line cursor that remembers the 1-based line number for error messages.
class Lines {
 public:
  explicit Lines(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string_view::npos ? text_.size() : nl;
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++number_;
    return true;
  }
  std::size_t number() const noexcept { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

[[noreturn]] inline void malformed(std::string_view what, std::size_t line) {
  throw Error(ErrorCode::kMalformedFile, std::string(what) + " (line " + std::to_string(line) + ")");
}

}  // namespace detail

struct PlyProperty {
  std::string name;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

/// Parses ASCII PLY text. Only the `vertex` element is read; x/y/z are
/// required, red/green/blue are optional, all other properties and elements
/// are skipped.
inline PointCloud parse_ply(std::string_view text) {
  using detail::malformed;
  detail::Lines lines(text);
  std::string_view line;
  if (!lines.next(line) || cloudreg::detail::trim(line) != "ply") malformed("missing 'ply' magic", 1);

  std::vector<PlyElement> elements;
  bool ascii = false;
  bool header_done = false;
  while (lines.next(line)) {
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") {
      header_done = true;
      break;
    }
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") malformed("only 'format ascii 1.0' is supported", lines.number());
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) malformed("bad element declaration", lines.number());
      const auto n = cloudreg::detail::parse_int<std::size_t>(tok[2]);
      if (!n) malformed("bad element count", lines.number());
      elements.push_back({std::string(tok[1]), *n, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) malformed("property before any element", lines.number());
      if (tok.size() == 3) {
        elements.back().properties.push_back({std::string(tok[2]), false});
      } else if (tok.size() == 5 && tok[1] == "list") {
        elements.back().properties.push_back({std::string(tok[4]), true});
      } else {
        malformed("bad property declaration", lines.number());
      }
    } else {
      malformed("unknown header keyword '" + std::string(tok[0]) + "'", lines.number());
    }
  }
  if (!header_done) malformed("missing end_header", lines.number());
  if (!ascii) malformed("missing format line", lines.number());

  std::vector<Vec3> points;
  std::vector<Rgb> colors;
  for (const auto& el : elements) {
    const bool is_vertex = el.name == "vertex";
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
    if (is_vertex) {
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        const auto& p = el.properties[k];
        if (p.is_list) continue;
        const int idx = static_cast<int>(k);
        if (p.name == "x") ix = idx;
        if (p.name == "y") iy = idx;
        if (p.name == "z") iz = idx;
        if (p.name == "red") ir = idx;
        if (p.name == "green") ig = idx;
        if (p.name == "blue") ib = idx;
      }
      if (ix < 0 || iy < 0 || iz < 0) malformed("vertex element lacks x/y/z", lines.number());
      points.reserve(std::min(el.count, text.size() / 6));
    }
    const bool colored = is_vertex && ir >= 0 && ig >= 0 && ib >= 0;
    for (std::size_t row = 0; row < el.count; ++row) {
      if (!lines.next(line)) malformed("unexpected end of data in element '" + el.name + "'", lines.number());
      const auto tok = detail::split_ws(line);
      // Map declared properties onto tokens; list properties consume a
      // count followed by that many values.
      std::vector<std::string_view> scalar(el.properties.size());
      std::size_t t = 0;
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        if (t >= tok.size()) malformed("too few values in row", lines.number());
        if (el.properties[k].is_list) {
          const auto n = cloudreg::detail::parse_int<std::size_t>(tok[t]);
          if (!n || *n >= tok.size()) malformed("bad list length", lines.number());
          t += 1 + *n;
        } else {
          scalar[k] = tok[t++];
        }
      }
      if (t != tok.size()) malformed("unexpected number of values in row", lines.number());
      if (!is_vertex) continue;
      const auto x = cloudreg::detail::parse_double(scalar[ix]);
      const auto y = cloudreg::detail::parse_double(scalar[iy]);
      const auto z = cloudreg::detail::parse_double(scalar[iz]);
      if (!x || !y || !z) malformed("bad coordinate", lines.number());
      const Vec3 p(*x, *y, *z);
      if (!is_finite(p)) malformed("non-finite coordinate", lines.number());
      points.push_back(p);
      if (colored) {
        Rgb c;
        std::uint8_t* channels[3] = {&c.r, &c.g, &c.b};
        const int idx[3] = {ir, ig, ib};
        for (int k = 0; k < 3; ++k) {
          const auto v = cloudreg::detail::parse_int<int>(scalar[idx[k]]);
          if (!v || *v < 0 || *v > 255) malformed("color channel outside 0..255", lines.number());
          *channels[k] = static_cast<std::uint8_t>(*v);
        }
        colors.push_back(c);
      }
    }
  }
  return PointCloud(std::move(points), std::move(colors));
}

inline std::string format_ply(const PointCloud& c) {
  std::string out;
  out.reserve(128 + c.size() * 64);
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(c.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  if (c.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& p = c[i];
    out += cloudreg::detail::fmt_g17(p.x());
    out += ' ';
    out += cloudreg::detail::fmt_g17(p.y());
    out += ' ';
    out += cloudreg::detail::fmt_g17(p.z());
    if (c.has_colors()) {
      const auto& col = c.colors()[i];
      out += ' ' + std::to_string(col.r) + ' ' + std::to_string(col.g) + ' ' + std::to_string(col.b);
    }
    out += '\n';
  }
  return out;
}

/// One `x y z` triple per line; blank lines are ignored.
inline PointCloud parse_xyz(std::string_view text) {
  detail::Lines lines(text);
  std::string_view line;
  std::vector<Vec3> points;
  while (lines.next(line)) {
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) detail::malformed("expected 'x y z'", lines.number());
    const auto x = cloudreg::detail::parse_double(tok[0]);
    const auto y = cloudreg::detail::parse_double(tok[1]);
    const auto z = cloudreg::detail::parse_double(tok[2]);
    if (!x || !y || !z) detail::malformed("bad coordinate", lines.number());
    const Vec3 p(*x, *y, *z);
    if (!is_finite(p)) detail::malformed("non-finite coordinate", lines.number());
    points.push_back(p);
  }
  return PointCloud(std::move(points));
}

inline std::string format_xyz(const PointCloud& c) {
  std::string out;
  for (const auto& p : c.positions()) {
    out += cloudreg::detail::fmt_g17(p.x()) + ' ' + cloudreg::detail::fmt_g17(p.y()) + ' ' +
           cloudreg::detail::fmt_g17(p.z()) + '\n';
  }
  return out;
}

/// Dispatches on extension (.ply or .xyz). Parse errors are re-raised with the path prepended.
inline PointCloud load_cloud(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  const auto ext = path.extension().string();
  try {
    PointCloud c = ext == ".xyz" ? parse_xyz(text) : parse_ply(text);
    c.set_frame_id(path.stem().string());
    return c;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

inline void save_cloud(const std::filesystem::path& path, const PointCloud& c) {
  detail::write_file(path, path.extension() == ".xyz" ? format_xyz(c) : format_ply(c));
}

}  // namespace cloudreg::io
