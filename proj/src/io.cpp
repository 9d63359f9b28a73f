// Copyright 2026 The gravscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gravscan/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gravscan {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

namespace {

double number_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(std::string("missing or non-numeric field '") + key + "'");
  }
  return it->get<double>();
}

int int_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw ParseError(std::string("missing or non-integer field '") + key + "'");
  }
  return it->get<int>();
}

std::string string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

}  // namespace

Scanpath parse_scanpath(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("scanpath document must be an object");
  Scanpath sp{RetinaGrid(int_field(doc, "width"), int_field(doc, "height")), {},
              provenance_from_string(string_field(doc, "provenance")), {}};
  auto fx = doc.find("fixations");
  if (fx == doc.end() || !fx->is_array()) throw ParseError("missing 'fixations' array");
  sp.fixations.reserve(fx->size());
  for (const json& f : *fx) {
    if (!f.is_object()) throw ParseError("fixation entries must be objects");
    sp.fixations.push_back(
        {number_field(f, "x"), number_field(f, "y"), number_field(f, "t"), number_field(f, "d")});
  }
  if (auto tr = doc.find("trajectory"); tr != doc.end()) {
    if (!tr->is_array()) throw ParseError("'trajectory' must be an array");
    sp.trajectory.reserve(tr->size());
    for (const json& s : *tr) {
      if (!s.is_object()) throw ParseError("trajectory entries must be objects");
      sp.trajectory.push_back({number_field(s, "x"), number_field(s, "y"), number_field(s, "t")});
    }
  }
  sp.validate();
  return sp;
}

std::string format_scanpath(const Scanpath& path) {
  ordered_json doc;
  doc["width"] = path.grid.width();
  doc["height"] = path.grid.height();
  doc["provenance"] = std::string(to_string(path.provenance));
  ordered_json fx = ordered_json::array();
  for (const Fixation& f : path.fixations) {
    fx.push_back(ordered_json{{"x", f.x}, {"y", f.y}, {"t", f.t}, {"d", f.d}});
  }
  doc["fixations"] = std::move(fx);
  if (!path.trajectory.empty()) {
    ordered_json tr = ordered_json::array();
    for (const TrajectorySample& s : path.trajectory) {
      tr.push_back(ordered_json{{"x", s.x}, {"y", s.y}, {"t", s.t}});
    }
    doc["trajectory"] = std::move(tr);
  }
  return doc.dump(1) + "\n";
}

Scanpath read_scanpath(const fs::path& path) {
  try {
    return parse_scanpath(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_scanpath(const Scanpath& path, const fs::path& out) {
  path.validate();
  write_text_file(out, format_scanpath(path));
}

namespace {

/// Netpbm header reader: magic, then whitespace-separated integers with
/// '#' comments, terminated by exactly one whitespace byte.
class PnmHeader {
 public:
  explicit PnmHeader(const std::string& bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2) throw ParseError("truncated netpbm header");
    pos_ = 2;
    return bytes_.substr(0, 2);
  }

  long next_int() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("malformed netpbm header");
    if (pos_ - start > 9) throw ParseError("netpbm header value out of range");
    return std::stol(bytes_.substr(start, pos_ - start));
  }

  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError("netpbm header not terminated by whitespace");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Frame parse_pgm(const std::string& bytes, double timestamp) {
  PnmHeader header(bytes);
  if (header.magic() != "P5") throw ParseError("bad magic number: expected binary PGM 'P5'");
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width <= 0 || height <= 0) throw ParseError("PGM has a zero dimension");
  if (maxval <= 0 || maxval > 65535) throw ParseError("PGM maxval must be in 1..65535");
  const std::size_t offset = header.payload_offset();
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * bytes_per_sample;
  if (bytes.size() < offset + need) throw ParseError("truncated PGM payload");

  Frame frame{RetinaGrid(static_cast<int>(width), static_cast<int>(height)),
              ImageD(height, width), timestamp};
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      unsigned v = *p++;
      if (bytes_per_sample == 2) v = (v << 8) | *p++;
      frame.brightness(r, c) = static_cast<double>(v) * scale;
    }
  }
  return frame;
}

Frame read_pgm(const fs::path& path, double timestamp) {
  try {
    return parse_pgm(read_text_file(path), timestamp);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_pgm(const ImageD& values, const fs::path& out) {
  std::string bytes = "P5\n" + std::to_string(values.cols()) + " " +
                      std::to_string(values.rows()) + "\n255\n";
  bytes.reserve(bytes.size() + static_cast<std::size_t>(values.size()));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = std::clamp(values(r, c), 0.0, 1.0);
      bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  write_text_file(out, bytes);
}

SaliencyMap read_saliency(const fs::path& path) {
  Frame f = read_pgm(path);
  SaliencyMap s{f.grid, std::move(f.brightness)};
  s.validate();
  return s;
}

double marker_radius_px(const RetinaGrid& grid) { return 0.02 * grid.diag(); }

RgbImage render_marker(const Frame& frame, const Point& focus) {
  const RetinaGrid& g = frame.grid;
  if (!g.contains(focus)) throw ValidationError("render focus lies outside the grid");
  RgbImage img{g.width(), g.height(), {}};
  img.rgb.resize(static_cast<std::size_t>(g.width()) * g.height() * 3);
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) {
      const double v = std::clamp(frame.brightness(r, c), 0.0, 1.0);
      const auto byte = static_cast<std::uint8_t>(std::lround(v * 255.0));
      const std::size_t i = (static_cast<std::size_t>(r) * g.width() + c) * 3;
      img.rgb[i] = img.rgb[i + 1] = img.rgb[i + 2] = byte;
    }
  }
  const double radius = marker_radius_px(g);
  const double cx = focus.x() * g.diag();
  const double cy = focus.y() * g.diag();
  const int c0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
  const int c1 = std::min(g.width() - 1, static_cast<int>(std::ceil(cx + radius)));
  const int r0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
  const int r1 = std::min(g.height() - 1, static_cast<int>(std::ceil(cy + radius)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double dx = c - cx;
      const double dy = r - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        const std::size_t i = (static_cast<std::size_t>(r) * g.width() + c) * 3;
        img.rgb[i] = 255;
        img.rgb[i + 1] = 0;
        img.rgb[i + 2] = 0;
      }
    }
  }
  return img;
}

void write_ppm(const RgbImage& image, const fs::path& out) {
  std::string bytes =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  bytes.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  write_text_file(out, bytes);
}

void write_render_frame(const Frame& frame, const Point& focus, const fs::path& out) {
  write_ppm(render_marker(frame, focus), out);
}

FrameSequence read_frame_dir(const fs::path& dir, double fps) {
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .pgm frames in '" + dir.string() + "'");
  FrameSequence seq;
  seq.fps = fps;
  seq.frames.reserve(files.size());
  for (std::size_t k = 0; k < files.size(); ++k) {
    seq.frames.push_back(read_pgm(files[k], static_cast<double>(k) / fps));
  }
  seq.validate();
  return seq;
}

Scanpath read_fixation_csv(const fs::path& path, const RetinaGrid& grid, double pixels_per_unit,
                           Provenance provenance) {
  if (!(pixels_per_unit > 0.0)) throw ValidationError("pixels_per_unit must be positive");
  std::istringstream in(read_text_file(path));
  Scanpath sp{grid, {}, provenance, {}};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, y, t, d;
    if (!(row >> x >> y >> t >> d)) {
      // header row
      if (lineno == 1) continue;
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected x,y,t,d");
    }
    const double scale = pixels_per_unit / grid.diag();
    sp.fixations.push_back({x * scale, y * scale, t, d});
  }
  sp.validate();
  return sp;
}

StimulusManifest read_stimulus_manifest(const fs::path& path) {
  const json doc = parse_json(read_text_file(path));
  const fs::path base = path.parent_path();
  auto arr = doc.find("stimuli");
  if (arr == doc.end() || !arr->is_array()) throw ParseError("manifest lacks a 'stimuli' array");
  StimulusManifest m;
  for (const json& s : *arr) {
    StimulusEntry e;
    e.id = string_field(s, "id");
    e.image = resolve(base, string_field(s, "image"));
    if (s.contains("frames_dir") && !s["frames_dir"].is_null()) {
      e.frames_dir = resolve(base, string_field(s, "frames_dir"));
    }
    if (s.contains("fps") && !s["fps"].is_null()) e.fps = number_field(s, "fps");
    e.scanpath = resolve(base, string_field(s, "scanpath"));
    e.truth = provenance_from_string(string_field(s, "truth"));
    m.stimuli.push_back(std::move(e));
  }
  return m;
}

std::vector<FeatureMapEntry> read_feature_manifest(const fs::path& path) {
  const json doc = parse_json(read_text_file(path));
  const fs::path base = path.parent_path();
  auto arr = doc.find("feature_maps");
  if (arr == doc.end() || !arr->is_array()) throw ParseError("lacks a 'feature_maps' array");
  std::vector<FeatureMapEntry> out;
  for (const json& f : *arr) {
    out.push_back({resolve(base, string_field(f, "path")), number_field(f, "alpha")});
  }
  return out;
}

std::vector<PredictionEntry> read_prediction_manifest(const fs::path& path) {
  const json doc = parse_json(read_text_file(path));
  const fs::path base = path.parent_path();
  auto arr = doc.find("predictions");
  if (arr == doc.end() || !arr->is_array()) throw ParseError("lacks a 'predictions' array");
  std::vector<PredictionEntry> out;
  for (const json& p : *arr) {
    PredictionEntry e{string_field(p, "id"), resolve(base, string_field(p, "scanpath")), {}};
    if (p.contains("saliency") && !p["saliency"].is_null()) {
      e.saliency = resolve(base, string_field(p, "saliency"));
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace gravscan
