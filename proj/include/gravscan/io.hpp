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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gravscan/core.hpp"

namespace gravscan {

namespace fs = std::filesystem;

// Scanpath JSON:
// {"width":int,"height":int,"provenance":"human"|"synthetic",
//  "fixations":[{"x":..,"y":..,"t":..,"d":..}],"trajectory":[{"x":..,"y":..,"t":..}]}
// The trajectory array is optional and omitted when empty.
Scanpath parse_scanpath(const std::string& text);
std::string format_scanpath(const Scanpath& path);
Scanpath read_scanpath(const fs::path& path);
void write_scanpath(const Scanpath& path, const fs::path& out);

/// Binary P5 greymap, maxval up to 65535; brightness is sample / maxval.
Frame read_pgm(const fs::path& path, double timestamp = 0.0);
Frame parse_pgm(const std::string& bytes, double timestamp = 0.0);
/// Writes values in [0, 1] (clamped) as an 8-bit P5 image.
void write_pgm(const ImageD& values, const fs::path& out);

/// Saliency maps are stored as greymaps.
SaliencyMap read_saliency(const fs::path& path);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  ///< row-major, 3 bytes per pixel

  std::uint8_t at(int col, int row, int channel) const {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
};

/// Radius in pixels of the gaze marker: 2% of the image diagonal.
double marker_radius_px(const RetinaGrid& grid);

/// Greyscale frame replicated to RGB with a filled pure-red disk at `focus`.
RgbImage render_marker(const Frame& frame, const Point& focus);
void write_ppm(const RgbImage& image, const fs::path& out);
void write_render_frame(const Frame& frame, const Point& focus, const fs::path& out);

/// Numbered P5 frames in a directory, sorted by file name, stamped k / fps.
FrameSequence read_frame_dir(const fs::path& dir, double fps);

/// Human fixation lists as CSV rows "x,y,t,d" in pixels (after multiplying
/// by `pixels_per_unit`, e.g. pixels per degree); converted to normalized units.
Scanpath read_fixation_csv(const fs::path& path, const RetinaGrid& grid,
                           double pixels_per_unit = 1.0,
                           Provenance provenance = Provenance::human);

struct StimulusEntry {
  std::string id;
  fs::path image;
  std::optional<fs::path> frames_dir;
  std::optional<double> fps;
  fs::path scanpath;
  Provenance truth = Provenance::human;
};

struct StimulusManifest {
  std::vector<StimulusEntry> stimuli;
};

/// Relative paths are resolved against the manifest's directory.
StimulusManifest read_stimulus_manifest(const fs::path& path);

struct FeatureMapEntry {
  fs::path path;
  double alpha = 1.0;
};

/// {"feature_maps":[{"path":...,"alpha":float}]}
std::vector<FeatureMapEntry> read_feature_manifest(const fs::path& path);

struct PredictionEntry {
  std::string id;
  fs::path scanpath;
  std::optional<fs::path> saliency;
};

/// {"predictions":[{"id":str,"scanpath":path,"saliency":path?}]}
std::vector<PredictionEntry> read_prediction_manifest(const fs::path& path);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace gravscan
