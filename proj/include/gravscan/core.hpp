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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gravscan {

/// Row-major raster; row index is y (image row), column index is x.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ImageD = Image<double>;

using Point = Eigen::Vector2d;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input (bad JSON, bad header, truncated payload).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The requested statistic has no defined value for the given data.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// Pixel lattice with normalized coordinates: the image diagonal has length 1
/// and pixel (col, row) sits at (col / D, row / D), D = sqrt(w^2 + h^2).
class RetinaGrid {
 public:
  RetinaGrid(int width, int height) : width_(width), height_(height) {
    if (width < 2 || height < 2) {
      throw ValidationError("grid must be at least 2x2, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    diag_ = std::hypot(static_cast<double>(width), static_cast<double>(height));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  /// Diagonal length in pixels.
  double diag() const { return diag_; }
  /// Side of one pixel in normalized units.
  double pixel_size() const { return 1.0 / diag_; }
  /// Normalized pixel area used as the integration measure.
  double pixel_area() const { return 1.0 / (static_cast<double>(width_) * height_); }
  double x_extent() const { return width_ / diag_; }
  double y_extent() const { return height_ / diag_; }
  Eigen::Index pixel_count() const { return static_cast<Eigen::Index>(width_) * height_; }

  Point to_normalized(double col, double row) const { return {col / diag_, row / diag_}; }

  /// Nearest pixel (col, row), clamped into the lattice.
  std::pair<int, int> to_pixel(const Point& p) const {
    auto clampi = [](double v, int hi) {
      const long r = std::lround(v);
      return static_cast<int>(r < 0 ? 0 : (r > hi ? hi : r));
    };
    return {clampi(p.x() * diag_, width_ - 1), clampi(p.y() * diag_, height_ - 1)};
  }

  bool contains(const Point& p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= x_extent() && p.y() <= y_extent();
  }

  /// Largest coordinate still mapping onto the last pixel centre.
  Point max_position() const { return {(width_ - 1) / diag_, (height_ - 1) / diag_}; }

  bool operator==(const RetinaGrid& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  int width_;
  int height_;
  double diag_;
};

struct Fixation {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;  ///< onset, seconds
  double d = 0.0;  ///< duration, seconds

  Point position() const { return {x, y}; }
  bool operator==(const Fixation&) const = default;
};

enum class Provenance { human, synthetic };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Dense replay sample.
struct TrajectorySample {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  bool operator==(const TrajectorySample&) const = default;
};

struct Scanpath {
  RetinaGrid grid;
  std::vector<Fixation> fixations;
  Provenance provenance = Provenance::synthetic;
  std::vector<TrajectorySample> trajectory;

  /// Throws ValidationError on ordering, positivity or bounds violations.
  void validate() const;
  /// End of the last fixation, or 0 for an empty path.
  double end_time() const;
};

struct SaliencyMap {
  RetinaGrid grid;
  ImageD values;

  void validate() const;
};

struct Frame {
  RetinaGrid grid;
  ImageD brightness;
  double timestamp = 0.0;

  void validate() const;
};

struct FrameSequence {
  std::vector<Frame> frames;
  double fps = 25.0;

  const RetinaGrid& grid() const { return frames.front().grid; }
  void validate() const;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;

  static Histogram uniform(std::size_t bins, double lo, double hi);
  /// Adds one observation; values outside [edges.front(), edges.back()] are
  /// clamped into the end bins.
  void add(double value);
  std::uint64_t total() const;
  void validate() const;
};

}  // namespace gravscan
