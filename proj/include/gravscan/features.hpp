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

#include <span>
#include <vector>

#include "gravscan/core.hpp"

namespace gravscan {

enum class FeatureKind { brightness_gradient, temporal_difference, external };

/// Nonnegative per-pixel activation strength of one visual feature.
struct FeatureMap {
  RetinaGrid grid;
  ImageD values;
  FeatureKind kind = FeatureKind::external;

  void validate() const;
};

struct WeightedFeature {
  const FeatureMap* map;
  double alpha;
};

/// Gradient magnitude of the brightness in normalized units (central
/// differences inside, one-sided at the borders).
template <typename Derived>
Image<typename Derived::Scalar> gradient_magnitude(const Eigen::ArrayBase<Derived>& b,
                                                   typename Derived::Scalar spacing) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = b.rows();
  const Eigen::Index cols = b.cols();
  Image<Scalar> gx(rows, cols);
  Image<Scalar> gy(rows, cols);
  const Scalar inv = Scalar(1) / spacing;
  const Scalar half_inv = Scalar(0.5) / spacing;

  gx.col(0) = (b.col(1) - b.col(0)) * inv;
  gx.col(cols - 1) = (b.col(cols - 1) - b.col(cols - 2)) * inv;
  if (cols > 2) {
    gx.middleCols(1, cols - 2) = (b.rightCols(cols - 2) - b.leftCols(cols - 2)) * half_inv;
  }
  gy.row(0) = (b.row(1) - b.row(0)) * inv;
  gy.row(rows - 1) = (b.row(rows - 1) - b.row(rows - 2)) * inv;
  if (rows > 2) {
    gy.middleRows(1, rows - 2) = (b.bottomRows(rows - 2) - b.topRows(rows - 2)) * half_inv;
  }
  return (gx.square() + gy.square()).sqrt();
}

FeatureMap brightness_gradient(const Frame& frame);

/// Frame-differencing motion proxy: |b_curr - b_prev| / (t_curr - t_prev).
FeatureMap temporal_difference(const Frame& curr, const Frame& prev);

/// Wraps an externally computed map (optical flow magnitude, face
/// probability, ...). Negative or non-finite values are rejected.
FeatureMap external_feature(const Frame& map);

}  // namespace gravscan
