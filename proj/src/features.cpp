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

#include "gravscan/features.hpp"

namespace gravscan {

void FeatureMap::validate() const {
  if (values.rows() != grid.height() || values.cols() != grid.width()) {
    throw ValidationError("feature map dimensions do not match its grid");
  }
  if (!values.isFinite().all()) throw ValidationError("feature map has non-finite values");
  if ((values < 0.0).any()) throw ValidationError("feature map has negative values");
}

FeatureMap brightness_gradient(const Frame& frame) {
  frame.validate();
  return {frame.grid, gradient_magnitude(frame.brightness, frame.grid.pixel_size()),
          FeatureKind::brightness_gradient};
}

FeatureMap temporal_difference(const Frame& curr, const Frame& prev) {
  curr.validate();
  prev.validate();
  if (!(curr.grid == prev.grid)) throw ValidationError("frames have different dimensions");
  const double dt = curr.timestamp - prev.timestamp;
  if (!(dt > 0.0)) throw ValidationError("current frame must be later than previous frame");
  return {curr.grid, (curr.brightness - prev.brightness).abs() / dt,
          FeatureKind::temporal_difference};
}

FeatureMap external_feature(const Frame& map) {
  FeatureMap f{map.grid, map.brightness, FeatureKind::external};
  f.validate();
  return f;
}

}  // namespace gravscan
