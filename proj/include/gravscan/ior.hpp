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

#include "gravscan/core.hpp"

namespace gravscan {

/// Inhibition of return. I relaxes toward the Gaussian footprint g(x - a) of
/// the current focus at rate beta:  dI/dt = beta * (g(x - a) - I),
/// g(u) = exp(-|u|^2 / (2 sigma^2)).
struct IORField {
  RetinaGrid grid;
  ImageD inhibition;
  double beta = 0.5;   ///< 1/s
  double sigma = 0.05; ///< normalized length

  static IORField zeros(const RetinaGrid& grid, double beta, double sigma);

  /// Exact update for a focus frozen over the step:
  ///   I <- g + (I - g) * exp(-beta * dt)
  /// A convex combination of I and g, so [0, 1] is preserved.
  void advance(const Point& focus, double dt);
};

IORField step_ior(const IORField& ior, const Point& focus, double dt);

/// The footprint g(x - focus) sampled on the grid.
ImageD inhibition_footprint(const RetinaGrid& grid, const Point& focus, double sigma);

}  // namespace gravscan
