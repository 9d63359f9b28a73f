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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gravscan/core.hpp"
#include "gravscan/features.hpp"

namespace gravscan {

/// Parameters of the attention dynamics. Lengths are normalized (image
/// diagonal = 1), times in seconds.
struct SimParams {
  double alpha_gradient = 20.0;  ///< weight of the brightness-gradient mass
  double alpha_motion = 1.0;     ///< weight of the frame-difference mass (video only)
  double lambda = 5.0;           ///< damping, 1/s
  double beta = 0.5;             ///< inhibition rate, 1/s; 0 disables inhibition
  double sigma = 0.05;           ///< inhibition footprint width
  double epsilon = 0.0;          ///< kernel softening; <= 0 selects one pixel
  double dt = 1e-3;              ///< integration step
  double duration = 5.0;         ///< simulated time
  double fps = 25.0;             ///< replay sampling rate
  std::uint64_t seed = 0;
  double vel_threshold = 0.1;    ///< fixation speed threshold, normalized units/s
  double min_fixation = 0.1;     ///< minimum fixation duration, s

  void validate() const;
};

struct TrajectoryState {
  Point a = Point::Zero();  ///< focus position
  Point v = Point::Zero();  ///< focus velocity
  double t = 0.0;
};

/// Externally supplied mass source. One map means static; otherwise one map
/// per stimulus frame.
struct ExternalFeature {
  std::vector<FeatureMap> maps;
  double alpha = 1.0;
};

/// Acceleration term replacing the gravitational field, e.g. an analytic
/// spring -k (a - x*) for validating the integrator.
using ForceField = std::function<Point(const Point& a, double t)>;

struct IntegrateOptions {
  std::optional<Point> initial_position;  ///< defaults to the image centre
  Point initial_velocity = Point::Zero();
  ForceField force_override;
  bool clamp_to_retina = true;
};

struct SimResult {
  std::vector<TrajectoryState> trajectory;  ///< one sample per dt, t = 0 included
  Scanpath scanpath;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Integrates  a'' + lambda a' = E(a, t)  (E the attractive field of the
/// inhibited mass) with fixed-step explicit midpoint. Feature masses are
/// rebuilt at frame boundaries, inhibition and field every step.
SimResult integrate(const FrameSequence& stimulus, std::span<const ExternalFeature> external,
                    const SimParams& params, const IntegrateOptions& options = {});

/// Velocity-threshold fixation identification over uniformly sampled states.
/// Maximal runs of segments slower than `vel_threshold` lasting at least
/// `min_duration` become fixations at the run centroid.
Scanpath extract_fixations(std::span<const TrajectoryState> trajectory, const RetinaGrid& grid,
                           double vel_threshold, double min_duration);

/// Replay samples at `fps`, taken from the dense trajectory.
std::vector<TrajectorySample> resample(std::span<const TrajectoryState> trajectory, double fps);

}  // namespace gravscan
