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

#include "gravscan/simulation.hpp"

#include <cmath>
#include <string>

#include "gravscan/field.hpp"
#include "gravscan/ior.hpp"

namespace gravscan {

void SimParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(name) + " must be positive");
    }
  };
  positive(alpha_gradient, "alpha_gradient");
  positive(alpha_motion, "alpha_motion");
  positive(lambda, "lambda");
  positive(sigma, "sigma");
  positive(dt, "dt");
  positive(duration, "duration");
  positive(fps, "fps");
  positive(vel_threshold, "vel_threshold");
  positive(min_fixation, "min_fixation");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be nonnegative");
  if (!std::isfinite(epsilon)) throw ValidationError("epsilon must be finite");
  if (dt > 1.0 / fps + 1e-12) throw ValidationError("dt must not exceed 1/fps");
}

namespace {

/// Base (uninhibited) mass for every distinct frame, computed lazily.
class MassSchedule {
 public:
  MassSchedule(const FrameSequence& stimulus, std::span<const ExternalFeature> external,
               const SimParams& params)
      : stimulus_(stimulus), external_(external), params_(params) {
    for (const ExternalFeature& f : external_) {
      if (f.maps.empty()) throw ValidationError("external feature has no maps");
      if (f.maps.size() != 1 && f.maps.size() != stimulus_.frames.size()) {
        throw ValidationError("external feature needs one map or one per frame");
      }
      if (!(f.alpha > 0.0)) throw ValidationError("feature weights must be positive");
      for (const FeatureMap& m : f.maps) {
        m.validate();
        if (!(m.grid == stimulus_.grid())) {
          throw ValidationError("external feature grid differs from the stimulus");
        }
      }
    }
  }

  std::size_t frame_at(double t) const {
    const auto k = static_cast<std::size_t>(std::floor(t * stimulus_.fps + 1e-9));
    return std::min(k, stimulus_.frames.size() - 1);
  }

  const ImageD& base(std::size_t frame) {
    if (cached_ != frame || base_.size() == 0) {
      rebuild(frame);
      cached_ = frame;
    }
    return base_;
  }

 private:
  void rebuild(std::size_t k) {
    const Frame& f = stimulus_.frames[k];
    base_ = params_.alpha_gradient * brightness_gradient(f).values;
    if (k > 0) {
      base_ += params_.alpha_motion * temporal_difference(f, stimulus_.frames[k - 1]).values;
    }
    for (const ExternalFeature& e : external_) {
      const FeatureMap& m = e.maps.size() == 1 ? e.maps.front() : e.maps[k];
      base_ += e.alpha * m.values;
    }
  }

  const FrameSequence& stimulus_;
  std::span<const ExternalFeature> external_;
  const SimParams& params_;
  ImageD base_;
  std::size_t cached_ = 0;
};

bool finite(const TrajectoryState& s) { return s.a.allFinite() && s.v.allFinite(); }

}  // namespace

SimResult integrate(const FrameSequence& stimulus, std::span<const ExternalFeature> external,
                    const SimParams& params, const IntegrateOptions& options) {
  stimulus.validate();
  params.validate();
  const RetinaGrid& grid = stimulus.grid();
  const double eps = params.epsilon > 0.0 ? params.epsilon : default_softening(grid);
  const double dt = params.dt;
  const auto steps = static_cast<std::size_t>(std::llround(params.duration / dt));

  MassSchedule schedule(stimulus, external, params);
  IORField ior = IORField::zeros(grid, params.beta, params.sigma);
  FieldEvaluator<double> field(grid, eps);
  ImageD mu(grid.height(), grid.width());

  TrajectoryState s;
  s.a = options.initial_position.value_or(
      Point(0.5 * (grid.width() - 1) / grid.diag(), 0.5 * (grid.height() - 1) / grid.diag()));
  s.v = options.initial_velocity;
  if (!grid.contains(s.a)) throw ValidationError("initial position lies outside the grid");

  SimResult result{{}, Scanpath{grid, {}, Provenance::synthetic, {}}};
  result.trajectory.reserve(steps + 1);
  result.trajectory.push_back(s);

  const Point lo = Point::Zero();
  const Point hi = grid.max_position();
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    auto accel = [&](const Point& a, const Point& v, double tt) -> Point {
      const Point force = options.force_override ? options.force_override(a, tt) : field(mu, a);
      return force - params.lambda * v;
    };
    if (!options.force_override) {
      mu = schedule.base(schedule.frame_at(t)) * (1.0 - ior.inhibition);
    }

    // explicit midpoint
    const Point k1a = s.v;
    const Point k1v = accel(s.a, s.v, t);
    const Point mid_a = s.a + 0.5 * dt * k1a;
    const Point mid_v = s.v + 0.5 * dt * k1v;
    const Point k2v = accel(mid_a, mid_v, t + 0.5 * dt);

    const Point focus = s.a;
    s.a += dt * mid_v;
    s.v += dt * k2v;
    s.t = static_cast<double>(n + 1) * dt;

    if (!finite(s)) {
      throw SimulationError("integration diverged at t = " + std::to_string(s.t) + " s");
    }
    if (options.clamp_to_retina) {
      for (int axis = 0; axis < 2; ++axis) {
        if (s.a[axis] < lo[axis] || s.a[axis] > hi[axis]) {
          s.a[axis] = std::clamp(s.a[axis], lo[axis], hi[axis]);
          s.v[axis] = 0.0;
        }
      }
    }
    if (params.beta > 0.0 && !options.force_override) ior.advance(focus, dt);
    result.trajectory.push_back(s);
  }

  result.scanpath = extract_fixations(result.trajectory, grid, params.vel_threshold,
                                      params.min_fixation);
  return result;
}

Scanpath extract_fixations(std::span<const TrajectoryState> trajectory, const RetinaGrid& grid,
                           double vel_threshold, double min_duration) {
  if (trajectory.size() < 2) throw ValidationError("fixation extraction needs >= 2 samples");
  const double dt = trajectory[1].t - trajectory[0].t;
  if (!(dt > 0.0)) throw ValidationError("trajectory timestamps must increase");
  for (std::size_t k = 2; k < trajectory.size(); ++k) {
    if (std::abs((trajectory[k].t - trajectory[k - 1].t) - dt) > 1e-6 * dt) {
      throw ValidationError("trajectory sampling must be uniform");
    }
  }

  Scanpath sp{grid, {}, Provenance::synthetic, {}};
  auto emit = [&](std::size_t first, std::size_t last) {
    const double duration = trajectory[last].t - trajectory[first].t;
    if (duration < min_duration - 1e-9 || !(duration > 0.0)) return;
    Point centroid = Point::Zero();
    for (std::size_t k = first; k <= last; ++k) centroid += trajectory[k].a;
    centroid /= static_cast<double>(last - first + 1);
    sp.fixations.push_back({centroid.x(), centroid.y(), trajectory[first].t, duration});
  };

  // segment k joins samples k and k+1
  std::optional<std::size_t> run_start;
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    const double speed = (trajectory[k + 1].a - trajectory[k].a).norm() / dt;
    if (speed < vel_threshold) {
      if (!run_start) run_start = k;
    } else if (run_start) {
      emit(*run_start, k);
      run_start.reset();
    }
  }
  if (run_start) emit(*run_start, trajectory.size() - 1);
  return sp;
}

std::vector<TrajectorySample> resample(std::span<const TrajectoryState> trajectory, double fps) {
  std::vector<TrajectorySample> out;
  if (trajectory.empty()) return out;
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  const double t0 = trajectory.front().t;
  const double period = 1.0 / fps;
  std::size_t k = 0;
  for (std::size_t frame = 0;; ++frame) {
    const double target = t0 + static_cast<double>(frame) * period;
    if (target > trajectory.back().t + 1e-9) break;
    // sample-and-hold: latest state not after the target time
    while (k + 1 < trajectory.size() && trajectory[k + 1].t <= target + 1e-9) ++k;
    out.push_back({trajectory[k].a.x(), trajectory[k].a.y(), target});
  }
  return out;
}

}  // namespace gravscan
