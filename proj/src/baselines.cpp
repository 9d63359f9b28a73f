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

#include "gravscan/baselines.hpp"

#include <random>

namespace gravscan {

ImageD fixation_density(std::span<const Scanpath> paths, double sigma_blob,
                        const RetinaGrid& grid) {
  if (!(sigma_blob > 0.0)) throw ValidationError("blob width must be positive");
  ImageD density = ImageD::Zero(grid.height(), grid.width());
  const Eigen::ArrayXd xs = Eigen::ArrayXd::LinSpaced(grid.width(), 0.0, grid.width() - 1.0) /
                            grid.diag();
  const Eigen::ArrayXd ys = Eigen::ArrayXd::LinSpaced(grid.height(), 0.0, grid.height() - 1.0) /
                            grid.diag();
  const double inv2s2 = 1.0 / (2.0 * sigma_blob * sigma_blob);
  for (const Scanpath& path : paths) {
    if (!(path.grid == grid)) throw ValidationError("scanpath grid differs from target grid");
    for (const Fixation& f : path.fixations) {
      const Eigen::ArrayXd gx = (-(xs - f.x).square() * inv2s2).exp();
      const Eigen::ArrayXd gy = (-(ys - f.y).square() * inv2s2).exp() * f.d;
      density += (gy.matrix() * gx.matrix().transpose()).array();
    }
  }
  return density;
}

SaliencyMap scanpath_to_saliency(std::span<const Scanpath> paths, double sigma_blob,
                                 const RetinaGrid& grid) {
  SaliencyMap map{grid, fixation_density(paths, sigma_blob, grid)};
  const double peak = map.values.maxCoeff();
  if (peak > 0.0) map.values /= peak;
  return map;
}

Scanpath wta_scanpath(const SaliencyMap& saliency, int n_fix, double inhibit_radius,
                      const WtaOptions& options) {
  saliency.validate();
  if (n_fix < 0) throw ValidationError("number of fixations must be nonnegative");
  if (!(inhibit_radius > 0.0)) throw ValidationError("inhibition radius must be positive");
  if (!(options.duration > 0.0)) throw ValidationError("duration must be positive");
  const RetinaGrid& grid = saliency.grid;
  Scanpath sp{grid, {}, Provenance::synthetic, {}};
  if (n_fix == 0) return sp;

  ImageD work = saliency.values;
  if (options.tie_jitter > 0.0) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> noise(0.0, options.tie_jitter * work.maxCoeff());
    for (Eigen::Index i = 0; i < work.size(); ++i) work.data()[i] += noise(rng);
  }

  const double radius_px = inhibit_radius * grid.diag();
  const double d = options.duration / n_fix;
  for (int k = 0; k < n_fix; ++k) {
    // strict comparison keeps the smallest row-major index on ties
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < work.size(); ++i) {
      if (work.data()[i] > work.data()[best]) best = i;
    }
    const Eigen::Index row = best / work.cols();
    const Eigen::Index col = best % work.cols();
    const Point p = grid.to_normalized(static_cast<double>(col), static_cast<double>(row));
    sp.fixations.push_back({p.x(), p.y(), k * d, d});

    const auto r0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(row - radius_px)));
    const auto r1 = std::min<Eigen::Index>(grid.height() - 1,
                                           static_cast<Eigen::Index>(std::ceil(row + radius_px)));
    const auto c0 = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor(col - radius_px)));
    const auto c1 = std::min<Eigen::Index>(grid.width() - 1,
                                           static_cast<Eigen::Index>(std::ceil(col + radius_px)));
    for (Eigen::Index r = r0; r <= r1; ++r) {
      for (Eigen::Index c = c0; c <= c1; ++c) {
        const double dr = static_cast<double>(r - row);
        const double dc = static_cast<double>(c - col);
        if (dr * dr + dc * dc <= radius_px * radius_px) work(r, c) = 0.0;
      }
    }
  }
  return sp;
}

}  // namespace gravscan
