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
#include <span>

#include "gravscan/core.hpp"

namespace gravscan {

/// Duration-weighted sum of isotropic Gaussians at every fixation,
/// max-normalized to 1. No fixations gives an all-zero map.
SaliencyMap scanpath_to_saliency(std::span<const Scanpath> paths, double sigma_blob,
                                 const RetinaGrid& grid);

/// Unnormalized form of the above: the raw duration-weighted blob sum.
ImageD fixation_density(std::span<const Scanpath> paths, double sigma_blob,
                        const RetinaGrid& grid);

struct WtaOptions {
  double duration = 5.0;     ///< total viewing time split evenly over fixations
  double tie_jitter = 0.0;   ///< uniform noise amplitude relative to the map max; 0 = off
  std::uint64_t seed = 0;
};

/// Winner-take-all with inhibition: fixate the argmax of the working map
/// (ties to the smallest row-major index), zero a disk of `inhibit_radius`
/// around it, repeat `n_fix` times.
Scanpath wta_scanpath(const SaliencyMap& saliency, int n_fix, double inhibit_radius,
                      const WtaOptions& options = {});

}  // namespace gravscan
