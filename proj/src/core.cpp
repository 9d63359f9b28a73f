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

#include "gravscan/core.hpp"

#include <algorithm>
#include <numeric>

namespace gravscan {

std::string_view to_string(Provenance p) {
  return p == Provenance::human ? "human" : "synthetic";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "human") return Provenance::human;
  if (s == "synthetic") return Provenance::synthetic;
  throw ParseError("unknown provenance '" + std::string(s) + "'");
}

void Scanpath::validate() const {
  for (std::size_t k = 0; k < fixations.size(); ++k) {
    const Fixation& f = fixations[k];
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.t) || !std::isfinite(f.d)) {
      throw ValidationError("fixation " + std::to_string(k) + " has non-finite fields");
    }
    if (!grid.contains(f.position())) {
      throw ValidationError("fixation " + std::to_string(k) + " lies outside the grid");
    }
    if (f.t < 0.0) throw ValidationError("fixation " + std::to_string(k) + " has negative onset");
    if (f.d <= 0.0) {
      throw ValidationError("fixation " + std::to_string(k) + " has non-positive duration");
    }
    if (k > 0) {
      const Fixation& prev = fixations[k - 1];
      if (f.t <= prev.t || f.t < prev.t + prev.d) {
        throw ValidationError("fixation " + std::to_string(k) +
                              " starts before the previous fixation ends");
      }
    }
  }
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const TrajectorySample& s = trajectory[k];
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.t)) {
      throw ValidationError("trajectory sample " + std::to_string(k) + " is non-finite");
    }
    if (!grid.contains({s.x, s.y})) {
      throw ValidationError("trajectory sample " + std::to_string(k) + " lies outside the grid");
    }
    if (k > 0 && s.t <= trajectory[k - 1].t) {
      throw ValidationError("trajectory timestamps must increase");
    }
  }
}

double Scanpath::end_time() const {
  if (fixations.empty()) return 0.0;
  return fixations.back().t + fixations.back().d;
}

void SaliencyMap::validate() const {
  if (values.rows() != grid.height() || values.cols() != grid.width()) {
    throw ValidationError("saliency dimensions do not match its grid");
  }
  if (!values.isFinite().all()) throw ValidationError("saliency map has non-finite values");
  if ((values < 0.0).any()) throw ValidationError("saliency map has negative values");
}

void Frame::validate() const {
  if (brightness.rows() != grid.height() || brightness.cols() != grid.width()) {
    throw ValidationError("frame dimensions do not match its grid");
  }
  if (!brightness.isFinite().all()) throw ValidationError("frame has non-finite values");
}

void FrameSequence::validate() const {
  if (frames.empty()) throw ValidationError("frame sequence is empty");
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    frames[k].validate();
    if (!(frames[k].grid == frames.front().grid)) {
      throw ValidationError("frame " + std::to_string(k) + " changes dimensions");
    }
    if (k > 0 && frames[k].timestamp <= frames[k - 1].timestamp) {
      throw ValidationError("frame timestamps must increase");
    }
  }
}

Histogram Histogram::uniform(std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw ValidationError("histogram needs bins > 0 and hi > lo");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  }
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  return h;
}

void Histogram::add(double value) {
  // upper_bound gives the first edge strictly greater than value
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  std::ptrdiff_t bin = std::distance(edges.begin(), it) - 1;
  bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(counts.size()) - 1);
  ++counts[static_cast<std::size_t>(bin)];
}

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void Histogram::validate() const {
  if (edges.size() < 2 || counts.size() + 1 != edges.size()) {
    throw ValidationError("histogram needs len(counts) == len(edges) - 1 >= 1");
  }
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) throw ValidationError("histogram edges must increase");
  }
}

}  // namespace gravscan
