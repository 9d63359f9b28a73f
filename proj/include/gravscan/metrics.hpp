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

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gravscan/core.hpp"

namespace gravscan {

// ---------------------------------------------------------------------------
// Saliency metrics

/// Location-based ROC area (AUC-Judd): each fixation contributes its pixel as
/// a positive, every non-fixated pixel is a negative, ties count one half.
double auc_judd(const SaliencyMap& saliency, std::span<const Fixation> fixations);

/// Mean z-score (population statistics) of the map at fixated pixels.
double nss(const SaliencyMap& saliency, std::span<const Fixation> fixations);

// ---------------------------------------------------------------------------
// String edit over a labeled grid

/// Partition of the retina into rows x cols regions, labeled row-major.
class GridQuantizer {
 public:
  static constexpr int kMaxLabels = 65536;

  GridQuantizer(int rows, int cols, const RetinaGrid& grid);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const RetinaGrid& grid() const { return grid_; }

  char16_t label(const Point& p) const;
  /// Region labels of the fixations, consecutive repeats collapsed.
  std::u16string encode(const Scanpath& path) const;

 private:
  int rows_;
  int cols_;
  RetinaGrid grid_;
};

/// Optimal string alignment distance: unit-cost insertion, deletion,
/// substitution and transposition of adjacent symbols, with no substring
/// edited more than once.
template <typename T>
std::size_t osa_distance(std::span<const T> a, std::span<const T> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        cur[j] = std::min(cur[j], prev2[j - 2] + 1);
      }
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

inline std::size_t osa_distance(std::u16string_view a, std::u16string_view b) {
  return osa_distance(std::span<const char16_t>(a.data(), a.size()),
                      std::span<const char16_t>(b.data(), b.size()));
}

std::size_t string_edit(const Scanpath& a, const Scanpath& b, const GridQuantizer& q);

// ---------------------------------------------------------------------------
// Scaled time-delay embedding

struct StdeConfig {
  static constexpr const char* kVersion = "stde-v1";
  int k_max = 3;
  double scale = 0.5;  ///< half the image diagonal
};

/// For every window length k <= k_max, each length-k window of hypothesis
/// positions is matched to its nearest reference window (mean pointwise
/// distance); similarity exp(-dist / scale) is averaged over windows, then
/// over k. Result in (0, 1].
double stde(const Scanpath& reference, const Scanpath& hypothesis, const StdeConfig& config = {});

// ---------------------------------------------------------------------------
// Saccade amplitude statistics

/// Distances between consecutive fixations, in normalized units.
std::vector<double> saccade_amplitudes(const Scanpath& path);

/// Uniform bins over [0, 1].
Histogram amplitude_histogram(std::span<const double> amplitudes, std::size_t bins);

/// KL(p || q) in nats after adding `smoothing_eps` to every count. p is the
/// reference (human) side.
double kl_divergence(const Histogram& p, const Histogram& q, double smoothing_eps);

// ---------------------------------------------------------------------------
// Aggregation

struct EvalConfig {
  int grid_rows = 5;
  int grid_cols = 5;
  StdeConfig stde;
  std::size_t bins = 50;
  double smoothing_eps = 1e-9;
};

struct MetricReport {
  std::optional<double> auc;
  std::optional<double> nss;
  std::optional<std::size_t> string_edit;
  std::optional<double> stde;
  std::optional<double> kl_amplitude;
};

/// Every metric computable from the inputs; saliency metrics need a map and a
/// nonempty reference, STDE needs two nonempty paths, KL needs saccades on
/// both sides. A metric that is undefined for the data is left empty.
MetricReport evaluate_pair(const Scanpath& reference, const Scanpath& hypothesis,
                           const SaliencyMap* saliency, const EvalConfig& config = {});

struct BatchRow {
  std::string id;
  MetricReport report;
};

/// Column means over the rows where each metric is present.
struct MeanRow {
  std::optional<double> auc;
  std::optional<double> nss;
  std::optional<double> string_edit;
  std::optional<double> stde;
  std::optional<double> kl_amplitude;
};

struct BatchEvaluation {
  std::vector<BatchRow> rows;
  MeanRow mean;
  double kl_amplitude = 0.0;  ///< pooled over all pairs
  std::size_t ref_saccades = 0;
  std::size_t hyp_saccades = 0;
};

struct EvalPair {
  std::string id;
  Scanpath reference;
  Scanpath hypothesis;
  std::optional<SaliencyMap> saliency;
};

BatchEvaluation evaluate_batch(std::span<const EvalPair> pairs, const EvalConfig& config = {});

/// "id,auc,nss,string_edit,stde" rows plus a final "mean" row.
std::string format_batch_csv(const BatchEvaluation& batch);
/// Pooled amplitude-KL summary.
std::string format_kl_summary(const BatchEvaluation& batch, const EvalConfig& config);

}  // namespace gravscan
