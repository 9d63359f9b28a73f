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

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gravscan/core.hpp"

namespace gravscan {

/// Per-item category counts for the two labels {human, synthetic}.
using CategoryCounts = std::array<int, 2>;

inline constexpr std::size_t category_index(Provenance p) {
  return p == Provenance::human ? 0 : 1;
}

struct JudgmentMatrix {
  std::vector<CategoryCounts> items;
  int raters = 0;  ///< n, identical for every item

  void validate() const;
};

/// Fleiss' kappa for a constant number of raters per item.
/// Throws ValidationError if n < 2 or N < 1, UndefinedMetric when chance
/// agreement is 1 but observed agreement is not.
double fleiss_kappa(const JudgmentMatrix& m);

/// Same statistic with a per-item rater count n_i >= 2:
///   P_i = sum_j n_ij (n_ij - 1) / (n_i (n_i - 1)),  p_j = sum_i n_ij / sum_i n_i.
/// Identical to fleiss_kappa when every n_i is equal.
double fleiss_kappa_varying(std::span<const CategoryCounts> items);

/// One line of the JSON-lines label store.
struct JudgmentRecord {
  std::string session_id;
  std::string stimulus_id;
  Provenance label = Provenance::human;
  Provenance truth = Provenance::human;
  int expertise = 1;
  std::string education;
  int session_size = 20;
  int replays = 0;
  double submitted_at = 0.0;  ///< seconds since the Unix epoch

  bool correct() const { return label == truth; }
};

JudgmentRecord parse_judgment(const std::string& line);
std::string format_judgment(const JudgmentRecord& r);
/// Reads every nonblank line; a missing file is an empty store.
std::vector<JudgmentRecord> read_label_store(const std::filesystem::path& path);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  std::size_t n = 0;
};

/// Population mean and standard deviation; nullopt for no values.
std::optional<MeanStd> mean_std(std::span<const double> values);

struct CrowdReport {
  std::size_t judgments = 0;
  std::size_t annotators = 0;
  std::size_t complete_sessions = 0;
  std::size_t incomplete_sessions = 0;
  int expertise_threshold = 3;

  // fractions per annotator, aggregated over annotators
  std::optional<MeanStd> overall;
  std::optional<MeanStd> expert;
  std::optional<MeanStd> naive;
  std::optional<MeanStd> human_labeled_human;
  std::optional<MeanStd> synthetic_labeled_human;
  std::optional<MeanStd> labeled_human;

  std::optional<double> kappa_overall;
  std::optional<double> kappa_expert;
  std::optional<double> kappa_naive;
  std::optional<double> kappa_human_items;
  std::optional<double> kappa_synthetic_items;
  std::size_t kappa_excluded_sessions = 0;  ///< incomplete sessions left out of kappa
  std::size_t kappa_excluded_items = 0;     ///< items with fewer than two raters
};

/// Accuracy statistics per annotator (one annotator per session) and the
/// kappa set. Annotators with expertise >= `expertise_threshold` are experts.
/// Throws ValidationError for an empty store.
CrowdReport crowd_report(std::span<const JudgmentRecord> records, int expertise_threshold = 3);

std::string format_crowd_json(const CrowdReport& report);
/// Five-column text table: overall, expert, naive, human labeled human,
/// synthetic labeled human; "mean (std)" cells, then the kappa set.
std::string format_crowd_table(const CrowdReport& report);

}  // namespace gravscan
