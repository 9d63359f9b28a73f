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

#include "gravscan/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

namespace gravscan {

namespace {

std::vector<Eigen::Index> fixated_pixels(const SaliencyMap& saliency,
                                         std::span<const Fixation> fixations) {
  if (fixations.empty()) throw UndefinedMetric("saliency metrics need at least one fixation");
  const RetinaGrid& g = saliency.grid;
  std::vector<Eigen::Index> idx;
  idx.reserve(fixations.size());
  for (const Fixation& f : fixations) {
    if (!g.contains(f.position())) throw ValidationError("fixation lies outside the saliency map");
    const auto [col, row] = g.to_pixel(f.position());
    idx.push_back(static_cast<Eigen::Index>(row) * g.width() + col);
  }
  return idx;
}

}  // namespace

double auc_judd(const SaliencyMap& saliency, std::span<const Fixation> fixations) {
  saliency.validate();
  const std::vector<Eigen::Index> pos = fixated_pixels(saliency, fixations);
  const std::unordered_set<Eigen::Index> fixated(pos.begin(), pos.end());
  const double* v = saliency.values.data();

  std::vector<double> negatives;
  negatives.reserve(static_cast<std::size_t>(saliency.values.size()));
  for (Eigen::Index i = 0; i < saliency.values.size(); ++i) {
    if (!fixated.contains(i)) negatives.push_back(v[i]);
  }
  if (negatives.empty()) throw UndefinedMetric("AUC needs at least one non-fixated pixel");
  std::sort(negatives.begin(), negatives.end());

  // Mann-Whitney form of the ROC area
  double wins = 0.0;
  for (Eigen::Index i : pos) {
    const auto lo = std::lower_bound(negatives.begin(), negatives.end(), v[i]);
    const auto hi = std::upper_bound(lo, negatives.end(), v[i]);
    wins += static_cast<double>(lo - negatives.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(negatives.size()));
}

double nss(const SaliencyMap& saliency, std::span<const Fixation> fixations) {
  saliency.validate();
  const std::vector<Eigen::Index> pos = fixated_pixels(saliency, fixations);
  const double mean = saliency.values.mean();
  const double var = (saliency.values - mean).square().mean();
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    throw UndefinedMetric("NSS is undefined for a constant saliency map");
  }
  double sum = 0.0;
  for (Eigen::Index i : pos) sum += (saliency.values.data()[i] - mean) / sd;
  return sum / static_cast<double>(pos.size());
}

GridQuantizer::GridQuantizer(int rows, int cols, const RetinaGrid& grid)
    : rows_(rows), cols_(cols), grid_(grid) {
  if (rows < 1 || cols < 1) throw ValidationError("quantizer needs at least one row and column");
  if (static_cast<long>(rows) * cols > kMaxLabels) {
    throw ValidationError("quantizer exceeds 65536 regions");
  }
}

char16_t GridQuantizer::label(const Point& p) const {
  auto cell = [](double v, double extent, int n) {
    const int k = static_cast<int>(std::floor(v / extent * n));
    return std::clamp(k, 0, n - 1);
  };
  const int r = cell(p.y(), grid_.y_extent(), rows_);
  const int c = cell(p.x(), grid_.x_extent(), cols_);
  return static_cast<char16_t>(r * cols_ + c);
}

std::u16string GridQuantizer::encode(const Scanpath& path) const {
  std::u16string s;
  for (const Fixation& f : path.fixations) {
    const char16_t l = label(f.position());
    if (s.empty() || s.back() != l) s.push_back(l);
  }
  return s;
}

std::size_t string_edit(const Scanpath& a, const Scanpath& b, const GridQuantizer& q) {
  return osa_distance(q.encode(a), q.encode(b));
}

double stde(const Scanpath& reference, const Scanpath& hypothesis, const StdeConfig& config) {
  if (reference.fixations.empty() || hypothesis.fixations.empty()) {
    throw UndefinedMetric("STDE needs two nonempty scanpaths");
  }
  if (config.k_max < 1) throw ValidationError("STDE k_max must be >= 1");
  if (!(config.scale > 0.0)) throw ValidationError("STDE scale must be positive");
  const auto& ref = reference.fixations;
  const auto& hyp = hypothesis.fixations;
  const std::size_t kmax =
      std::min({static_cast<std::size_t>(config.k_max), ref.size(), hyp.size()});

  double total = 0.0;
  for (std::size_t k = 1; k <= kmax; ++k) {
    double sum = 0.0;
    const std::size_t hyp_windows = hyp.size() - k + 1;
    for (std::size_t i = 0; i < hyp_windows; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j + k <= ref.size(); ++j) {
        double d = 0.0;
        for (std::size_t w = 0; w < k; ++w) {
          d += (hyp[i + w].position() - ref[j + w].position()).norm();
        }
        best = std::min(best, d / static_cast<double>(k));
      }
      sum += std::exp(-best / config.scale);
    }
    total += sum / static_cast<double>(hyp_windows);
  }
  return total / static_cast<double>(kmax);
}

std::vector<double> saccade_amplitudes(const Scanpath& path) {
  std::vector<double> out;
  for (std::size_t k = 1; k < path.fixations.size(); ++k) {
    out.push_back((path.fixations[k].position() - path.fixations[k - 1].position()).norm());
  }
  return out;
}

Histogram amplitude_histogram(std::span<const double> amplitudes, std::size_t bins) {
  Histogram h = Histogram::uniform(bins, 0.0, 1.0);
  for (double a : amplitudes) h.add(a);
  return h;
}

double kl_divergence(const Histogram& p, const Histogram& q, double smoothing_eps) {
  p.validate();
  q.validate();
  if (p.edges != q.edges) throw ValidationError("histograms have different binning");
  if (smoothing_eps < 0.0) throw ValidationError("smoothing must be nonnegative");
  const double bins = static_cast<double>(p.counts.size());
  const double p_total = static_cast<double>(p.total()) + smoothing_eps * bins;
  const double q_total = static_cast<double>(q.total()) + smoothing_eps * bins;
  if (!(p_total > 0.0) || !(q_total > 0.0)) {
    throw UndefinedMetric("KL divergence of an empty histogram");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.counts.size(); ++i) {
    const double pi = (static_cast<double>(p.counts[i]) + smoothing_eps) / p_total;
    if (pi == 0.0) continue;
    const double qi = (static_cast<double>(q.counts[i]) + smoothing_eps) / q_total;
    if (qi == 0.0) return std::numeric_limits<double>::infinity();
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

MetricReport evaluate_pair(const Scanpath& reference, const Scanpath& hypothesis,
                           const SaliencyMap* saliency, const EvalConfig& config) {
  if (!(reference.grid == hypothesis.grid)) {
    throw ValidationError("reference and hypothesis have different grids");
  }
  MetricReport r;
  if (saliency != nullptr && !reference.fixations.empty()) {
    r.auc = auc_judd(*saliency, reference.fixations);
    try {
      r.nss = nss(*saliency, reference.fixations);
    } catch (const UndefinedMetric&) {
    }
  }
  const GridQuantizer q(config.grid_rows, config.grid_cols, reference.grid);
  r.string_edit = string_edit(reference, hypothesis, q);
  if (!reference.fixations.empty() && !hypothesis.fixations.empty()) {
    r.stde = stde(reference, hypothesis, config.stde);
  }
  const std::vector<double> ra = saccade_amplitudes(reference);
  const std::vector<double> ha = saccade_amplitudes(hypothesis);
  if (!ra.empty() && !ha.empty()) {
    r.kl_amplitude = kl_divergence(amplitude_histogram(ra, config.bins),
                                   amplitude_histogram(ha, config.bins), config.smoothing_eps);
  }
  return r;
}

BatchEvaluation evaluate_batch(std::span<const EvalPair> pairs, const EvalConfig& config) {
  BatchEvaluation out;
  Histogram ref_hist = Histogram::uniform(config.bins, 0.0, 1.0);
  Histogram hyp_hist = ref_hist;
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    void add(const std::optional<double>& v) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    std::optional<double> mean() const {
      return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
    }
  } auc, nss_acc, se, st, kl;

  for (const EvalPair& p : pairs) {
    const SaliencyMap* sal = p.saliency ? &*p.saliency : nullptr;
    MetricReport r = evaluate_pair(p.reference, p.hypothesis, sal, config);
    auc.add(r.auc);
    nss_acc.add(r.nss);
    if (r.string_edit) se.add(static_cast<double>(*r.string_edit));
    st.add(r.stde);
    kl.add(r.kl_amplitude);
    for (double a : saccade_amplitudes(p.reference)) ref_hist.add(a);
    for (double a : saccade_amplitudes(p.hypothesis)) hyp_hist.add(a);
    out.rows.push_back({p.id, std::move(r)});
  }
  out.mean = {auc.mean(), nss_acc.mean(), se.mean(), st.mean(), kl.mean()};
  out.ref_saccades = ref_hist.total();
  out.hyp_saccades = hyp_hist.total();
  if (out.ref_saccades > 0 && out.hyp_saccades > 0) {
    out.kl_amplitude = kl_divergence(ref_hist, hyp_hist, config.smoothing_eps);
  } else {
    out.kl_amplitude = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

}  // namespace

std::string format_batch_csv(const BatchEvaluation& batch) {
  std::string out = "id,auc,nss,string_edit,stde\n";
  for (const BatchRow& row : batch.rows) {
    const MetricReport& r = row.report;
    const std::optional<double> se =
        r.string_edit ? std::optional<double>(static_cast<double>(*r.string_edit)) : std::nullopt;
    out += row.id + "," + cell(r.auc) + "," + cell(r.nss) + "," + cell(se) + "," + cell(r.stde) +
           "\n";
  }
  const MeanRow& m = batch.mean;
  out += "mean," + cell(m.auc) + "," + cell(m.nss) + "," + cell(m.string_edit) + "," +
         cell(m.stde) + "\n";
  return out;
}

std::string format_kl_summary(const BatchEvaluation& batch, const EvalConfig& config) {
  nlohmann::ordered_json doc;
  doc["bins"] = config.bins;
  doc["smoothing_eps"] = config.smoothing_eps;
  doc["units"] = "nats";
  doc["ref_saccades"] = batch.ref_saccades;
  doc["hyp_saccades"] = batch.hyp_saccades;
  if (std::isfinite(batch.kl_amplitude)) {
    doc["kl"] = batch.kl_amplitude;
  } else {
    doc["kl"] = nullptr;
  }
  nlohmann::ordered_json per_pair = nlohmann::ordered_json::array();
  for (const BatchRow& row : batch.rows) {
    nlohmann::ordered_json item;
    item["id"] = row.id;
    if (row.report.kl_amplitude && std::isfinite(*row.report.kl_amplitude)) {
      item["kl"] = *row.report.kl_amplitude;
    } else {
      item["kl"] = nullptr;
    }
    per_pair.push_back(std::move(item));
  }
  doc["pairs"] = std::move(per_pair);
  return doc.dump(2) + "\n";
}

}  // namespace gravscan
