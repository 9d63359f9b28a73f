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

#include "gravscan/agreement.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

namespace gravscan {

using json = nlohmann::json;

void JudgmentMatrix::validate() const {
  if (raters < 2) throw ValidationError("kappa needs at least two raters per item");
  if (items.empty()) throw ValidationError("kappa needs at least one item");
  for (const CategoryCounts& c : items) {
    if (c[0] < 0 || c[1] < 0) throw ValidationError("category counts must be nonnegative");
    if (c[0] + c[1] != raters) throw ValidationError("every item needs exactly n ratings");
  }
}

namespace {

double kappa_from(double p_bar, double pe_bar) {
  if (pe_bar >= 1.0) {
    if (p_bar >= 1.0) return 1.0;
    throw UndefinedMetric("kappa undefined: chance agreement is 1");
  }
  return (p_bar - pe_bar) / (1.0 - pe_bar);
}

}  // namespace

double fleiss_kappa(const JudgmentMatrix& m) {
  m.validate();
  const double n = m.raters;
  const double big_n = static_cast<double>(m.items.size());
  double p_sum = 0.0;
  std::array<double, 2> col{0.0, 0.0};
  for (const CategoryCounts& c : m.items) {
    double agree = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
      agree += static_cast<double>(c[j]) * (c[j] - 1);
      col[j] += c[j];
    }
    p_sum += agree / (n * (n - 1.0));
  }
  const double p_bar = p_sum / big_n;
  double pe_bar = 0.0;
  for (double total : col) {
    const double pj = total / (big_n * n);
    pe_bar += pj * pj;
  }
  return kappa_from(p_bar, pe_bar);
}

double fleiss_kappa_varying(std::span<const CategoryCounts> items) {
  if (items.empty()) throw ValidationError("kappa needs at least one item");
  double p_sum = 0.0;
  double ratings = 0.0;
  std::array<double, 2> col{0.0, 0.0};
  for (const CategoryCounts& c : items) {
    if (c[0] < 0 || c[1] < 0) throw ValidationError("category counts must be nonnegative");
    const double ni = c[0] + c[1];
    if (ni < 2) throw ValidationError("every item needs at least two ratings");
    double agree = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
      agree += static_cast<double>(c[j]) * (c[j] - 1);
      col[j] += c[j];
    }
    p_sum += agree / (ni * (ni - 1.0));
    ratings += ni;
  }
  const double p_bar = p_sum / static_cast<double>(items.size());
  double pe_bar = 0.0;
  for (double total : col) {
    const double pj = total / ratings;
    pe_bar += pj * pj;
  }
  return kappa_from(p_bar, pe_bar);
}

JudgmentRecord parse_judgment(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed label record: ") + e.what());
  }
  try {
    JudgmentRecord r;
    r.session_id = j.at("session_id").get<std::string>();
    r.stimulus_id = j.at("stimulus_id").get<std::string>();
    r.label = provenance_from_string(j.at("label").get<std::string>());
    r.truth = provenance_from_string(j.at("truth").get<std::string>());
    r.expertise = j.at("expertise").get<int>();
    r.education = j.value("education", std::string());
    r.session_size = j.value("session_size", 20);
    r.replays = j.value("replays", 0);
    r.submitted_at = j.value("submitted_at", 0.0);
    if (r.expertise < 1 || r.expertise > 5) throw ValidationError("expertise must be in 1..5");
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad label record: ") + e.what());
  }
}

std::string format_judgment(const JudgmentRecord& r) {
  nlohmann::ordered_json j;
  j["session_id"] = r.session_id;
  j["stimulus_id"] = r.stimulus_id;
  j["label"] = std::string(to_string(r.label));
  j["truth"] = std::string(to_string(r.truth));
  j["expertise"] = r.expertise;
  j["education"] = r.education;
  j["session_size"] = r.session_size;
  j["replays"] = r.replays;
  j["submitted_at"] = r.submitted_at;
  return j.dump();
}

std::vector<JudgmentRecord> read_label_store(const std::filesystem::path& path) {
  std::vector<JudgmentRecord> out;
  std::ifstream in(path);
  if (!in) {
    if (!std::filesystem::exists(path)) return out;
    throw IoError("cannot open label store '" + path.string() + "'");
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_judgment(line));
  }
  return out;
}

std::optional<MeanStd> mean_std(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return MeanStd{mean, std::sqrt(ss / n), values.size()};
}

namespace {

struct Annotator {
  int expertise = 1;
  int session_size = 20;
  std::vector<const JudgmentRecord*> labels;
};

std::optional<double> fraction(const Annotator& a, auto&& include, auto&& hit) {
  std::size_t den = 0;
  std::size_t num = 0;
  for (const JudgmentRecord* r : a.labels) {
    if (!include(*r)) continue;
    ++den;
    if (hit(*r)) ++num;
  }
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> group_kappa(const std::map<std::string, Annotator>& annotators,
                                  auto&& keep_annotator, auto&& keep_item,
                                  std::size_t* excluded_items) {
  std::map<std::string, CategoryCounts> items;
  for (const auto& [sid, a] : annotators) {
    if (!keep_annotator(a)) continue;
    for (const JudgmentRecord* r : a.labels) {
      if (!keep_item(*r)) continue;
      ++items[r->stimulus_id][category_index(r->label)];
    }
  }
  std::vector<CategoryCounts> rows;
  for (const auto& [id, c] : items) {
    if (c[0] + c[1] >= 2) {
      rows.push_back(c);
    } else if (excluded_items != nullptr) {
      ++*excluded_items;
    }
  }
  if (rows.empty()) return std::nullopt;
  try {
    return fleiss_kappa_varying(rows);
  } catch (const UndefinedMetric&) {
    return std::nullopt;
  }
}

}  // namespace

CrowdReport crowd_report(std::span<const JudgmentRecord> records, int expertise_threshold) {
  if (records.empty()) throw ValidationError("label store is empty");
  CrowdReport rep;
  rep.judgments = records.size();
  rep.expertise_threshold = expertise_threshold;

  std::map<std::string, Annotator> annotators;
  for (const JudgmentRecord& r : records) {
    if (r.expertise < 1 || r.expertise > 5) throw ValidationError("expertise must be in 1..5");
    Annotator& a = annotators[r.session_id];
    a.expertise = r.expertise;
    a.session_size = r.session_size;
    a.labels.push_back(&r);
  }
  rep.annotators = annotators.size();

  std::vector<double> overall, expert, naive, hh, sh, lh;
  std::map<std::string, Annotator> complete;
  for (const auto& [sid, a] : annotators) {
    const auto is_human_label = [](const JudgmentRecord& r) { return r.label == Provenance::human; };
    const auto all = [](const JudgmentRecord&) { return true; };
    const double acc = *fraction(a, all, [](const JudgmentRecord& r) { return r.correct(); });
    overall.push_back(acc);
    (a.expertise >= expertise_threshold ? expert : naive).push_back(acc);
    if (auto v = fraction(a, [](const JudgmentRecord& r) { return r.truth == Provenance::human; },
                          is_human_label)) {
      hh.push_back(*v);
    }
    if (auto v = fraction(
            a, [](const JudgmentRecord& r) { return r.truth == Provenance::synthetic; },
            is_human_label)) {
      sh.push_back(*v);
    }
    lh.push_back(*fraction(a, all, is_human_label));
    if (static_cast<int>(a.labels.size()) >= a.session_size) {
      ++rep.complete_sessions;
      complete.emplace(sid, a);
    } else {
      ++rep.incomplete_sessions;
    }
  }
  rep.overall = mean_std(overall);
  rep.expert = mean_std(expert);
  rep.naive = mean_std(naive);
  rep.human_labeled_human = mean_std(hh);
  rep.synthetic_labeled_human = mean_std(sh);
  rep.labeled_human = mean_std(lh);

  rep.kappa_excluded_sessions = rep.incomplete_sessions;
  const auto any_annotator = [](const Annotator&) { return true; };
  const auto any_item = [](const JudgmentRecord&) { return true; };
  rep.kappa_overall = group_kappa(complete, any_annotator, any_item, &rep.kappa_excluded_items);
  rep.kappa_expert = group_kappa(
      complete, [&](const Annotator& a) { return a.expertise >= expertise_threshold; }, any_item,
      nullptr);
  rep.kappa_naive = group_kappa(
      complete, [&](const Annotator& a) { return a.expertise < expertise_threshold; }, any_item,
      nullptr);
  rep.kappa_human_items = group_kappa(
      complete, any_annotator,
      [](const JudgmentRecord& r) { return r.truth == Provenance::human; }, nullptr);
  rep.kappa_synthetic_items = group_kappa(
      complete, any_annotator,
      [](const JudgmentRecord& r) { return r.truth == Provenance::synthetic; }, nullptr);
  return rep;
}

namespace {

nlohmann::ordered_json stat_json(const std::optional<MeanStd>& s) {
  if (!s) return nullptr;
  return {{"mean", s->mean}, {"std", s->std}, {"n", s->n}};
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::string stat_cell(const std::optional<MeanStd>& s) {
  if (!s) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f)", s->mean, s->std);
  return buf;
}

std::string kappa_cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

std::string format_crowd_json(const CrowdReport& r) {
  nlohmann::ordered_json j;
  j["judgments"] = r.judgments;
  j["annotators"] = r.annotators;
  j["complete_sessions"] = r.complete_sessions;
  j["incomplete_sessions"] = r.incomplete_sessions;
  j["expertise_threshold"] = r.expertise_threshold;
  j["overall_acc"] = stat_json(r.overall);
  j["expert_acc"] = stat_json(r.expert);
  j["naive_acc"] = stat_json(r.naive);
  j["human_labeled_human"] = stat_json(r.human_labeled_human);
  j["synthetic_labeled_human"] = stat_json(r.synthetic_labeled_human);
  j["labeled_human"] = stat_json(r.labeled_human);
  j["kappa_overall"] = opt_json(r.kappa_overall);
  j["kappa_expert"] = opt_json(r.kappa_expert);
  j["kappa_naive"] = opt_json(r.kappa_naive);
  j["kappa_human_items"] = opt_json(r.kappa_human_items);
  j["kappa_synthetic_items"] = opt_json(r.kappa_synthetic_items);
  j["kappa_excluded_sessions"] = r.kappa_excluded_sessions;
  j["kappa_excluded_items"] = r.kappa_excluded_items;
  return j.dump(2) + "\n";
}

std::string format_crowd_table(const CrowdReport& r) {
  const std::array<std::string, 5> head{"Overall", "Expert evaluators", "Naive evaluators",
                                        "Human labeled human", "Synthetic labeled human"};
  const std::array<std::string, 5> cells{stat_cell(r.overall), stat_cell(r.expert),
                                         stat_cell(r.naive), stat_cell(r.human_labeled_human),
                                         stat_cell(r.synthetic_labeled_human)};
  std::string sep = "+";
  std::string top = "|";
  std::string mid = "|";
  for (std::size_t k = 0; k < head.size(); ++k) {
    const std::size_t w = std::max(head[k].size(), cells[k].size()) + 2;
    sep += std::string(w, '-') + "+";
    auto pad = [w](const std::string& s) {
      const std::size_t left = (w - s.size()) / 2;
      return std::string(left, ' ') + s + std::string(w - s.size() - left, ' ');
    };
    top += pad(head[k]) + "|";
    mid += pad(cells[k]) + "|";
  }
  std::string out = sep + "\n" + top + "\n" + sep + "\n" + mid + "\n" + sep + "\n";
  out += "labeled human: " + stat_cell(r.labeled_human) + "\n";
  out += "kappa: overall=" + kappa_cell(r.kappa_overall) + " expert=" +
         kappa_cell(r.kappa_expert) + " naive=" + kappa_cell(r.kappa_naive) +
         " human_items=" + kappa_cell(r.kappa_human_items) +
         " synthetic_items=" + kappa_cell(r.kappa_synthetic_items) + "\n";
  out += "annotators=" + std::to_string(r.annotators) + " judgments=" +
         std::to_string(r.judgments) + " complete=" + std::to_string(r.complete_sessions) +
         " incomplete=" + std::to_string(r.incomplete_sessions) +
         " kappa_excluded_items=" + std::to_string(r.kappa_excluded_items) + "\n";
  return out;
}

}  // namespace gravscan
