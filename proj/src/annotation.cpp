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

#include "gravscan/annotation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include <json.hpp>

namespace gravscan {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

fs::path sidecar(const fs::path& store, const char* suffix) {
  fs::path p = store;
  p += suffix;
  return p;
}

}  // namespace

std::vector<TrajectorySample> replay_trajectory(const Scanpath& path, double fps,
                                                double duration) {
  if (!path.trajectory.empty()) return path.trajectory;
  std::vector<TrajectorySample> out;
  if (path.fixations.empty()) return out;
  const double period = 1.0 / fps;
  std::size_t k = 0;
  for (std::size_t frame = 0;; ++frame) {
    const double t = static_cast<double>(frame) * period;
    if (t > duration + 1e-9) break;
    while (k + 1 < path.fixations.size() && path.fixations[k + 1].t <= t + 1e-9) ++k;
    out.push_back({path.fixations[k].x, path.fixations[k].y, t});
  }
  return out;
}

AnnotationService::AnnotationService(Config config)
    : config_(std::move(config)), rng_(config_.seed) {
  if (config_.per_class < 1) throw ValidationError("per_class must be >= 1");
  const StimulusManifest manifest = read_stimulus_manifest(config_.manifest);
  for (const StimulusEntry& e : manifest.stimuli) {
    if (stimuli_.contains(e.id)) throw ValidationError("duplicate stimulus id '" + e.id + "'");
    const Scanpath sp = read_scanpath(e.scanpath);
    double duration = sp.end_time();
    if (!sp.trajectory.empty()) duration = std::max(duration, sp.trajectory.back().t);
    if (!e.frames_dir && duration <= 0.0) duration = config_.static_duration;
    Stimulus s{e, replay_trajectory(sp, config_.replay_fps, duration), duration};
    (e.truth == Provenance::human ? human_pool_ : synthetic_pool_).push_back(e.id);
    stimuli_.emplace(e.id, std::move(s));
  }
  load_state();
}

void AnnotationService::load_state() {
  if (std::ifstream in(sidecar(config_.store, ".rng")); in) {
    in >> rng_;
    if (!in) throw ParseError("corrupt RNG state file");
  }
  if (std::ifstream in(sidecar(config_.store, ".sessions")); in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        AnnotationSession s;
        s.session_id = j.at("session_id").get<std::string>();
        s.profile.education = j.value("education", std::string());
        s.profile.expertise = j.at("expertise").get<int>();
        s.stimuli = j.at("stimuli").get<std::vector<std::string>>();
        s.created_at = j.value("created_at", 0.0);
        sessions_[s.session_id] = std::move(s);
      } catch (const json::exception& e) {
        throw ParseError(std::string("corrupt session record: ") + e.what());
      }
    }
  }
  records_ = read_label_store(config_.store);
  for (const JudgmentRecord& r : records_) judged_[{r.session_id, r.stimulus_id}] = r.label;
}

void AnnotationService::append_line(const fs::path& path, const std::string& line) const {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw IoError("cannot open '" + path.string() + "' for append");
  const std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      ::close(fd);
      throw IoError("append to '" + path.string() + "' failed");
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

void AnnotationService::persist_rng() const {
  const fs::path target = sidecar(config_.store, ".rng");
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << rng_;
    out.flush();
    if (!out) throw IoError("cannot write RNG state");
  }
  fs::rename(tmp, target);
}

std::string AnnotationService::new_session_id() {
  std::random_device rd;
  char buf[33];
  std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", rd(), rd(), rd(), rd());
  return buf;
}

AnnotationSession AnnotationService::create_session(const AnnotatorProfile& profile) {
  if (profile.expertise < 1 || profile.expertise > 5) {
    throw ServiceError(400, "expertise must be an integer in 1..5");
  }
  const auto need = static_cast<std::size_t>(config_.per_class);
  if (human_pool_.size() < need || synthetic_pool_.size() < need) {
    throw ServiceError(503, "stimulus pool too small for a balanced session");
  }

  std::lock_guard lock(mu_);
  auto sample = [&](std::vector<std::string> pool) {
    // partial Fisher-Yates
    for (std::size_t i = 0; i < need; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng_)]);
    }
    pool.resize(need);
    return pool;
  };
  AnnotationSession s;
  s.stimuli = sample(human_pool_);
  const std::vector<std::string> synth = sample(synthetic_pool_);
  s.stimuli.insert(s.stimuli.end(), synth.begin(), synth.end());
  std::shuffle(s.stimuli.begin(), s.stimuli.end(), rng_);

  std::size_t humans = 0;
  for (const std::string& id : s.stimuli) {
    if (stimuli_.at(id).entry.truth == Provenance::human) ++humans;
  }
  if (humans != need || s.stimuli.size() != 2 * need) {
    throw ServiceError(500, "session failed the class-balance check");
  }

  do {
    s.session_id = new_session_id();
  } while (sessions_.contains(s.session_id));
  s.profile = profile;
  s.created_at = now_seconds();

  ordered_json rec;
  rec["session_id"] = s.session_id;
  rec["education"] = s.profile.education;
  rec["expertise"] = s.profile.expertise;
  rec["stimuli"] = s.stimuli;
  rec["created_at"] = s.created_at;
  append_line(sidecar(config_.store, ".sessions"), rec.dump());
  persist_rng();
  sessions_[s.session_id] = s;
  return s;
}

SubmitOutcome AnnotationService::submit_judgment(const std::string& session_id,
                                                 const std::string& stimulus_id, Provenance label,
                                                 int replays) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session");
  const AnnotationSession& s = it->second;
  if (std::find(s.stimuli.begin(), s.stimuli.end(), stimulus_id) == s.stimuli.end()) {
    throw ServiceError(404, "stimulus is not part of this session");
  }
  if (auto prev = judged_.find({session_id, stimulus_id}); prev != judged_.end()) {
    if (prev->second == label) return SubmitOutcome::duplicate;
    throw ServiceError(409, "stimulus already judged with a different label");
  }
  JudgmentRecord r;
  r.session_id = session_id;
  r.stimulus_id = stimulus_id;
  r.label = label;
  r.truth = stimuli_.at(stimulus_id).entry.truth;
  r.expertise = s.profile.expertise;
  r.education = s.profile.education;
  r.session_size = static_cast<int>(s.stimuli.size());
  r.replays = std::max(0, replays);
  r.submitted_at = now_seconds();
  // write-ahead: durable before acknowledged
  append_line(config_.store, format_judgment(r));
  judged_[{session_id, stimulus_id}] = label;
  records_.push_back(std::move(r));
  return SubmitOutcome::recorded;
}

std::string AnnotationService::session_payload(const AnnotationSession& session) const {
  ordered_json doc;
  doc["session_id"] = session.session_id;
  ordered_json items = ordered_json::array();
  for (const std::string& id : session.stimuli) {
    const Stimulus& s = stimuli_.at(id);
    ordered_json item;
    item["id"] = id;
    item["image_url"] = "/stimuli/" + id + "/image";
    ordered_json tr = ordered_json::array();
    for (const TrajectorySample& p : s.trajectory) {
      tr.push_back(ordered_json{{"x", p.x}, {"y", p.y}, {"t", p.t}});
    }
    item["trajectory"] = std::move(tr);
    item["duration_s"] = s.duration;
    items.push_back(std::move(item));
  }
  doc["stimuli"] = std::move(items);
  return doc.dump();
}

std::string AnnotationService::image_payload(const std::string& stimulus_id) const {
  auto it = stimuli_.find(stimulus_id);
  if (it == stimuli_.end()) throw ServiceError(404, "unknown stimulus");
  const Frame f = read_pgm(it->second.entry.image);
  std::string out = "{\"w\":" + std::to_string(f.grid.width()) +
                    ",\"h\":" + std::to_string(f.grid.height()) + ",\"gray\":[";
  out.reserve(out.size() + static_cast<std::size_t>(f.brightness.size()) * 4);
  for (Eigen::Index i = 0; i < f.brightness.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(std::lround(std::clamp(f.brightness.data()[i], 0.0, 1.0) * 255.0));
  }
  out += "]}";
  return out;
}

std::vector<JudgmentRecord> AnnotationService::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::optional<AnnotationSession> AnnotationService::find_session(
    const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::string AnnotationService::stats_payload() const {
  const std::vector<JudgmentRecord> snap = snapshot();
  std::size_t sessions = 0;
  {
    std::lock_guard lock(mu_);
    sessions = sessions_.size();
  }
  CrowdReport rep;
  rep.expertise_threshold = config_.expertise_threshold;
  if (!snap.empty()) rep = crowd_report(snap, config_.expertise_threshold);
  json doc = json::parse(format_crowd_json(rep));
  doc["sessions_created"] = sessions;
  return doc.dump(2);
}

}  // namespace gravscan
