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
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gravscan/agreement.hpp"
#include "gravscan/core.hpp"
#include "gravscan/io.hpp"

namespace httplib {
class Server;
}

namespace gravscan {

struct AnnotatorProfile {
  std::string education;
  int expertise = 1;  ///< self-assessed knowledge of eye movements, 1..5
};

struct AnnotationSession {
  std::string session_id;
  AnnotatorProfile profile;
  std::vector<std::string> stimuli;  ///< presentation order
  double created_at = 0.0;
};

/// Failure carrying the HTTP status it maps to.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SubmitOutcome { recorded, duplicate };

/// Crowd-annotation protocol: balanced 10 + 10 sessions, blind replay
/// payloads, write-ahead judgment log and live statistics.
///
/// State on disk, next to the label store:
///   <store>            JSON-lines judgments (consumed by agreement stats)
///   <store>.sessions   JSON-lines session records
///   <store>.rng        sampling generator state
/// All mutation goes through one mutex; reads copy a snapshot under it.
class AnnotationService {
 public:
  struct Config {
    fs::path manifest;
    fs::path store;
    std::uint64_t seed = 0;
    int per_class = 10;
    double replay_fps = 25.0;
    double static_duration = 5.0;  ///< viewing time for still images
    int expertise_threshold = 3;
  };

  explicit AnnotationService(Config config);

  AnnotationSession create_session(const AnnotatorProfile& profile);
  SubmitOutcome submit_judgment(const std::string& session_id, const std::string& stimulus_id,
                                Provenance label, int replays = 0);

  /// Client payload for a session; never contains ground truth.
  std::string session_payload(const AnnotationSession& session) const;
  /// {"w":int,"h":int,"gray":[0..255,...]}
  std::string image_payload(const std::string& stimulus_id) const;
  /// CrowdReport JSON over a snapshot of the store, plus session counts.
  std::string stats_payload() const;

  std::vector<JudgmentRecord> snapshot() const;
  std::optional<AnnotationSession> find_session(const std::string& session_id) const;

 private:
  struct Stimulus {
    StimulusEntry entry;
    std::vector<TrajectorySample> trajectory;
    double duration = 0.0;
  };

  void load_state();
  void append_line(const fs::path& path, const std::string& line) const;
  void persist_rng() const;
  std::string new_session_id();

  Config config_;
  std::map<std::string, Stimulus> stimuli_;
  std::vector<std::string> human_pool_;
  std::vector<std::string> synthetic_pool_;

  mutable std::mutex mu_;
  std::mt19937_64 rng_;
  std::map<std::string, AnnotationSession> sessions_;
  std::map<std::pair<std::string, std::string>, Provenance> judged_;
  std::vector<JudgmentRecord> records_;
};

/// Replay samples for a scanpath: its stored trajectory if present, otherwise
/// a sample-and-hold of fixation positions at `fps` over `duration`.
std::vector<TrajectorySample> replay_trajectory(const Scanpath& path, double fps, double duration);

/// Routes: POST /sessions, POST /sessions/{sid}/judgments, GET /stats,
/// GET /stimuli/{id}/image, and static UI files from `static_dir` if given.
void register_routes(httplib::Server& server, AnnotationService& service,
                     const std::optional<fs::path>& static_dir = std::nullopt);

/// Blocks serving on 0.0.0.0:port.
void serve_annotations(AnnotationService& service, int port,
                       const std::optional<fs::path>& static_dir = std::nullopt);

}  // namespace gravscan
