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

// Eigen must come before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "gravscan/annotation.hpp"

#include <httplib.h>
#include <json.hpp>

namespace gravscan {

using json = nlohmann::json;

namespace {

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    send_error(res, e.status(), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, std::string("bad request body: ") + e.what());
  } catch (const ParseError& e) {
    send_error(res, 400, e.what());
  } catch (const IoError& e) {
    send_error(res, 500, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

void register_routes(httplib::Server& server, AnnotationService& service,
                     const std::optional<fs::path>& static_dir) {
  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      AnnotatorProfile profile;
      profile.education = body.value("education", std::string());
      const json& e = body.at("expertise");
      if (!e.is_number_integer()) throw ServiceError(400, "expertise must be an integer");
      profile.expertise = e.get<int>();
      const AnnotationSession s = service.create_session(profile);
      res.set_content(service.session_payload(s), "application/json");
    });
  });

  server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/judgments)",
              [&service](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const json body = json::parse(req.body);
                  const std::string stimulus = body.at("stimulus_id").get<std::string>();
                  Provenance label;
                  try {
                    label = provenance_from_string(body.at("label").get<std::string>());
                  } catch (const ParseError&) {
                    throw ServiceError(400, "label must be 'human' or 'synthetic'");
                  }
                  const int replays = body.value("replays", 0);
                  service.submit_judgment(req.matches[1], stimulus, label, replays);
                  res.set_content(R"({"ok":true})", "application/json");
                });
              });

  server.Get("/stats", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(service.stats_payload(), "application/json"); });
  });

  server.Get(R"(/stimuli/([^/]+)/image)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 res.set_content(service.image_payload(req.matches[1]), "application/json");
               });
             });

  if (static_dir) {
    if (!server.set_mount_point("/", static_dir->string())) {
      throw IoError("static directory '" + static_dir->string() + "' does not exist");
    }
  }
}

void serve_annotations(AnnotationService& service, int port,
                       const std::optional<fs::path>& static_dir) {
  httplib::Server server;
  register_routes(server, service, static_dir);
  if (!server.listen("0.0.0.0", port)) {
    throw IoError("cannot listen on port " + std::to_string(port));
  }
}

}  // namespace gravscan
