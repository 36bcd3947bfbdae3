// Copyright 2026 The vqalab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "vqalab/study_server.h"

#include <regex>

#include "httplib.h"
#include "vqalab/csv.h"
#include "vqalab/error.h"

namespace vqalab::study {

using nlohmann::json;

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSubject:
    case ErrorCode::kUnknownSession:
    case ErrorCode::kEmptyStore:
      return 404;
    case ErrorCode::kGapNotElapsed:
    case ErrorCode::kActiveSessionExists:
    case ErrorCode::kNoPlaylistRemaining:
    case ErrorCode::kPendingRating:
    case ErrorCode::kSessionComplete:
    case ErrorCode::kWrongVideo:
    case ErrorCode::kDuplicateRating:
    case ErrorCode::kDuplicateEntry:
      return 409;
    case ErrorCode::kOutOfRange:
    case ErrorCode::kSchemaError:
    case ErrorCode::kUsageError:
      return 400;
    default:
      return 500;
  }
}

namespace {

HttpResponse JsonResponse(int status, const json& body) {
  return {status, body.dump(), "application/json"};
}

HttpResponse ErrorResponse(const Error& e, const json& extra = json::object()) {
  json body = {{"error", std::string(ErrorCodeName(e.code()))}, {"message", e.what()}};
  body.update(extra);
  return JsonResponse(HttpStatus(e.code()), body);
}

json ParseBody(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kSchemaError, "body must be a JSON object");
  }
  return j;
}

std::string StreamUrl(const std::string& video_id) { return "/videos/" + video_id + "/stream"; }

}  // namespace

StudyApi::StudyApi(StudyStore& store, std::function<Timestamp()> clock,
                   std::filesystem::path media_dir, std::string media_ext)
    : store_(store),
      clock_(std::move(clock)),
      media_dir_(std::move(media_dir)),
      media_ext_(std::move(media_ext)) {
  store_.Read([&](const Study& s) {
    for (const auto& p : s.playlists()) videos_.insert(p.begin(), p.end());
    for (const auto& v : s.config().training_video_ids) videos_.insert(v);
    return 0;
  });
}

HttpResponse StudyApi::Stream(const std::string& video_id) {
  if (!videos_.count(video_id) || media_dir_.empty()) {
    return JsonResponse(404, {{"error", "UnknownVideo"}, {"message", video_id}});
  }
  try {
    return {200, io::ReadFile(media_dir_ / (video_id + media_ext_)), "application/octet-stream"};
  } catch (const Error&) {
    return JsonResponse(404, {{"error", "MissingMedia"}, {"message", video_id}});
  }
}

HttpResponse StudyApi::Handle(const std::string& method, const std::string& path,
                              const std::string& body, const std::string& request_id) {
  static const std::regex kNext("^/sessions/([^/]+)/next$");
  static const std::regex kRatings("^/sessions/([^/]+)/ratings$");
  static const std::regex kStream("^/videos/([^/]+)/stream$");
  std::smatch m;
  json event;
  try {
    if (method == "GET" && path == "/healthz") {
      return JsonResponse(200, {{"status", "ok"}, {"sequence", store_.sequence()}});
    }
    if (method == "GET" && path == "/export/opinions.csv") {
      return {200, store_.Read([](const Study& s) { return s.ExportOpinionCsv(); }), "text/csv"};
    }
    if (method == "GET" && std::regex_match(path, m, kStream)) return Stream(m[1]);
    const json in = ParseBody(body);
    if (method == "POST" && path == "/subjects") {
      event = {{"op", "register"}, {"subject_id", in.at("subject_id")}};
      if (in.contains("questionnaire")) event["questionnaire"] = in.at("questionnaire");
    } else if (method == "POST" && path == "/sessions") {
      event = {{"op", "start"}, {"subject_id", in.at("subject_id")}, {"now", clock_()}};
    } else if (method == "GET" && std::regex_match(path, m, kNext)) {
      event = {{"op", "next"}, {"session_id", m[1].str()}};
    } else if (method == "POST" && std::regex_match(path, m, kRatings)) {
      if (!in.at("score").is_number()) throw Error(ErrorCode::kSchemaError, "score must be a number");
      event = {{"op", "rate"},
               {"session_id", m[1].str()},
               {"video_id", in.at("video_id")},
               {"score", in.at("score")},
               {"now", clock_()}};
    } else {
      return JsonResponse(404, {{"error", "NotFound"}, {"message", method + " " + path}});
    }
    std::string rid = request_id;
    if (rid.empty() && in.contains("request_id")) {
      if (!in.at("request_id").is_string()) {
        throw Error(ErrorCode::kSchemaError, "request_id must be a string");
      }
      rid = in.at("request_id").get<std::string>();
    }
    if (!rid.empty()) event["request_id"] = rid;
    json out = store_.Apply(event);
    if (event["op"] == "next" && !out.at("done").get<bool>()) {
      out["stream_url"] = StreamUrl(out.at("video_id").get<std::string>());
    }
    return JsonResponse(event["op"] == "register" || event["op"] == "start" ? 201 : 200, out);
  } catch (const json::exception& e) {
    return ErrorResponse(Error(ErrorCode::kSchemaError, e.what()));
  } catch (const Error& e) {
    json extra = json::object();
    if (e.code() == ErrorCode::kGapNotElapsed) {
      const std::string subject = event.value("subject_id", "");
      const Timestamp now = event.value("now", Timestamp{0});
      extra["remaining_seconds"] =
          store_.Read([&](const Study& s) { return s.RemainingWait(subject, now); });
    }
    return ErrorResponse(e, extra);
  }
}

void StudyApi::Mount(httplib::Server& server) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r =
        Handle(req.method, req.path, req.body, req.get_header_value("Idempotency-Key"));
    if (r.status != 200) res.status = r.status;  // httplib picks 200 or 206
    res.set_content(r.body, r.content_type);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
}

}  // namespace vqalab::study
