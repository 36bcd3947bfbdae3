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

#include "vqalab/study.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "vqalab/csv.h"
#include "vqalab/error.h"
#include "vqalab/random.h"

namespace vqalab::study {

using nlohmann::json;

void StudyConfig::Validate() const {
  if (playlist_count == 0 || playlist_size == 0 || group_count == 0) {
    throw Error(ErrorCode::kUsageError, "playlist and group counts must be positive");
  }
  if (playlists_per_subject == 0 || playlists_per_subject > playlist_count) {
    throw Error(ErrorCode::kUsageError, "playlists_per_subject must be in [1, playlist_count]");
  }
  if (min_session_gap < 0) throw Error(ErrorCode::kUsageError, "negative session gap");
  std::set<std::string> unique(training_video_ids.begin(), training_video_ids.end());
  if (unique.size() != training_video_ids.size()) {
    throw Error(ErrorCode::kUsageError, "training video ids must be distinct");
  }
}

std::vector<Playlist> BuildPlaylists(const std::vector<std::string>& video_ids,
                                     const StudyConfig& config, uint64_t seed) {
  config.Validate();
  const size_t need = config.playlist_count * config.playlist_size;
  if (video_ids.size() != need) {
    throw Error(ErrorCode::kSizeMismatch, std::to_string(video_ids.size()) + " videos for " +
                                              std::to_string(config.playlist_count) + " x " +
                                              std::to_string(config.playlist_size));
  }
  std::set<std::string> unique(video_ids.begin(), video_ids.end());
  if (unique.size() != video_ids.size()) {
    throw Error(ErrorCode::kDuplicateEntry, "video ids must be distinct");
  }
  std::vector<std::string> order = video_ids;
  auto rng = rng::DerivedEngine(seed, 0);
  rng::Shuffle(order, rng);
  std::vector<Playlist> out(config.playlist_count);
  for (size_t p = 0; p < config.playlist_count; ++p) {
    out[p].assign(order.begin() + p * config.playlist_size,
                  order.begin() + (p + 1) * config.playlist_size);
  }
  return out;
}

std::vector<size_t> PlaylistsForIndex(size_t index, const StudyConfig& config) {
  const size_t g = index % config.group_count;
  std::vector<size_t> out;
  for (size_t k = 0; k < config.playlists_per_subject; ++k) {
    out.push_back((g + k) % config.playlist_count);
  }
  return out;
}

std::vector<std::vector<size_t>> AssignSubjects(const std::vector<std::string>& subject_ids,
                                                const StudyConfig& config) {
  config.Validate();
  if (subject_ids.size() % config.group_count != 0) {
    throw Error(ErrorCode::kIndivisibleGroups, std::to_string(subject_ids.size()) +
                                                   " subjects into " +
                                                   std::to_string(config.group_count) + " groups");
  }
  std::vector<std::vector<size_t>> out;
  for (size_t i = 0; i < subject_ids.size(); ++i) out.push_back(PlaylistsForIndex(i, config));
  return out;
}

std::string PhaseName(Phase p) {
  switch (p) {
    case Phase::kTraining: return "training";
    case Phase::kRating: return "rating";
    case Phase::kComplete: return "complete";
  }
  return "unknown";
}

namespace {

Phase ParsePhase(const std::string& s) {
  if (s == "training") return Phase::kTraining;
  if (s == "rating") return Phase::kRating;
  if (s == "complete") return Phase::kComplete;
  throw Error(ErrorCode::kSchemaError, "unknown phase " + s);
}

Phase PhaseAt(const Session& s) {
  if (s.cursor >= s.items.size()) return Phase::kComplete;
  return s.cursor < s.training_count ? Phase::kTraining : Phase::kRating;
}

}  // namespace

Study::Study(StudyConfig config, std::vector<Playlist> playlists)
    : config_(std::move(config)), playlists_(std::move(playlists)) {
  config_.Validate();
  if (playlists_.size() != config_.playlist_count) {
    throw Error(ErrorCode::kSizeMismatch, "playlist count differs from config");
  }
  for (const auto& p : playlists_) {
    if (p.size() != config_.playlist_size) {
      throw Error(ErrorCode::kSizeMismatch, "playlist size differs from config");
    }
  }
}

const Subject& Study::RegisterSubject(const std::string& subject_id,
                                      std::map<std::string, std::string> questionnaire) {
  if (subject_id.empty()) throw Error(ErrorCode::kUsageError, "empty subject id");
  if (subjects_.count(subject_id)) {
    throw Error(ErrorCode::kDuplicateEntry, "subject " + subject_id + " already registered");
  }
  Subject s;
  s.id = subject_id;
  s.order = subjects_.size();
  s.playlists = PlaylistsForIndex(s.order, config_);
  s.questionnaire = std::move(questionnaire);
  return subjects_.emplace(subject_id, std::move(s)).first->second;
}

const Subject& Study::GetSubject(const std::string& subject_id) const {
  auto it = subjects_.find(subject_id);
  if (it == subjects_.end()) throw Error(ErrorCode::kUnknownSubject, subject_id);
  return it->second;
}

Timestamp Study::RemainingWait(const std::string& subject_id, Timestamp now) const {
  const Subject& s = GetSubject(subject_id);
  if (s.sessions.empty()) return 0;
  const Session& last = sessions_.at(s.sessions.back());
  if (!last.completed_at) return 0;
  const Timestamp elapsed = now - *last.completed_at;
  return elapsed >= config_.min_session_gap ? 0 : config_.min_session_gap - elapsed;
}

const Session& Study::StartSession(const std::string& subject_id, Timestamp now) {
  const Subject& subj = GetSubject(subject_id);
  if (!subj.sessions.empty() && sessions_.at(subj.sessions.back()).state != Phase::kComplete) {
    throw Error(ErrorCode::kActiveSessionExists,
                "subject " + subject_id + " has session " + subj.sessions.back());
  }
  if (subj.sessions.size() >= subj.playlists.size()) {
    throw Error(ErrorCode::kNoPlaylistRemaining, "subject " + subject_id);
  }
  const Timestamp wait = RemainingWait(subject_id, now);
  if (wait > 0) {
    throw Error(ErrorCode::kGapNotElapsed,
                "subject " + subject_id + " must wait " + std::to_string(wait) + " s");
  }
  Session s;
  s.index = static_cast<int>(subj.sessions.size()) + 1;
  s.id = "s" + std::to_string(++session_counter_);
  s.subject_id = subject_id;
  s.playlist_id = subj.playlists[subj.sessions.size()];
  s.items = config_.training_video_ids;
  s.training_count = s.items.size();
  Playlist list = playlists_[s.playlist_id];
  if (config_.shuffle_per_subject) {
    auto rng = rng::DerivedEngine(config_.seed, subj.order * 64 + static_cast<uint64_t>(s.index));
    rng::Shuffle(list, rng);
  }
  s.items.insert(s.items.end(), list.begin(), list.end());
  s.state = PhaseAt(s);
  s.started_at = now;
  subjects_.at(subject_id).sessions.push_back(s.id);
  return sessions_.emplace(s.id, std::move(s)).first->second;
}

const Session& Study::GetSession(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, session_id);
  return it->second;
}

Session& Study::MutableSession(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, session_id);
  return it->second;
}

NextItem Study::Next(const std::string& session_id) {
  Session& s = MutableSession(session_id);
  NextItem item;
  item.total = s.items.size();
  if (s.state == Phase::kComplete) {
    if (s.done_reported) throw Error(ErrorCode::kSessionComplete, session_id);
    s.done_reported = true;
    item.done = true;
    item.phase = Phase::kComplete;
    item.position = s.items.size();
    return item;
  }
  if (s.served) {
    throw Error(ErrorCode::kPendingRating, "rate " + s.items[s.cursor] + " first");
  }
  s.served = true;
  item.video_id = s.items[s.cursor];
  item.phase = s.state;
  item.position = s.cursor;
  return item;
}

const RatingRecord& Study::Rate(const std::string& session_id, const std::string& video_id,
                                double score, Timestamp now) {
  Session& s = MutableSession(session_id);
  if (s.state == Phase::kComplete) throw Error(ErrorCode::kSessionComplete, session_id);
  if (!std::isfinite(score) || score < 0 || score > 100) {
    throw Error(ErrorCode::kOutOfRange, "score must lie in [0, 100]");
  }
  const bool training = s.cursor < s.training_count;
  const auto rated = s.items.begin() + static_cast<ptrdiff_t>(s.cursor);
  const bool already = rated_.count({s.subject_id, video_id}) > 0 ||
                       std::find(s.items.begin(), rated, video_id) != rated;
  if (already) {
    throw Error(ErrorCode::kDuplicateRating, "subject " + s.subject_id + " video " + video_id);
  }
  if (!s.served || s.items[s.cursor] != video_id) {
    throw Error(ErrorCode::kWrongVideo,
                s.served ? "expected " + s.items[s.cursor] : "no video is being shown");
  }
  RatingRecord r;
  r.subject_id = s.subject_id;
  r.video_id = video_id;
  r.session = s.index;
  r.score = score;
  r.submitted_at = now;
  r.is_training = training;
  if (!training) rated_[{s.subject_id, video_id}] = records_.size();
  records_.push_back(r);
  s.served = false;
  ++s.cursor;
  s.state = PhaseAt(s);
  if (s.state == Phase::kComplete) s.completed_at = now;
  return records_.back();
}

std::string Study::ExportOpinionCsv() const {
  std::string out = "subject_id,video_id,session,score,timestamp\n";
  size_t rows = 0;
  for (const auto& r : records_) {
    if (r.is_training) continue;
    out += r.subject_id + "," + r.video_id + "," + std::to_string(r.session) + "," +
           io::FormatDouble(r.score) + "," + std::to_string(r.submitted_at) + "\n";
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::kEmptyStore, "no non-training ratings");
  return out;
}

json Study::ToJson() const {
  json j;
  j["config"] = {{"playlist_count", config_.playlist_count},
                 {"playlist_size", config_.playlist_size},
                 {"playlists_per_subject", config_.playlists_per_subject},
                 {"group_count", config_.group_count},
                 {"min_session_gap", config_.min_session_gap},
                 {"training_video_ids", config_.training_video_ids},
                 {"shuffle_per_subject", config_.shuffle_per_subject},
                 {"seed", config_.seed}};
  j["playlists"] = playlists_;
  json subjects = json::array();
  for (const auto& [id, s] : subjects_) {
    subjects.push_back({{"id", s.id},
                        {"order", s.order},
                        {"playlists", s.playlists},
                        {"questionnaire", s.questionnaire},
                        {"sessions", s.sessions}});
  }
  j["subjects"] = subjects;
  json sessions = json::array();
  for (const auto& [id, s] : sessions_) {
    json e = {{"id", s.id},
              {"subject_id", s.subject_id},
              {"playlist_id", s.playlist_id},
              {"index", s.index},
              {"items", s.items},
              {"training_count", s.training_count},
              {"cursor", s.cursor},
              {"served", s.served},
              {"done_reported", s.done_reported},
              {"state", PhaseName(s.state)},
              {"started_at", s.started_at}};
    e["completed_at"] = s.completed_at ? json(*s.completed_at) : json(nullptr);
    sessions.push_back(std::move(e));
  }
  j["sessions"] = sessions;
  json records = json::array();
  for (const auto& r : records_) {
    records.push_back({{"subject_id", r.subject_id},
                       {"video_id", r.video_id},
                       {"session", r.session},
                       {"score", r.score},
                       {"submitted_at", r.submitted_at},
                       {"is_training", r.is_training}});
  }
  j["records"] = records;
  j["session_counter"] = session_counter_;
  return j;
}

Study Study::FromJson(const json& j) {
  try {
    StudyConfig c;
    const json& jc = j.at("config");
    c.playlist_count = jc.at("playlist_count");
    c.playlist_size = jc.at("playlist_size");
    c.playlists_per_subject = jc.at("playlists_per_subject");
    c.group_count = jc.at("group_count");
    c.min_session_gap = jc.at("min_session_gap");
    c.training_video_ids = jc.at("training_video_ids").get<std::vector<std::string>>();
    c.shuffle_per_subject = jc.at("shuffle_per_subject");
    c.seed = jc.at("seed");
    Study st(c, j.at("playlists").get<std::vector<Playlist>>());
    for (const auto& e : j.at("subjects")) {
      Subject s;
      s.id = e.at("id");
      s.order = e.at("order");
      s.playlists = e.at("playlists").get<std::vector<size_t>>();
      s.questionnaire = e.at("questionnaire").get<std::map<std::string, std::string>>();
      s.sessions = e.at("sessions").get<std::vector<std::string>>();
      st.subjects_.emplace(s.id, std::move(s));
    }
    for (const auto& e : j.at("sessions")) {
      Session s;
      s.id = e.at("id");
      s.subject_id = e.at("subject_id");
      s.playlist_id = e.at("playlist_id");
      s.index = e.at("index");
      s.items = e.at("items").get<std::vector<std::string>>();
      s.training_count = e.at("training_count");
      s.cursor = e.at("cursor");
      s.served = e.at("served");
      s.done_reported = e.at("done_reported");
      s.state = ParsePhase(e.at("state"));
      s.started_at = e.at("started_at");
      if (!e.at("completed_at").is_null()) s.completed_at = e.at("completed_at").get<Timestamp>();
      st.sessions_.emplace(s.id, std::move(s));
    }
    for (const auto& e : j.at("records")) {
      RatingRecord r;
      r.subject_id = e.at("subject_id");
      r.video_id = e.at("video_id");
      r.session = e.at("session");
      r.score = e.at("score");
      r.submitted_at = e.at("submitted_at");
      r.is_training = e.at("is_training");
      if (!r.is_training) st.rated_[{r.subject_id, r.video_id}] = st.records_.size();
      st.records_.push_back(std::move(r));
    }
    st.session_counter_ = j.at("session_counter");
    return st;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("study state: ") + e.what());
  }
}

json ApplyEvent(Study& study, const json& event) {
  std::string op;
  try {
    op = event.at("op").get<std::string>();
    if (op == "register") {
      std::map<std::string, std::string> q;
      if (event.contains("questionnaire")) {
        q = event.at("questionnaire").get<std::map<std::string, std::string>>();
      }
      const Subject& s = study.RegisterSubject(event.at("subject_id"), std::move(q));
      return {{"subject_id", s.id}, {"playlists", s.playlists}};
    }
    if (op == "start") {
      const Session& s = study.StartSession(event.at("subject_id"), event.at("now"));
      return {{"session_id", s.id},
              {"subject_id", s.subject_id},
              {"session", s.index},
              {"playlist_id", s.playlist_id},
              {"phase", PhaseName(s.state)},
              {"total", s.items.size()}};
    }
    if (op == "next") {
      const NextItem n = study.Next(event.at("session_id"));
      json r = {{"done", n.done},
                {"phase", PhaseName(n.phase)},
                {"position", n.position},
                {"total", n.total}};
      r["video_id"] = n.done ? json(nullptr) : json(n.video_id);
      return r;
    }
    if (op == "rate") {
      const RatingRecord& r = study.Rate(event.at("session_id"), event.at("video_id"),
                                         event.at("score").get<double>(), event.at("now"));
      return {{"subject_id", r.subject_id},
              {"video_id", r.video_id},
              {"session", r.session},
              {"score", r.score},
              {"submitted_at", r.submitted_at},
              {"is_training", r.is_training}};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("event: ") + e.what());
  }
  throw Error(ErrorCode::kSchemaError, "unknown op " + op);
}

namespace {

constexpr const char* kLogName = "log.jsonl";
constexpr const char* kSnapshotName = "snapshot.json";

void WriteSnapshot(const std::filesystem::path& dir, size_t seq, const Study& study,
                   const std::map<std::string, json>& responses) {
  io::WriteFileAtomic(dir / kSnapshotName,
                      json{{"seq", seq}, {"study", study.ToJson()}, {"responses", responses}}.dump());
}

}  // namespace

StudyStore::StudyStore(std::filesystem::path dir, Study study, size_t snapshot_interval)
    : dir_(std::move(dir)),
      study_(std::move(study)),
      snapshot_interval_(snapshot_interval),
      mu_(std::make_unique<std::mutex>()) {}

StudyStore::StudyStore(StudyStore&&) noexcept = default;
StudyStore::~StudyStore() = default;

StudyStore StudyStore::Create(const std::filesystem::path& dir, Study study,
                              size_t snapshot_interval) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  if (std::filesystem::exists(dir / kSnapshotName) || std::filesystem::exists(dir / kLogName)) {
    throw Error(ErrorCode::kIoError, dir.string() + " already holds a study");
  }
  StudyStore store(dir, std::move(study), snapshot_interval);
  store.Snapshot();
  store.log_.open(dir / kLogName, std::ios::app);
  if (!store.log_) throw Error(ErrorCode::kIoError, "cannot open log in " + dir.string());
  return store;
}

StudyStore StudyStore::Open(const std::filesystem::path& dir, size_t snapshot_interval) {
  json snap;
  try {
    snap = json::parse(io::ReadFile(dir / kSnapshotName));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("snapshot: ") + e.what());
  }
  StudyStore store(dir, Study::FromJson(snap.at("study")), snapshot_interval);
  store.seq_ = snap.at("seq");
  for (const auto& [k, v] : snap.at("responses").items()) store.responses_[k] = v;
  if (std::filesystem::exists(dir / kLogName)) {
    const std::string text = io::ReadFile(dir / kLogName);
    size_t start = 0;
    while (start < text.size()) {
      const size_t end = text.find('\n', start);
      if (end == std::string::npos) break;  // torn final line from a crash
      const json line = json::parse(text.substr(start, end - start), nullptr, false);
      start = end + 1;
      if (line.is_discarded()) throw Error(ErrorCode::kSchemaError, "corrupt log line");
      const size_t seq = line.at("seq");
      if (seq <= store.seq_) continue;
      if (seq != store.seq_ + 1) throw Error(ErrorCode::kSchemaError, "log sequence gap");
      const json resp = ApplyEvent(store.study_, line.at("event"));
      if (line.at("event").contains("request_id")) {
        store.responses_[line.at("event").at("request_id").get<std::string>()] = resp;
      }
      store.seq_ = seq;
    }
    std::filesystem::resize_file(dir / kLogName, start);
  }
  store.log_.open(dir / kLogName, std::ios::app);
  if (!store.log_) throw Error(ErrorCode::kIoError, "cannot open log in " + dir.string());
  return store;
}

std::optional<json> StudyStore::Cached(const std::string& request_id) const {
  std::lock_guard<std::mutex> lock(*mu_);
  auto it = responses_.find(request_id);
  if (it == responses_.end()) return std::nullopt;
  return it->second;
}

json StudyStore::Apply(const json& event) {
  std::lock_guard<std::mutex> lock(*mu_);
  return ApplyLocked(event);
}

json StudyStore::ApplyLocked(const json& event) {
  std::string rid;
  if (event.contains("request_id")) {
    if (!event.at("request_id").is_string()) {
      throw Error(ErrorCode::kSchemaError, "request_id must be a string");
    }
    rid = event.at("request_id").get<std::string>();
    auto it = responses_.find(rid);
    if (it != responses_.end()) return it->second;
  }
  const json resp = ApplyEvent(study_, event);
  ++seq_;
  log_ << json{{"seq", seq_}, {"event", event}}.dump() << '\n';
  log_.flush();
  if (!log_) throw Error(ErrorCode::kIoError, "log write failed");
  if (!rid.empty()) responses_[rid] = resp;
  if (snapshot_interval_ > 0 && seq_ % snapshot_interval_ == 0) {
    WriteSnapshot(dir_, seq_, study_, responses_);
  }
  return resp;
}

void StudyStore::Snapshot() {
  std::lock_guard<std::mutex> lock(*mu_);
  WriteSnapshot(dir_, seq_, study_, responses_);
}

}  // namespace vqalab::study
