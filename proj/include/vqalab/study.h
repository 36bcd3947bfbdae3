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

// Subjective-study protocol: playlists, round-robin assignment, sessions
// with a minimum gap, single-stimulus delivery and rating capture.

#ifndef VQALAB_STUDY_H_
#define VQALAB_STUDY_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace vqalab::study {

// Seconds since an arbitrary epoch; always supplied by the caller.
using Timestamp = int64_t;

inline constexpr Timestamp kHour = 3600;

struct StudyConfig {
  size_t playlist_count = 4;
  size_t playlist_size = 150;
  size_t playlists_per_subject = 2;
  size_t group_count = 4;
  Timestamp min_session_gap = 24 * kHour;
  std::vector<std::string> training_video_ids;
  bool shuffle_per_subject = false;
  uint64_t seed = 0;

  // Throws kUsageError on inconsistent counts.
  void Validate() const;
};

using Playlist = std::vector<std::string>;

// Seeded random partition into playlist_count lists. Throws kSizeMismatch.
std::vector<Playlist> BuildPlaylists(const std::vector<std::string>& video_ids,
                                     const StudyConfig& config, uint64_t seed);

// Subject i joins group i mod group_count; group g is assigned playlists
// g, g+1, ... (mod playlist_count). Throws kIndivisibleGroups.
std::vector<std::vector<size_t>> AssignSubjects(const std::vector<std::string>& subject_ids,
                                                const StudyConfig& config);

// Playlists for the subject registered at position `index`.
std::vector<size_t> PlaylistsForIndex(size_t index, const StudyConfig& config);

enum class Phase { kTraining, kRating, kComplete };

std::string PhaseName(Phase p);

struct Session {
  std::string id;
  std::string subject_id;
  size_t playlist_id = 0;
  int index = 1;  // 1-based session number of the subject
  std::vector<std::string> items;  // training videos followed by the playlist
  size_t training_count = 0;
  size_t cursor = 0;
  bool served = false;  // items[cursor] delivered and awaiting its rating
  bool done_reported = false;
  Phase state = Phase::kTraining;
  Timestamp started_at = 0;
  std::optional<Timestamp> completed_at;
};

struct RatingRecord {
  std::string subject_id;
  std::string video_id;
  int session = 1;
  double score = 0;
  Timestamp submitted_at = 0;
  bool is_training = false;
};

struct Subject {
  std::string id;
  size_t order = 0;
  std::vector<size_t> playlists;
  std::map<std::string, std::string> questionnaire;
  std::vector<std::string> sessions;
};

struct NextItem {
  bool done = false;
  std::string video_id;
  Phase phase = Phase::kTraining;
  size_t position = 0;  // 0-based index within the session
  size_t total = 0;
};

// In-memory protocol state machine. Not thread-safe; see StudyStore.
class Study {
 public:
  Study(StudyConfig config, std::vector<Playlist> playlists);

  const StudyConfig& config() const { return config_; }
  const std::vector<Playlist>& playlists() const { return playlists_; }

  // Throws kDuplicateEntry.
  const Subject& RegisterSubject(const std::string& subject_id,
                                 std::map<std::string, std::string> questionnaire = {});

  // Throws kUnknownSubject, kActiveSessionExists, kNoPlaylistRemaining,
  // kGapNotElapsed.
  const Session& StartSession(const std::string& subject_id, Timestamp now);

  // Seconds until the subject may start another session; 0 when allowed.
  Timestamp RemainingWait(const std::string& subject_id, Timestamp now) const;

  // Serves the cursor item. Throws kUnknownSession, kPendingRating,
  // kSessionComplete.
  NextItem Next(const std::string& session_id);

  // Throws kUnknownSession, kSessionComplete, kOutOfRange, kDuplicateRating,
  // kWrongVideo.
  const RatingRecord& Rate(const std::string& session_id, const std::string& video_id,
                           double score, Timestamp now);

  const Session& GetSession(const std::string& session_id) const;
  const Subject& GetSubject(const std::string& subject_id) const;
  const std::map<std::string, Subject>& subjects() const { return subjects_; }
  const std::map<std::string, Session>& sessions() const { return sessions_; }
  const std::vector<RatingRecord>& records() const { return records_; }

  // subject_id,video_id,session,score,timestamp without training rows.
  // Throws kEmptyStore.
  std::string ExportOpinionCsv() const;

  nlohmann::json ToJson() const;
  static Study FromJson(const nlohmann::json& j);

 private:
  Session& MutableSession(const std::string& session_id);

  StudyConfig config_;
  std::vector<Playlist> playlists_;
  std::map<std::string, Subject> subjects_;
  std::map<std::string, Session> sessions_;
  std::vector<RatingRecord> records_;
  std::map<std::pair<std::string, std::string>, size_t> rated_;  // non-training
  size_t session_counter_ = 0;
};

// Durable wrapper: every successful mutation is appended to a JSONL log
// before it is acknowledged; a snapshot is written every
// `snapshot_interval` events. Open() recovers from snapshot plus log tail.
class StudyStore {
 public:
  static StudyStore Create(const std::filesystem::path& dir, Study study,
                           size_t snapshot_interval = 1000);
  static StudyStore Open(const std::filesystem::path& dir, size_t snapshot_interval = 1000);

  StudyStore(StudyStore&&) noexcept;
  ~StudyStore();

  // Applies one event (see docs/formats.md) and persists it. The event's
  // request id, when present, maps to the stored response for replays.
  nlohmann::json Apply(const nlohmann::json& event);

  // Cached response for a previously applied request id.
  std::optional<nlohmann::json> Cached(const std::string& request_id) const;

  void Snapshot();

  // Runs `fn` on the state under the writer lock.
  template <typename Fn>
  auto Read(Fn&& fn) const {
    std::lock_guard<std::mutex> lock(*mu_);
    return fn(study_);
  }

  size_t sequence() const { return seq_; }

 private:
  StudyStore(std::filesystem::path dir, Study study, size_t snapshot_interval);
  nlohmann::json ApplyLocked(const nlohmann::json& event);

  std::filesystem::path dir_;
  Study study_;
  size_t snapshot_interval_;
  size_t seq_ = 0;
  std::map<std::string, nlohmann::json> responses_;
  std::unique_ptr<std::mutex> mu_;
  std::ofstream log_;
};

// Applies an event to a bare Study and returns the response body.
nlohmann::json ApplyEvent(Study& study, const nlohmann::json& event);

}  // namespace vqalab::study

#endif  // VQALAB_STUDY_H_
