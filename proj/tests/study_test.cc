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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "httplib.h"
#include "oracles/study_harness.h"
#include "vqalab/error.h"
#include "vqalab/sureal.h"
#include "vqalab/study.h"
#include "vqalab/study_server.h"

namespace vqalab::study {
namespace {

using nlohmann::json;
using testing::FreshDir;
using testing::VideoIds;

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kUsageError;
}

StudyConfig DefaultConfig() {
  StudyConfig c;
  c.training_video_ids = {"t0", "t1", "t2"};
  return c;
}

Study DefaultStudy(uint64_t seed = 3) {
  const StudyConfig c = DefaultConfig();
  return Study(c, BuildPlaylists(VideoIds(600), c, seed));
}

// Serves and rates every remaining item of the session.
void Finish(Study& s, const std::string& sid, Timestamp now) {
  while (true) {
    const NextItem n = s.Next(sid);
    if (n.done) return;
    s.Rate(sid, n.video_id, 50, now);
  }
}

TEST(BuildPlaylists, PartitionsIntoDisjointLists) {
  const auto ids = VideoIds(600);
  const auto lists = BuildPlaylists(ids, DefaultConfig(), 11);
  ASSERT_EQ(lists.size(), 4u);
  std::set<std::string> uni;
  size_t total = 0;
  for (const auto& l : lists) {
    EXPECT_EQ(l.size(), 150u);
    total += l.size();
    uni.insert(l.begin(), l.end());
  }
  EXPECT_EQ(total, 600u);
  EXPECT_EQ(uni, std::set<std::string>(ids.begin(), ids.end()));
}

TEST(BuildPlaylists, RejectsWrongCount) {
  EXPECT_EQ(CodeOf([] { BuildPlaylists(VideoIds(601), DefaultConfig(), 1); }),
            ErrorCode::kSizeMismatch);
}

TEST(BuildPlaylists, SeedDeterminesPartition) {
  EXPECT_EQ(BuildPlaylists(VideoIds(600), DefaultConfig(), 5),
            BuildPlaylists(VideoIds(600), DefaultConfig(), 5));
  EXPECT_NE(BuildPlaylists(VideoIds(600), DefaultConfig(), 5),
            BuildPlaylists(VideoIds(600), DefaultConfig(), 6));
}

std::vector<size_t> Coverage(size_t subjects) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < subjects; ++i) ids.push_back("s" + std::to_string(i));
  std::vector<size_t> cover(4, 0);
  for (const auto& pl : AssignSubjects(ids, DefaultConfig())) {
    EXPECT_EQ(pl.size(), 2u);
    EXPECT_NE(pl[0], pl[1]);
    for (size_t p : pl) ++cover[p];
  }
  return cover;
}

TEST(AssignSubjects, FortyEightSubjectsGiveTwentyFourPerPlaylist) {
  EXPECT_EQ(Coverage(48), std::vector<size_t>(4, 24));
}

TEST(AssignSubjects, FourSubjectsGiveTwoPerPlaylist) {
  EXPECT_EQ(Coverage(4), std::vector<size_t>(4, 2));
}

TEST(AssignSubjects, RoundRobinPairs) {
  const auto a = AssignSubjects({"a", "b", "c", "d"}, DefaultConfig());
  EXPECT_EQ(a[0], (std::vector<size_t>{0, 1}));
  EXPECT_EQ(a[3], (std::vector<size_t>{3, 0}));
}

TEST(AssignSubjects, RejectsIndivisible) {
  EXPECT_EQ(CodeOf([] { AssignSubjects({"a", "b", "c", "d", "e"}, DefaultConfig()); }),
            ErrorCode::kIndivisibleGroups);
}

TEST(Session, FreshSessionServesFirstTrainingVideo) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const Session& sess = s.StartSession("alice", 0);
  EXPECT_EQ(sess.state, Phase::kTraining);
  const NextItem n = s.Next(sess.id);
  EXPECT_FALSE(n.done);
  EXPECT_EQ(n.video_id, "t0");
  EXPECT_EQ(n.phase, Phase::kTraining);
  EXPECT_EQ(n.total, 153u);
}

TEST(Session, NextTwiceWithoutRatingIsPending) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string sid = s.StartSession("alice", 0).id;
  s.Next(sid);
  EXPECT_EQ(CodeOf([&] { s.Next(sid); }), ErrorCode::kPendingRating);
}

TEST(Session, SecondSessionAfterGap) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string first = s.StartSession("alice", 0).id;
  Finish(s, first, 1000);
  EXPECT_EQ(s.GetSession(first).state, Phase::kComplete);
  EXPECT_EQ(*s.GetSession(first).completed_at, 1000);
  const Session& second = s.StartSession("alice", 1000 + 25 * kHour);
  EXPECT_EQ(second.index, 2);
  EXPECT_NE(second.playlist_id, s.GetSession(first).playlist_id);
}

TEST(Session, SecondSessionTooEarlyReportsRemainingWait) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  Finish(s, s.StartSession("alice", 0).id, 0);
  EXPECT_EQ(CodeOf([&] { s.StartSession("alice", 2 * kHour); }), ErrorCode::kGapNotElapsed);
  EXPECT_EQ(s.RemainingWait("alice", 2 * kHour), 22 * kHour);
  EXPECT_EQ(s.RemainingWait("alice", 24 * kHour), 0);
}

TEST(Session, ThirdSessionHasNoPlaylist) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  Finish(s, s.StartSession("alice", 0).id, 0);
  Finish(s, s.StartSession("alice", 30 * kHour).id, 30 * kHour);
  EXPECT_EQ(CodeOf([&] { s.StartSession("alice", 90 * kHour); }),
            ErrorCode::kNoPlaylistRemaining);
}

TEST(Session, OneActiveSessionPerSubject) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  s.StartSession("alice", 0);
  EXPECT_EQ(CodeOf([&] { s.StartSession("alice", 100 * kHour); }),
            ErrorCode::kActiveSessionExists);
}

TEST(Session, UnknownIds) {
  Study s = DefaultStudy();
  EXPECT_EQ(CodeOf([&] { s.StartSession("ghost", 0); }), ErrorCode::kUnknownSubject);
  EXPECT_EQ(CodeOf([&] { s.Next("s99"); }), ErrorCode::kUnknownSession);
  EXPECT_EQ(CodeOf([&] { s.Rate("s99", "v0", 1, 0); }), ErrorCode::kUnknownSession);
  s.RegisterSubject("alice");
  EXPECT_EQ(CodeOf([&] { s.RegisterSubject("alice"); }), ErrorCode::kDuplicateEntry);
}

TEST(Rating, StoresAndAdvances) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string sid = s.StartSession("alice", 0).id;
  const NextItem n = s.Next(sid);
  const RatingRecord& r = s.Rate(sid, n.video_id, 72.5, 42);
  EXPECT_EQ(r.score, 72.5);
  EXPECT_EQ(r.submitted_at, 42);
  EXPECT_TRUE(r.is_training);
  EXPECT_EQ(s.GetSession(sid).cursor, 1u);
  EXPECT_EQ(s.Next(sid).video_id, "t1");
}

TEST(Rating, RejectsOutOfRange) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string sid = s.StartSession("alice", 0).id;
  const std::string v = s.Next(sid).video_id;
  EXPECT_EQ(CodeOf([&] { s.Rate(sid, v, 101, 0); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([&] { s.Rate(sid, v, -0.001, 0); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(CodeOf([&] { s.Rate(sid, v, std::nan(""), 0); }), ErrorCode::kOutOfRange);
  s.Rate(sid, v, 0, 0);
  EXPECT_EQ(s.records().back().score, 0);
}

TEST(Rating, RejectsResubmission) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string sid = s.StartSession("alice", 0).id;
  const std::string v = s.Next(sid).video_id;
  s.Rate(sid, v, 10, 0);
  EXPECT_EQ(CodeOf([&] { s.Rate(sid, v, 20, 0); }), ErrorCode::kDuplicateRating);
}

TEST(Rating, RejectsWrongOrUnservedVideo) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string sid = s.StartSession("alice", 0).id;
  EXPECT_EQ(CodeOf([&] { s.Rate(sid, "t0", 10, 0); }), ErrorCode::kWrongVideo);
  s.Next(sid);
  EXPECT_EQ(CodeOf([&] { s.Rate(sid, "t1", 10, 0); }), ErrorCode::kWrongVideo);
}

TEST(Rating, FullSessionEndsWithDoneMarker) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string sid = s.StartSession("alice", 0).id;
  size_t training = 0, rated = 0;
  while (true) {
    const NextItem n = s.Next(sid);
    if (n.done) break;
    s.Rate(sid, n.video_id, 50, 0);
    (n.phase == Phase::kTraining ? training : rated)++;
  }
  EXPECT_EQ(training, 3u);
  EXPECT_EQ(rated, 150u);
  EXPECT_EQ(s.GetSession(sid).state, Phase::kComplete);
  EXPECT_EQ(CodeOf([&] { s.Next(sid); }), ErrorCode::kSessionComplete);
  EXPECT_EQ(CodeOf([&] { s.Rate(sid, "v0", 1, 0); }), ErrorCode::kSessionComplete);
}

TEST(Rating, PerSubjectShuffleIsAPermutation) {
  StudyConfig c = DefaultConfig();
  c.shuffle_per_subject = true;
  c.seed = 9;
  const auto lists = BuildPlaylists(VideoIds(600), c, 3);
  Study s(c, lists);
  s.RegisterSubject("a");
  s.RegisterSubject("b");
  s.RegisterSubject("c");
  s.RegisterSubject("d");
  s.RegisterSubject("e");
  const Session& sa = s.StartSession("a", 0);
  const Session& se = s.StartSession("e", 0);
  ASSERT_EQ(sa.playlist_id, se.playlist_id);
  std::vector<std::string> a(sa.items.begin() + 3, sa.items.end());
  std::vector<std::string> e(se.items.begin() + 3, se.items.end());
  EXPECT_NE(a, e);
  std::sort(a.begin(), a.end());
  std::sort(e.begin(), e.end());
  auto ref = lists[sa.playlist_id];
  std::sort(ref.begin(), ref.end());
  EXPECT_EQ(a, ref);
  EXPECT_EQ(e, ref);
}

TEST(Export, SmallCompleteStudy) {
  StudyConfig c;
  c.playlist_count = 1;
  c.playlist_size = 3;
  c.playlists_per_subject = 1;
  c.group_count = 1;
  c.training_video_ids = {"t0"};
  Study s(c, BuildPlaylists({"a", "b", "c"}, c, 1));
  for (const std::string subj : {"x", "y"}) {
    s.RegisterSubject(subj);
    Finish(s, s.StartSession(subj, 0).id, 5);
  }
  const std::string csv = s.ExportOpinionCsv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(csv.rfind("subject_id,video_id,session,score,timestamp\n", 0), 0u);
  EXPECT_EQ(csv.find("t0"), std::string::npos);
}

TEST(Export, OnlyTrainingRatingsIsEmpty) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice");
  const std::string sid = s.StartSession("alice", 0).id;
  for (int i = 0; i < 3; ++i) s.Rate(sid, s.Next(sid).video_id, 1, 0);
  EXPECT_EQ(CodeOf([&] { s.ExportOpinionCsv(); }), ErrorCode::kEmptyStore);
}

TEST(Export, FullSimulationFeedsScoreRecovery) {
  const auto sim = testing::SimulateFullStudy(FreshDir("sim48"), 48, 21);
  EXPECT_EQ(sim.http_errors, 0u);
  EXPECT_EQ(sim.rows, 14400u);
  EXPECT_EQ(sim.per_video.size(), 600u);
  for (const auto& [video, n] : sim.per_video) EXPECT_EQ(n, 24u) << video;
  const auto path = FreshDir("sim48_csv");
  std::filesystem::create_directories(path);
  std::ofstream(path / "ratings.csv") << sim.csv;
  const auto records = sureal::ReadOpinionCsv((path / "ratings.csv").string());
  const auto m = sureal::OpinionMatrix::FromRecords(records);
  EXPECT_EQ(m.subjects.size(), 48u);
  EXPECT_EQ(m.videos.size(), 600u);
  EXPECT_EQ(m.entries.size(), 14400u);
}

TEST(Json, RoundTripPreservesState) {
  Study s = DefaultStudy();
  s.RegisterSubject("alice", {{"age", "31"}});
  const std::string sid = s.StartSession("alice", 0).id;
  s.Rate(sid, s.Next(sid).video_id, 33.25, 7);
  s.Next(sid);
  const Study back = Study::FromJson(s.ToJson());
  EXPECT_EQ(back.ToJson(), s.ToJson());
  EXPECT_EQ(back.GetSubject("alice").questionnaire.at("age"), "31");
  EXPECT_EQ(CodeOf([] { Study::FromJson(json{{"config", 1}}); }), ErrorCode::kSchemaError);
}

json Event(const std::string& op, json fields) {
  fields["op"] = op;
  return fields;
}

TEST(Store, RecoversFromSnapshotAndLogTail) {
  const auto dir = FreshDir("store_recover");
  json state;
  std::string csv;
  {
    auto store = StudyStore::Create(dir, DefaultStudy(), 7);
    store.Apply(Event("register", {{"subject_id", "alice"}}));
    store.Apply(Event("start", {{"subject_id", "alice"}, {"now", 0}}));
    for (int i = 0; i < 10; ++i) {
      const json n = store.Apply(Event("next", {{"session_id", "s1"}}));
      store.Apply(Event("rate", {{"session_id", "s1"},
                                 {"video_id", n.at("video_id")},
                                 {"score", 10.5 + i},
                                 {"now", i}}));
    }
    store.Apply(Event("next", {{"session_id", "s1"}}));
    EXPECT_EQ(store.sequence(), 23u);
    state = store.Read([](const Study& s) { return s.ToJson(); });
    csv = store.Read([](const Study& s) { return s.ExportOpinionCsv(); });
  }
  auto reopened = StudyStore::Open(dir, 7);
  EXPECT_EQ(reopened.sequence(), 23u);
  EXPECT_EQ(reopened.Read([](const Study& s) { return s.ToJson(); }), state);
  EXPECT_EQ(reopened.Read([](const Study& s) { return s.ExportOpinionCsv(); }), csv);
  EXPECT_EQ(CodeOf([&] { reopened.Apply(Event("next", {{"session_id", "s1"}})); }),
            ErrorCode::kPendingRating);
}

TEST(Store, IgnoresTornFinalLine) {
  const auto dir = FreshDir("store_torn");
  {
    auto store = StudyStore::Create(dir, DefaultStudy(), 0);
    store.Apply(Event("register", {{"subject_id", "alice"}}));
  }
  std::ofstream(dir / "log.jsonl", std::ios::app) << "{\"seq\":2,\"event\":{\"op\":\"reg";
  auto store = StudyStore::Open(dir, 0);
  EXPECT_EQ(store.sequence(), 1u);
  store.Apply(Event("register", {{"subject_id", "bob"}}));
  auto again = StudyStore::Open(dir, 0);
  EXPECT_EQ(again.Read([](const Study& s) { return s.subjects().size(); }), 2u);
}

TEST(Store, RequestIdsAreIdempotent) {
  auto store = StudyStore::Create(FreshDir("store_idem"), DefaultStudy());
  const json a = store.Apply(Event("register", {{"subject_id", "alice"}, {"request_id", "r1"}}));
  const json b = store.Apply(Event("register", {{"subject_id", "alice"}, {"request_id", "r1"}}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(store.sequence(), 1u);
  EXPECT_EQ(CodeOf([&] { store.Apply(Event("register", {{"subject_id", "alice"}})); }),
            ErrorCode::kDuplicateEntry);
}

TEST(Store, ExportIsPureFunctionOfLog) {
  const auto d1 = FreshDir("store_pure1");
  const auto d2 = FreshDir("store_pure2");
  {
    auto store = StudyStore::Create(d1, DefaultStudy(), 0);
    store.Apply(Event("register", {{"subject_id", "alice"}}));
    store.Apply(Event("start", {{"subject_id", "alice"}, {"now", 0}}));
    for (int i = 0; i < 6; ++i) {
      const json n = store.Apply(Event("next", {{"session_id", "s1"}}));
      store.Apply(Event("rate", {{"session_id", "s1"},
                                 {"video_id", n.at("video_id")},
                                 {"score", 3.0 * i},
                                 {"now", 100 + i}}));
    }
  }
  std::filesystem::create_directories(d2);
  std::filesystem::copy_file(d1 / "snapshot.json", d2 / "snapshot.json");
  std::filesystem::copy_file(d1 / "log.jsonl", d2 / "log.jsonl");
  auto a = StudyStore::Open(d1, 0);
  auto b = StudyStore::Open(d2, 0);
  EXPECT_EQ(a.Read([](const Study& s) { return s.ExportOpinionCsv(); }),
            b.Read([](const Study& s) { return s.ExportOpinionCsv(); }));
}

TEST(Store, RefusesToOverwrite) {
  const auto dir = FreshDir("store_twice");
  StudyStore::Create(dir, DefaultStudy());
  EXPECT_EQ(CodeOf([&] { StudyStore::Create(dir, DefaultStudy()); }), ErrorCode::kIoError);
}

class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    media_ = FreshDir("api_media");
    std::filesystem::create_directories(media_);
    std::ofstream(media_ / "t0.y4m") << "0123456789";
    store_ = std::make_unique<StudyStore>(StudyStore::Create(FreshDir("api"), DefaultStudy()));
    api_ = std::make_unique<StudyApi>(*store_, [this] { return now_; }, media_);
  }

  json Call(const std::string& method, const std::string& path, const json& body,
            int expect_status, const std::string& rid = {}) {
    const HttpResponse r = api_->Handle(method, path, body.is_null() ? "" : body.dump(), rid);
    EXPECT_EQ(r.status, expect_status) << method << " " << path << " " << r.body;
    return json::parse(r.body);
  }

  std::filesystem::path media_;
  Timestamp now_ = 0;
  std::unique_ptr<StudyStore> store_;
  std::unique_ptr<StudyApi> api_;
};

TEST_F(ApiTest, SessionFlow) {
  EXPECT_EQ(Call("GET", "/healthz", nullptr, 200).at("status"), "ok");
  Call("POST", "/subjects", {{"subject_id", "alice"}, {"questionnaire", {{"vision", "20/20"}}}},
       201);
  const json s = Call("POST", "/sessions", {{"subject_id", "alice"}}, 201);
  const std::string sid = s.at("session_id");
  EXPECT_EQ(s.at("phase"), "training");
  const json n = Call("GET", "/sessions/" + sid + "/next", nullptr, 200);
  EXPECT_EQ(n.at("video_id"), "t0");
  EXPECT_EQ(n.at("stream_url"), "/videos/t0/stream");
  EXPECT_EQ(n.at("phase"), "training");
  EXPECT_EQ(Call("GET", "/sessions/" + sid + "/next", nullptr, 409).at("error"), "PendingRating");
  EXPECT_EQ(Call("POST", "/sessions/" + sid + "/ratings", {{"video_id", "t0"}, {"score", 101}},
                 400)
                .at("error"),
            "OutOfRange");
  const json r =
      Call("POST", "/sessions/" + sid + "/ratings", {{"video_id", "t0"}, {"score", 72.5}}, 200);
  EXPECT_EQ(r.at("score"), 72.5);
  EXPECT_EQ(Call("POST", "/sessions/" + sid + "/ratings", {{"video_id", "t0"}, {"score", 1}}, 409)
                .at("error"),
            "DuplicateRating");
  EXPECT_EQ(Call("GET", "/export/opinions.csv", nullptr, 404).at("error"), "EmptyStore");
}

TEST_F(ApiTest, GapReportsRemainingSeconds) {
  Call("POST", "/subjects", {{"subject_id", "alice"}}, 201);
  const std::string sid = Call("POST", "/sessions", {{"subject_id", "alice"}}, 201).at("session_id");
  while (true) {
    const json n = Call("GET", "/sessions/" + sid + "/next", nullptr, 200);
    if (n.at("done").get<bool>()) break;
    Call("POST", "/sessions/" + sid + "/ratings", {{"video_id", n.at("video_id")}, {"score", 5}},
         200);
  }
  now_ = 2 * kHour;
  const json e = Call("POST", "/sessions", {{"subject_id", "alice"}}, 409);
  EXPECT_EQ(e.at("error"), "GapNotElapsed");
  EXPECT_EQ(e.at("remaining_seconds"), 22 * kHour);
  const std::string csv = api_->Handle("GET", "/export/opinions.csv", "").body;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 151);
}

TEST_F(ApiTest, IdempotentMutations) {
  const json a = Call("POST", "/subjects", {{"subject_id", "bob"}}, 201, "k1");
  const json b = Call("POST", "/subjects", {{"subject_id", "bob"}}, 201, "k1");
  EXPECT_EQ(a, b);
  const json s1 = Call("POST", "/sessions", {{"subject_id", "bob"}, {"request_id", "k2"}}, 201);
  const json s2 = Call("POST", "/sessions", {{"subject_id", "bob"}, {"request_id", "k2"}}, 201);
  EXPECT_EQ(s1, s2);
  const std::string sid = s1.at("session_id");
  const json n1 = Call("GET", "/sessions/" + sid + "/next", nullptr, 200, "k3");
  const json n2 = Call("GET", "/sessions/" + sid + "/next", nullptr, 200, "k3");
  EXPECT_EQ(n1, n2);
  const json body = {{"video_id", n1.at("video_id")}, {"score", 40}};
  EXPECT_EQ(Call("POST", "/sessions/" + sid + "/ratings", body, 200, "k4"),
            Call("POST", "/sessions/" + sid + "/ratings", body, 200, "k4"));
  EXPECT_EQ(store_->Read([](const Study& s) { return s.records().size(); }), 1u);
}

TEST_F(ApiTest, MalformedRequests) {
  EXPECT_EQ(Call("POST", "/subjects", nullptr, 400).at("error"), "SchemaError");
  EXPECT_EQ(api_->Handle("POST", "/subjects", "{oops").status, 400);
  EXPECT_EQ(Call("POST", "/subjects", {{"subject_id", 5}}, 400).at("error"), "SchemaError");
  EXPECT_EQ(Call("POST", "/sessions", {{"subject_id", "ghost"}}, 404).at("error"),
            "UnknownSubject");
  EXPECT_EQ(Call("GET", "/sessions/zz/next", nullptr, 404).at("error"), "UnknownSession");
  EXPECT_EQ(Call("DELETE", "/subjects", nullptr, 404).at("error"), "NotFound");
  Call("POST", "/subjects", {{"subject_id", "bob"}}, 201);
  const std::string sid = Call("POST", "/sessions", {{"subject_id", "bob"}}, 201).at("session_id");
  Call("GET", "/sessions/" + sid + "/next", nullptr, 200);
  EXPECT_EQ(Call("POST", "/sessions/" + sid + "/ratings", {{"video_id", "t0"}, {"score", "10"}},
                 400)
                .at("error"),
            "SchemaError");
}

TEST_F(ApiTest, StreamsOnlyStudyVideos) {
  const HttpResponse ok = api_->Handle("GET", "/videos/t0/stream", "");
  EXPECT_EQ(ok.status, 200);
  EXPECT_EQ(ok.body, "0123456789");
  EXPECT_EQ(api_->Handle("GET", "/videos/..%2Fetc/stream", "").status, 404);
  EXPECT_EQ(api_->Handle("GET", "/videos/v0/stream", "").status, 404);
}

TEST_F(ApiTest, ServesOverHttpWithByteRanges) {
  httplib::Server server;
  api_->Mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto reg = client.Post("/subjects", json{{"subject_id", "carol"}}.dump(), "application/json");
  ASSERT_TRUE(reg);
  EXPECT_EQ(reg->status, 201);
  auto part = client.Get("/videos/t0/stream", {{"Range", "bytes=2-5"}});
  ASSERT_TRUE(part);
  EXPECT_EQ(part->status, 206);
  EXPECT_EQ(part->body, "2345");
  server.stop();
  worker.join();
}

TEST(Fuzz, AdversarialRequestsNeverBreakProtocol) {
  const auto rep = testing::FuzzStudy(FreshDir("fuzz"), 20000, 5);
  for (const auto& d : rep.details) ADD_FAILURE() << d;
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_GT(rep.completed_sessions, 5u);
  EXPECT_GT(rep.gap_rejections, 0u);
  EXPECT_GT(rep.replays, 100u);
}

}  // namespace
}  // namespace vqalab::study
