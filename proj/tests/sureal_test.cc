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

#include "vqalab/sureal.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles/sureal_sim.h"
#include "vqalab/error.h"
#include "vqalab/metrics.h"

namespace vqalab::sureal {
namespace {

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kUsageError;
}

OpinionMatrix Dense(const std::vector<std::vector<double>>& scores) {
  OpinionMatrix m;
  for (size_t s = 0; s < scores.size(); ++s) m.subjects.push_back("s" + std::to_string(s));
  for (size_t j = 0; j < scores[0].size(); ++j) m.videos.push_back("v" + std::to_string(j));
  for (size_t s = 0; s < scores.size(); ++s)
    for (size_t j = 0; j < scores[s].size(); ++j) m.entries.push_back({s, j, 1, scores[s][j]});
  return m;
}

double MeanAbsErrorCentered(const std::vector<double>& est, const std::vector<double>& truth) {
  double mean = 0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double mae = 0;
  for (size_t i = 0; i < est.size(); ++i) mae += std::abs(est[i] - (truth[i] - mean));
  return mae / static_cast<double>(est.size());
}

TEST(NormalizeZScores, TwoPointSession) {
  const ZScoreMatrix z = NormalizeZScores(Dense({{40, 60}}));
  EXPECT_NEAR(z.entries[0].z, -0.70710678, 1e-8);
  EXPECT_NEAR(z.entries[1].z, 0.70710678, 1e-8);
  EXPECT_NEAR(z.sessions[0].std, 14.1421356, 1e-7);
}

TEST(NormalizeZScores, ConstantSubjectIsDegenerate) {
  try {
    NormalizeZScores(Dense({{10, 20, 30}, {50, 50, 50}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSession);
    EXPECT_NE(std::string(e.what()).find("s1 session 1"), std::string::npos);
  }
  EXPECT_EQ(CodeOf([] { NormalizeZScores(Dense({{10}, {20}})); }),
            ErrorCode::kDegenerateSession);
}

TEST(NormalizeZScores, SessionMomentsAndLocationInvariance) {
  const oracle::Panel p = oracle::SimulatePanel({.videos = 30, .subjects = 5}, 3);
  const ZScoreMatrix z = NormalizeZScores(p.matrix);
  for (const SessionStats& st : z.sessions) {
    double mean = 0, ss = 0;
    size_t n = 0;
    for (const ZScoreEntry& e : z.entries)
      if (e.subject == st.subject && e.session == st.session) {
        mean += e.z;
        ++n;
      }
    mean /= n;
    for (const ZScoreEntry& e : z.entries)
      if (e.subject == st.subject && e.session == st.session) ss += (e.z - mean) * (e.z - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(ss / (n - 1)), 1.0, 1e-9);
  }
  OpinionMatrix shifted = p.matrix;
  for (auto& e : shifted.entries)
    if (e.subject == 2) e.score += 17.5;
  const ZScoreMatrix z2 = NormalizeZScores(shifted);
  for (size_t i = 0; i < z.entries.size(); ++i) EXPECT_NEAR(z.entries[i].z, z2.entries[i].z, 1e-12);
}

TEST(RescaleScores, MappingAndClamp) {
  ZScoreMatrix z;
  z.subjects = {"s"};
  z.videos = {"a", "b", "c", "d"};
  z.entries = {{0, 0, 1, 0.0, 0}, {0, 1, 1, -5.0, 0}, {0, 2, 1, 5.0, 0}, {0, 3, 1, 6.0, 0}};
  const ZScoreMatrix r = RescaleScores(z);
  EXPECT_EQ(r.entries[0].z_prime, 50.0);
  EXPECT_EQ(r.entries[1].z_prime, 0.0);
  EXPECT_EQ(r.entries[2].z_prime, 100.0);
  EXPECT_EQ(r.entries[3].z_prime, 100.0);
  EXPECT_EQ(r.clamped, 1u);
}

ZScoreMatrix Rescaled(const std::vector<ZScoreEntry>& entries, size_t subjects, size_t videos) {
  ZScoreMatrix z;
  for (size_t s = 0; s < subjects; ++s) z.subjects.push_back("s" + std::to_string(s));
  for (size_t j = 0; j < videos; ++j) z.videos.push_back("v" + std::to_string(j));
  z.entries = entries;
  z.rescaled = true;
  return z;
}

TEST(ComputeMos, SmallCases) {
  EXPECT_EQ(ComputeMos(Rescaled({{0, 0, 1, 0, 73}}, 1, 1)).mos[0], 73.0);
  const MosResult three =
      ComputeMos(Rescaled({{0, 0, 1, 0, 40}, {1, 0, 1, 0, 50}, {2, 0, 1, 0, 60}}, 3, 1));
  EXPECT_EQ(three.mos[0], 50.0);
  EXPECT_EQ(three.count[0], 3u);
  EXPECT_NEAR(three.std[0], 10.0, 1e-12);
  // Sparse 3x3: v0 rated by s0, s1; v1 by s1, s2; v2 by s0 only.
  const MosResult sparse = ComputeMos(Rescaled(
      {{0, 0, 1, 0, 20}, {1, 0, 1, 0, 31}, {1, 1, 1, 0, 64}, {2, 1, 1, 0, 70}, {0, 2, 1, 0, 55}},
      3, 3));
  EXPECT_EQ(sparse.mos, (std::vector<double>{25.5, 67.0, 55.0}));
  EXPECT_EQ(sparse.count, (std::vector<size_t>{2, 2, 1}));
  EXPECT_EQ(CodeOf([] { ComputeMos(Rescaled({{0, 0, 1, 0, 1}}, 1, 2)); }),
            ErrorCode::kUnratedVideo);
}

TEST(ComputeMos, SharedSessionMomentsGiveAffineRawMeans) {
  const std::vector<double> base{12, 30, 47, 51, 66, 70, 81, 93};
  std::vector<std::vector<double>> scores;
  std::mt19937_64 g(4);
  for (int s = 0; s < 5; ++s) {
    std::vector<double> row = base;
    std::shuffle(row.begin(), row.end(), g);
    scores.push_back(row);
  }
  double mu = 0, ss = 0;
  for (double v : base) mu += v;
  mu /= base.size();
  for (double v : base) ss += (v - mu) * (v - mu);
  const double sd = std::sqrt(ss / (base.size() - 1));
  const MosResult mos = ComputeMos(RescaleScores(NormalizeZScores(Dense(scores))));
  for (size_t j = 0; j < base.size(); ++j) {
    double raw = 0;
    for (const auto& row : scores) raw += row[j];
    raw /= scores.size();
    EXPECT_NEAR(mos.mos[j], 10.0 * ((raw - mu) / sd + 5.0), 1e-12);
  }
}

TEST(SolveSureal, RecoversSimulatedPanel) {
  for (uint64_t seed : {1, 2, 3}) {
    const oracle::Panel p = oracle::SimulatePanel({}, seed);
    const SurealParams r = SolveSureal(p.matrix);
    EXPECT_TRUE(r.converged);
    EXPECT_GE(eval::Plcc(r.x, p.truth.x), 0.98);
    EXPECT_LE(MeanAbsErrorCentered(r.b, p.truth.b), 0.3);
    for (size_t i = 1; i < r.loglik_trace.size(); ++i) {
      EXPECT_GE(r.loglik_trace[i], r.loglik_trace[i - 1] - 1e-9);
    }
    double mean_b = 0;
    for (double b : r.b) mean_b += b;
    EXPECT_NEAR(mean_b / r.b.size(), 0.0, 1e-12);
    for (double v : r.v) EXPECT_GE(v, kVarianceFloor);
    for (double a : r.a) EXPECT_GE(a, kVarianceFloor);
    EXPECT_NEAR(r.loglik, LogLikelihood(p.matrix, r), 1e-9);
  }
}

TEST(SolveSureal, NoiselessUnbiasedPanelAverages) {
  std::vector<std::vector<double>> scores(6, std::vector<double>{31.5, 44.0, 58.25, 70.0});
  const OpinionMatrix m = Dense(scores);
  const SurealParams r = SolveSureal(m);
  const std::vector<double> expected{31.5, 44.0, 58.25, 70.0};
  for (size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(r.x[j], expected[j], 1e-6);
}

TEST(SolveSureal, OffsetSubjectOnDensePanel) {
  oracle::Panel p = oracle::SimulatePanel(
      {.b_sd = 0.0, .v_lo = 0.5, .v_hi = 0.5, .a = 0.5}, 9);
  for (auto& e : p.matrix.entries)
    if (e.subject == 7) e.score += 10.0;
  const SurealParams r = SolveSureal(p.matrix);
  // mean(b) = 0 spreads the offset: 10 (1 - 1/N) on the subject, -10/N elsewhere.
  const double n = static_cast<double>(r.b.size());
  for (size_t s = 0; s < r.b.size(); ++s) {
    EXPECT_NEAR(r.b[s], s == 7 ? 10.0 - 10.0 / n : -10.0 / n, 0.2) << s;
  }
  EXPECT_NEAR(r.b[7] - r.b[0], 10.0, 0.2);
}

TEST(SolveSureal, ConstantShiftOfOneSubject) {
  const oracle::Panel p = oracle::SimulatePanel({}, 11);
  OpinionMatrix shifted = p.matrix;
  const double c = 10.0;
  for (auto& e : shifted.entries)
    if (e.subject == 3) e.score += c;
  const SurealParams r0 = SolveSureal(p.matrix), r1 = SolveSureal(shifted);
  // With mean(b) pinned to zero, the shift splits as c(1 - 1/N) on the
  // subject, -c/N on the others and +c/N on every video.
  const double n = static_cast<double>(r0.b.size());
  for (size_t s = 0; s < r0.b.size(); ++s) {
    EXPECT_NEAR(r1.b[s] - r0.b[s], s == 3 ? c - c / n : -c / n, 0.1);
  }
  for (size_t j = 0; j < r0.x.size(); ++j) EXPECT_NEAR(r1.x[j] - r0.x[j], c / n, 0.1);
}

TEST(SolveSureal, AgreesWithNaiveMos) {
  const oracle::Panel p = oracle::SimulatePanel({}, 21);
  const ZScoreMatrix z = RescaleScores(NormalizeZScores(p.matrix));
  const SurealParams r = SolveSureal(RescaledOpinions(z));
  EXPECT_GE(eval::Plcc(r.x, ComputeMos(z).mos), 0.99);
}

TEST(SolveSureal, ErrorsAndNonConvergence) {
  OpinionMatrix m = Dense({{10, 20}, {30, 40}});
  m.entries.pop_back();
  EXPECT_EQ(CodeOf([&] { SolveSureal(m); }), ErrorCode::kInsufficientData);
  const oracle::Panel p = oracle::SimulatePanel({.videos = 20, .subjects = 6}, 2);
  const SurealParams r = SolveSureal(p.matrix, {.tol = 1e-12, .max_iter = 2});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.x.size(), 20u);
  OpinionMatrix dup = Dense({{10, 20}, {30, 40}});
  dup.entries.push_back(dup.entries[0]);
  EXPECT_EQ(CodeOf([&] { SolveSureal(dup); }), ErrorCode::kDuplicateEntry);
}

TEST(Consistency, IdenticalSubjectsAreFullyConsistent) {
  std::vector<std::vector<double>> scores(4, std::vector<double>{10, 35, 20, 80, 55, 60});
  const ZScoreMatrix z = RescaleScores(NormalizeZScores(Dense(scores)));
  const ConsistencyReport r = ConsistencyAnalysis(z, 20, 1);
  EXPECT_NEAR(r.inter_plcc, 1.0, 1e-12);
  EXPECT_NEAR(r.inter_srocc, 1.0, 1e-12);
  EXPECT_NEAR(r.intra_plcc, 1.0, 1e-12);
  EXPECT_NEAR(r.intra_srocc, 1.0, 1e-12);
}

TEST(Consistency, PureNoisePanelHasNoAgreement) {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<std::vector<double>> scores(10, std::vector<double>(600));
  for (auto& row : scores)
    for (auto& v : row) v = u(g);
  const ZScoreMatrix z = RescaleScores(NormalizeZScores(Dense(scores)));
  const ConsistencyReport r = ConsistencyAnalysis(z, 100, 3);
  EXPECT_NEAR(r.inter_plcc, 0.0, 0.1);
  const ConsistencyReport again = ConsistencyAnalysis(z, 100, 3);
  EXPECT_EQ(r.inter_plcc, again.inter_plcc);
  EXPECT_EQ(r.inter_srocc, again.inter_srocc);
  EXPECT_EQ(r.intra_plcc, again.intra_plcc);
  EXPECT_EQ(r.intra_srocc, again.intra_srocc);
}

TEST(FlagOutliers, HomogeneousPanelHasNoFlags) {
  std::vector<std::vector<double>> scores(24, std::vector<double>{22, 41, 35, 67, 58, 73});
  const std::vector<bool> flags = FlagOutlierSubjects(SolveSureal(Dense(scores)));
  EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 0);
}

TEST(FlagOutliers, RandomAnswerSubjectIsFlagged) {
  oracle::Panel p = oracle::SimulatePanel({}, 32);
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0, 100);
  for (auto& e : p.matrix.entries)
    if (e.subject == 17) e.score = u(g);
  const std::vector<bool> flags = FlagOutlierSubjects(SolveSureal(p.matrix));
  EXPECT_TRUE(flags[17]);
  EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 1);
}

TEST(FlagOutliers, SingleSubjectPanel) {
  SurealParams p;
  p.b = {3.0};
  p.v = {9.0};
  EXPECT_EQ(FlagOutlierSubjects(p), std::vector<bool>{false});
}

}  // namespace
}  // namespace vqalab::sureal
