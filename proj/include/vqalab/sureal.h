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

#ifndef VQALAB_SUREAL_H_
#define VQALAB_SUREAL_H_

#include <cstdint>
#include <string>
#include <vector>

namespace vqalab::sureal {

// One row of the opinion CSV.
struct RatingRecord {
  std::string subject_id;
  std::string video_id;
  int session = 1;
  double score = 0;
  std::string timestamp;
};

struct OpinionEntry {
  size_t subject = 0;
  size_t video = 0;
  int session = 1;
  double score = 0;
};

// Sparse subject x video matrix with at most one entry per pair.
struct OpinionMatrix {
  std::vector<std::string> subjects;
  std::vector<std::string> videos;
  std::vector<OpinionEntry> entries;

  // Ids are indexed in order of first appearance. Throws kDuplicateEntry.
  static OpinionMatrix FromRecords(const std::vector<RatingRecord>& records);
  void Validate() const;
};

std::vector<RatingRecord> ReadOpinionCsv(const std::string& path);

struct SessionStats {
  size_t subject = 0;
  int session = 1;
  double mean = 0;
  double std = 0;
  size_t count = 0;
};

struct ZScoreEntry {
  size_t subject = 0;
  size_t video = 0;
  int session = 1;
  double z = 0;
  double z_prime = 0;
};

struct ZScoreMatrix {
  std::vector<std::string> subjects;
  std::vector<std::string> videos;
  std::vector<ZScoreEntry> entries;
  std::vector<SessionStats> sessions;
  bool rescaled = false;
  size_t clamped = 0;
};

// Per subject-session z-scores with the sample (n-1) standard deviation.
// Throws kDegenerateSession naming the subject and session.
ZScoreMatrix NormalizeZScores(const OpinionMatrix& m);

// z' = 10 (z + 5) clamped to [0, 100]; counts clamped values.
ZScoreMatrix RescaleScores(const ZScoreMatrix& z);

struct MosResult {
  std::vector<double> mos;
  std::vector<double> std;
  std::vector<size_t> count;
};

// Mean of rescaled scores per video. Throws kUnratedVideo.
MosResult ComputeMos(const ZScoreMatrix& z);

// Opinion matrix over the rescaled scores, the input scale of SolveSureal.
OpinionMatrix RescaledOpinions(const ZScoreMatrix& z);

struct SurealOptions {
  double tol = 1e-6;
  int max_iter = 500;
};

struct SurealParams {
  std::vector<double> x;  // per-video quality
  std::vector<double> b;  // per-subject bias, mean zero
  std::vector<double> v;  // per-subject inconsistency
  std::vector<double> a;  // per-video ambiguity
  double loglik = 0;
  std::vector<double> loglik_trace;  // after each sweep, starting at the init
  int iterations = 0;
  bool converged = false;
};

inline constexpr double kVarianceFloor = 1e-4;

// Maximum-likelihood fit of score = x_e + b_s + N(0, v_s^2 + a_e^2) by
// coordinate ascent. Throws kInsufficientData when a video has fewer than
// two raters or a subject fewer than two ratings. Non-convergence is
// reported through `converged`.
SurealParams SolveSureal(const OpinionMatrix& m, const SurealOptions& options = {});

double LogLikelihood(const OpinionMatrix& m, const SurealParams& p);

struct ConsistencyReport {
  double inter_plcc = 0;
  double inter_srocc = 0;
  double intra_plcc = 0;
  double intra_srocc = 0;
};

ConsistencyReport ConsistencyAnalysis(const ZScoreMatrix& z, int splits, uint64_t seed);

// Reporting only: flags subjects whose inconsistency or bias sits more than
// k scaled MADs from the panel median.
std::vector<bool> FlagOutlierSubjects(const SurealParams& p, double k = 2.5);

}  // namespace vqalab::sureal

#endif  // VQALAB_SUREAL_H_
