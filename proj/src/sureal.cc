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

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

#include "vqalab/csv.h"
#include "vqalab/error.h"
#include "vqalab/metrics.h"
#include "vqalab/random.h"

namespace vqalab::sureal {
namespace {

size_t Intern(std::unordered_map<std::string, size_t>& index,
              std::vector<std::string>& names, const std::string& id) {
  auto [it, inserted] = index.emplace(id, names.size());
  if (inserted) names.push_back(id);
  return it->second;
}

struct Cell {
  size_t other;
  double score;
};

struct Layout {
  std::vector<std::vector<Cell>> by_video;    // other = subject
  std::vector<std::vector<Cell>> by_subject;  // other = video
};

Layout BuildLayout(const OpinionMatrix& m) {
  Layout l;
  l.by_video.resize(m.videos.size());
  l.by_subject.resize(m.subjects.size());
  for (const OpinionEntry& e : m.entries) {
    l.by_video[e.video].push_back({e.subject, e.score});
    l.by_subject[e.subject].push_back({e.video, e.score});
  }
  return l;
}

// Maximizes sum_i -log(t + c_i)/2 - r2_i / (2 (t + c_i)) over t >= floor by
// safeguarded Newton steps; never returns a worse point than `t`.
double MaximizeVariance(double t, const std::vector<double>& c,
                        const std::vector<double>& r2, double floor) {
  auto value = [&](double u) {
    double f = 0;
    for (size_t i = 0; i < c.size(); ++i) {
      f -= 0.5 * std::log(u + c[i]) + 0.5 * r2[i] / (u + c[i]);
    }
    return f;
  };
  t = std::max(t, floor);
  double f = value(t);
  for (int iter = 0; iter < 100; ++iter) {
    double g = 0, h = 0;
    for (size_t i = 0; i < c.size(); ++i) {
      const double s = t + c[i];
      g += -0.5 / s + 0.5 * r2[i] / (s * s);
      h += 0.5 / (s * s) - r2[i] / (s * s * s);
    }
    double step = h < 0 ? -g / h : (g > 0 ? t : -0.5 * (t - floor));
    if (step == 0) break;
    bool improved = false;
    for (int k = 0; k < 60; ++k) {
      const double cand = std::max(floor, t + step);
      const double fc = value(cand);
      if (fc > f) {
        const double moved = std::abs(cand - t);
        t = cand;
        f = fc;
        improved = moved > 1e-14 * std::max(1.0, t);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return t;
}

double MedianAbsDeviation(const std::vector<double>& x, double median) {
  std::vector<double> d(x.size());
  for (size_t i = 0; i < x.size(); ++i) d[i] = std::abs(x[i] - median);
  return 1.4826 * eval::Median(d);
}

}  // namespace

OpinionMatrix OpinionMatrix::FromRecords(const std::vector<RatingRecord>& records) {
  OpinionMatrix m;
  std::unordered_map<std::string, size_t> subjects, videos;
  std::map<std::pair<size_t, size_t>, bool> seen;
  for (const RatingRecord& r : records) {
    const size_t s = Intern(subjects, m.subjects, r.subject_id);
    const size_t v = Intern(videos, m.videos, r.video_id);
    if (!seen.emplace(std::make_pair(s, v), true).second) {
      throw Error(ErrorCode::kDuplicateEntry,
                  "subject " + r.subject_id + " rated " + r.video_id + " twice");
    }
    m.entries.push_back({s, v, r.session, r.score});
  }
  return m;
}

void OpinionMatrix::Validate() const {
  std::map<std::pair<size_t, size_t>, bool> seen;
  for (const OpinionEntry& e : entries) {
    if (e.subject >= subjects.size() || e.video >= videos.size()) {
      throw Error(ErrorCode::kSchemaError, "entry index out of range");
    }
    if (!seen.emplace(std::make_pair(e.subject, e.video), true).second) {
      throw Error(ErrorCode::kDuplicateEntry, "subject " + subjects[e.subject] +
                                                  " rated " + videos[e.video] + " twice");
    }
  }
}

std::vector<RatingRecord> ReadOpinionCsv(const std::string& path) {
  const io::CsvTable t = io::ReadCsv(path);
  const size_t cs = t.Column("subject_id"), cv = t.Column("video_id"),
               ck = t.Column("session"), cx = t.Column("score");
  const size_t ct = t.Column("timestamp");
  std::vector<RatingRecord> out;
  for (const auto& row : t.rows) {
    RatingRecord r;
    r.subject_id = row[cs];
    r.video_id = row[cv];
    r.session = static_cast<int>(io::ParseInt(row[ck]));
    r.score = io::ParseDouble(row[cx]);
    r.timestamp = row[ct];
    out.push_back(std::move(r));
  }
  return out;
}

ZScoreMatrix NormalizeZScores(const OpinionMatrix& m) {
  m.Validate();
  std::map<std::pair<size_t, int>, std::vector<size_t>> groups;
  for (size_t i = 0; i < m.entries.size(); ++i) {
    groups[{m.entries[i].subject, m.entries[i].session}].push_back(i);
  }
  ZScoreMatrix z;
  z.subjects = m.subjects;
  z.videos = m.videos;
  z.entries.resize(m.entries.size());
  for (const auto& [key, idx] : groups) {
    const std::string where =
        "subject " + m.subjects[key.first] + " session " + std::to_string(key.second);
    if (idx.size() < 2) {
      throw Error(ErrorCode::kDegenerateSession, where + " has fewer than 2 ratings");
    }
    double mean = 0;
    for (size_t i : idx) mean += m.entries[i].score;
    mean /= static_cast<double>(idx.size());
    double ss = 0;
    for (size_t i : idx) ss += (m.entries[i].score - mean) * (m.entries[i].score - mean);
    const double sd = std::sqrt(ss / static_cast<double>(idx.size() - 1));
    if (!(sd > 0)) {
      throw Error(ErrorCode::kDegenerateSession, where + " has zero spread");
    }
    z.sessions.push_back({key.first, key.second, mean, sd, idx.size()});
    for (size_t i : idx) {
      const OpinionEntry& e = m.entries[i];
      z.entries[i] = {e.subject, e.video, e.session, (e.score - mean) / sd, 0.0};
    }
  }
  return z;
}

ZScoreMatrix RescaleScores(const ZScoreMatrix& z) {
  ZScoreMatrix out = z;
  out.clamped = 0;
  for (ZScoreEntry& e : out.entries) {
    const double v = 10.0 * (e.z + 5.0);
    e.z_prime = std::clamp(v, 0.0, 100.0);
    if (e.z_prime != v) ++out.clamped;
  }
  out.rescaled = true;
  return out;
}

MosResult ComputeMos(const ZScoreMatrix& z) {
  if (!z.rescaled) throw Error(ErrorCode::kUsageError, "MOS needs rescaled scores");
  const size_t n = z.videos.size();
  MosResult r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
              std::vector<size_t>(n, 0)};
  for (const ZScoreEntry& e : z.entries) {
    r.mos[e.video] += e.z_prime;
    ++r.count[e.video];
  }
  for (size_t j = 0; j < n; ++j) {
    if (r.count[j] == 0) throw Error(ErrorCode::kUnratedVideo, z.videos[j] + " has no ratings");
    r.mos[j] /= static_cast<double>(r.count[j]);
  }
  for (const ZScoreEntry& e : z.entries) {
    r.std[e.video] += (e.z_prime - r.mos[e.video]) * (e.z_prime - r.mos[e.video]);
  }
  for (size_t j = 0; j < n; ++j) {
    r.std[j] = r.count[j] > 1 ? std::sqrt(r.std[j] / static_cast<double>(r.count[j] - 1)) : 0.0;
  }
  return r;
}

OpinionMatrix RescaledOpinions(const ZScoreMatrix& z) {
  if (!z.rescaled) throw Error(ErrorCode::kUsageError, "scores are not rescaled");
  OpinionMatrix m;
  m.subjects = z.subjects;
  m.videos = z.videos;
  for (const ZScoreEntry& e : z.entries) {
    m.entries.push_back({e.subject, e.video, e.session, e.z_prime});
  }
  return m;
}

double LogLikelihood(const OpinionMatrix& m, const SurealParams& p) {
  double l = 0;
  for (const OpinionEntry& e : m.entries) {
    const double var = p.v[e.subject] * p.v[e.subject] + p.a[e.video] * p.a[e.video];
    const double r = e.score - p.x[e.video] - p.b[e.subject];
    l -= 0.5 * std::log(2 * std::numbers::pi * var) + 0.5 * r * r / var;
  }
  return l;
}

SurealParams SolveSureal(const OpinionMatrix& m, const SurealOptions& options) {
  m.Validate();
  const Layout l = BuildLayout(m);
  for (size_t j = 0; j < l.by_video.size(); ++j) {
    if (l.by_video[j].size() < 2) {
      throw Error(ErrorCode::kInsufficientData, m.videos[j] + " has fewer than 2 raters");
    }
  }
  for (size_t s = 0; s < l.by_subject.size(); ++s) {
    if (l.by_subject[s].size() < 2) {
      throw Error(ErrorCode::kInsufficientData,
                  m.subjects[s] + " has fewer than 2 ratings");
    }
  }
  const size_t nv = m.videos.size(), ns = m.subjects.size();
  const double floor2 = kVarianceFloor * kVarianceFloor;

  SurealParams p;
  p.x.assign(nv, 0.0);
  p.b.assign(ns, 0.0);
  p.v.assign(ns, 1.0);
  p.a.assign(nv, kVarianceFloor);
  for (size_t j = 0; j < nv; ++j) {
    for (const Cell& c : l.by_video[j]) p.x[j] += c.score;
    p.x[j] /= static_cast<double>(l.by_video[j].size());
  }
  for (size_t s = 0; s < ns; ++s) {
    double sum = 0, sq = 0;
    for (const Cell& c : l.by_subject[s]) sum += c.score - p.x[c.other];
    p.b[s] = sum / static_cast<double>(l.by_subject[s].size());
    for (const Cell& c : l.by_subject[s]) {
      const double r = c.score - p.x[c.other] - p.b[s];
      sq += r * r;
    }
    p.v[s] = std::max(kVarianceFloor, std::sqrt(sq / static_cast<double>(l.by_subject[s].size())));
  }
  auto center = [&] {
    double mean_b = 0;
    for (double b : p.b) mean_b += b;
    mean_b /= static_cast<double>(ns);
    for (double& b : p.b) b -= mean_b;
    for (double& x : p.x) x += mean_b;
  };
  center();
  p.loglik = LogLikelihood(m, p);
  p.loglik_trace.push_back(p.loglik);

  SurealParams best = p;
  std::vector<double> c, r2;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const SurealParams prev = p;
    for (size_t j = 0; j < nv; ++j) {
      double num = 0, den = 0;
      for (const Cell& cell : l.by_video[j]) {
        const double w = 1.0 / (p.v[cell.other] * p.v[cell.other] + p.a[j] * p.a[j]);
        num += w * (cell.score - p.b[cell.other]);
        den += w;
      }
      p.x[j] = num / den;
    }
    for (size_t s = 0; s < ns; ++s) {
      double num = 0, den = 0;
      for (const Cell& cell : l.by_subject[s]) {
        const double w = 1.0 / (p.v[s] * p.v[s] + p.a[cell.other] * p.a[cell.other]);
        num += w * (cell.score - p.x[cell.other]);
        den += w;
      }
      p.b[s] = num / den;
    }
    for (size_t s = 0; s < ns; ++s) {
      c.clear();
      r2.clear();
      for (const Cell& cell : l.by_subject[s]) {
        const double r = cell.score - p.x[cell.other] - p.b[s];
        c.push_back(p.a[cell.other] * p.a[cell.other]);
        r2.push_back(r * r);
      }
      p.v[s] = std::sqrt(MaximizeVariance(p.v[s] * p.v[s], c, r2, floor2));
    }
    for (size_t j = 0; j < nv; ++j) {
      c.clear();
      r2.clear();
      for (const Cell& cell : l.by_video[j]) {
        const double r = cell.score - p.x[j] - p.b[cell.other];
        c.push_back(p.v[cell.other] * p.v[cell.other]);
        r2.push_back(r * r);
      }
      p.a[j] = std::sqrt(MaximizeVariance(p.a[j] * p.a[j], c, r2, floor2));
    }
    center();
    p.loglik = LogLikelihood(m, p);
    p.loglik_trace.push_back(p.loglik);
    p.iterations = iter;

    double change = 0;
    auto track = [&](const std::vector<double>& a, const std::vector<double>& b) {
      for (size_t i = 0; i < a.size(); ++i) change = std::max(change, std::abs(a[i] - b[i]));
    };
    track(p.x, prev.x);
    track(p.b, prev.b);
    track(p.v, prev.v);
    track(p.a, prev.a);
    if (p.loglik >= best.loglik) best = p;
    if (change < options.tol) {
      p.converged = true;
      return p;
    }
  }
  // Best-so-far parameters, with the full trace for inspection.
  best.loglik_trace = p.loglik_trace;
  best.iterations = p.iterations;
  best.converged = false;
  return best;
}

ConsistencyReport ConsistencyAnalysis(const ZScoreMatrix& z, int splits, uint64_t seed) {
  if (!z.rescaled) throw Error(ErrorCode::kUsageError, "consistency needs rescaled scores");
  std::vector<std::vector<double>> by_video(z.videos.size());
  for (const ZScoreEntry& e : z.entries) by_video[e.video].push_back(e.z_prime);
  for (size_t j = 0; j < by_video.size(); ++j) {
    if (by_video[j].size() < 2) {
      throw Error(ErrorCode::kInsufficientData, z.videos[j] + " has fewer than 2 raters");
    }
  }
  std::vector<double> plcc, srocc;
  std::vector<double> mos1(by_video.size()), mos2(by_video.size());
  for (int split = 0; split < splits; ++split) {
    std::mt19937_64 g = rng::DerivedEngine(seed, static_cast<uint64_t>(split));
    for (size_t j = 0; j < by_video.size(); ++j) {
      std::vector<double> scores = by_video[j];
      rng::Shuffle(scores, g);
      const size_t half = scores.size() / 2;
      double s1 = 0, s2 = 0;
      for (size_t i = 0; i < half; ++i) {
        s1 += scores[i];
        s2 += scores[half + i];
      }
      mos1[j] = s1 / static_cast<double>(half);
      mos2[j] = s2 / static_cast<double>(half);
    }
    plcc.push_back(eval::Plcc(mos1, mos2));
    srocc.push_back(eval::Srocc(mos1, mos2));
  }
  ConsistencyReport r;
  r.inter_plcc = eval::Median(plcc);
  r.inter_srocc = eval::Median(srocc);

  const MosResult mos = ComputeMos(z);
  std::vector<std::vector<std::pair<double, double>>> by_subject(z.subjects.size());
  for (const ZScoreEntry& e : z.entries) {
    by_subject[e.subject].push_back({e.z_prime, mos.mos[e.video]});
  }
  std::vector<double> intra_p, intra_s;
  for (const auto& pairs : by_subject) {
    std::vector<double> a, b;
    for (const auto& [own, m] : pairs) {
      a.push_back(own);
      b.push_back(m);
    }
    try {
      intra_p.push_back(eval::Plcc(a, b));
      intra_s.push_back(eval::Srocc(a, b));
    } catch (const Error&) {
      // Too few or constant ratings: this subject carries no signal.
    }
  }
  if (intra_p.empty()) {
    throw Error(ErrorCode::kInsufficientData, "no subject supports an intra correlation");
  }
  r.intra_plcc = eval::Median(intra_p);
  r.intra_srocc = eval::Median(intra_s);
  return r;
}

std::vector<bool> FlagOutlierSubjects(const SurealParams& p, double k) {
  std::vector<bool> flags(p.v.size(), false);
  if (p.v.size() < 2) return flags;
  const double med_v = eval::Median(p.v), mad_v = MedianAbsDeviation(p.v, med_v);
  const double med_b = eval::Median(p.b), mad_b = MedianAbsDeviation(p.b, med_b);
  for (size_t s = 0; s < p.v.size(); ++s) {
    if (mad_v > 0 && p.v[s] > med_v + k * mad_v) flags[s] = true;
    if (mad_b > 0 && std::abs(p.b[s] - med_b) > k * mad_b) flags[s] = true;
  }
  return flags;
}

}  // namespace vqalab::sureal
