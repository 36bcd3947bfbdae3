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


#include "cli.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <csignal>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vqalab/csv.h"
#include "vqalab/diversity.h"
#include "vqalab/error.h"
#include "vqalab/evaluation.h"
#include "vqalab/media_io.h"
#include "vqalab/moeva.h"
#include "vqalab/nss.h"
#include "vqalab/random.h"
#include "vqalab/report.h"
#include "vqalab/study.h"
#include "vqalab/study_server.h"
#include "vqalab/sureal.h"

// After Eigen users: resolv.h defines a _res macro.
#include "httplib.h"

namespace vqalab::cli {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

std::string ConfigHash(const std::string& canonical) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Resolved state of the running subcommand.
struct RunContext {
  std::string command;
  std::string hash;
  std::string seed = "none";
};

std::string WithCsvHeader(const RunContext& ctx, const std::string& body) {
  return "# config-hash: " + ctx.hash + "\n" + body;
}

void WriteCsv(const RunContext& ctx, const fs::path& path, const std::string& body) {
  io::WriteFileAtomic(path, WithCsvHeader(ctx, body));
}

void WriteSvg(const RunContext& ctx, const fs::path& path, const std::string& body) {
  io::WriteFileAtomic(path, "<!-- config-hash: " + ctx.hash + " -->\n" + body);
}

// Sidecar metadata record next to the primary artifact.
void WriteMeta(const RunContext& ctx, const fs::path& primary) {
  const std::string text = "command=" + ctx.command + "\nconfig_hash=" + ctx.hash +
                           "\nseed=" + ctx.seed + "\nversion=" + kVersion + "\n";
  io::WriteFileAtomic(primary.string() + ".meta", text);
}

struct Clip {
  std::string id;
  media::FrameSequence seq;
};

std::vector<Clip> LoadClips(const fs::path& input) {
  std::vector<Clip> clips;
  if (input.extension() == ".y4m") {
    clips.push_back({input.stem().string(), media::ReadY4mFile(input)});
    return clips;
  }
  for (const auto& e : media::ReadManifest(input)) {
    clips.push_back({e.id, media::ReadY4mFile(e.path)});
  }
  if (clips.empty()) throw Error(ErrorCode::kSchemaError, "manifest lists no clips");
  return clips;
}

std::vector<media::FrameSequence> LoadCorpusDir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    std::vector<media::FrameSequence> out;
    for (auto& c : LoadClips(dir)) out.push_back(std::move(c.seq));
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".y4m") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kEmptyCorpus, "no .y4m files in " + dir.string());
  std::vector<media::FrameSequence> out;
  for (const auto& f : files) out.push_back(media::ReadY4mFile(f));
  return out;
}

std::string Row(const std::string& id, const Eigen::VectorXd& v) {
  std::string s = id;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += "," + io::FormatDouble(v[i]);
  return s + "\n";
}

std::string NumberedHeader(const std::string& prefix, size_t n) {
  std::string s;
  for (size_t i = 0; i < n; ++i) s += "," + prefix + std::to_string(i);
  return s;
}

struct FeatureTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;
};

FeatureTable ReadFeatureCsv(const fs::path& path) {
  const io::CsvTable t = io::ReadCsv(path);
  const size_t cid = t.Column("id");
  FeatureTable out;
  const size_t cols = t.header.size() - 1;
  if (cols == 0 || t.rows.empty()) throw Error(ErrorCode::kSchemaError, path.string() + " is empty");
  out.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size()) {
      throw Error(ErrorCode::kSchemaError, path.string() + ": ragged row " + std::to_string(r));
    }
    out.ids.push_back(t.rows[r][cid]);
    size_t c = 0;
    for (size_t k = 0; k < t.header.size(); ++k) {
      if (k == cid) continue;
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) =
          io::ParseDouble(t.rows[r][k]);
    }
  }
  return out;
}

std::string Upper(std::string s) {
  for (char& c : s) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Every long option of `app` also reads VQALAB_<NAME> from the environment.
void AddEnvOverrides(CLI::App* app) {
  for (CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help" ||
        opt->get_lnames()[0] == "config") {
      continue;
    }
    opt->envname("VQALAB_" + Upper(opt->get_lnames()[0]));
  }
}

// Appends --key value for each key=value line of the --config file unless
// the flag or its VQALAB_ variable is already present.
std::vector<std::string> ExpandConfig(std::vector<std::string> args) {
  fs::path file;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (file.empty()) return args;
  std::istringstream in(io::ReadFile(file));
  std::string line;
  while (std::getline(in, line)) {
    line = io::Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kUsageError, "config line without '=': " + line);
    std::string key = io::Trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given || std::getenv(("VQALAB_" + Upper(key)).c_str())) continue;
    args.push_back(flag);
    args.push_back(io::Trim(line.substr(eq + 1)));
  }
  return args;
}

std::atomic<httplib::Server*> g_server{nullptr};

void StopServer(int) {
  if (httplib::Server* s = g_server.load()) s->stop();
}

}  // namespace

int Run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"vqalab: video quality assessment toolkit", "vqalab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string command;
  std::vector<std::function<void(RunContext&)>> actions;
  std::vector<CLI::App*> leaves;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc) {
    CLI::App* sub = parent->add_subcommand(name, desc);
    sub->add_option("--config", "flat key=value file; flags and VQALAB_ variables override it");
    leaves.push_back(sub);
    return sub;
  };

  // ---- features ------------------------------------------------------------
  CLI::App* features = app.add_subcommand("features", "per-clip feature extraction");
  features->require_subcommand(1);

  fs::path div_in, div_out;
  size_t div_stride = 10;
  std::string div_range = "limited";
  CLI::App* fdiv = leaf(features, "diversity", "brightness, contrast, sharpness, SI, TI, CI");
  fdiv->add_option("--input", div_in, "manifest CSV or .y4m file")->required();
  fdiv->add_option("--stride", div_stride, "frame sampling stride")->check(CLI::PositiveNumber);
  fdiv->add_option("--range", div_range, "YUV range")->check(CLI::IsMember({"limited", "full"}));
  fdiv->add_option("--out", div_out, "profiles CSV")->required();
  fdiv->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      std::string body = "id,brightness,contrast,sharpness,si,ti,ci\n";
      const auto range = div_range == "full" ? media::YuvRange::kFull : media::YuvRange::kLimited;
      for (const Clip& c : LoadClips(div_in)) {
        const auto p = diversity::ComputeProfile(c.seq, div_stride, range);
        Eigen::VectorXd v(6);
        v << p.brightness, p.contrast, p.sharpness, p.si, p.ti, p.ci;
        body += Row(c.id, v);
      }
      WriteCsv(ctx, div_out, body);
      WriteMeta(ctx, div_out);
    });
  });

  fs::path nss_in, nss_out, nss_pristine;
  size_t nss_stride = 10;
  CLI::App* fnss = leaf(features, "nss", "spatial and temporal NSS features, optional NIQE");
  fnss->add_option("--input", nss_in, "manifest CSV or .y4m file")->required();
  fnss->add_option("--pristine", nss_pristine, "pristine model for a niqe column");
  fnss->add_option("--stride", nss_stride, "frame sampling stride")->check(CLI::PositiveNumber);
  fnss->add_option("--out", nss_out, "features CSV")->required();
  fnss->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      std::optional<nss::PristineModel> model;
      if (!nss_pristine.empty()) model = nss::LoadPristineModel(nss_pristine);
      std::string body = "id" + NumberedHeader("s", nss::kSpatialNssSize) +
                         NumberedHeader("t", nss::kTemporalNssSize) + (model ? ",niqe" : "") +
                         "\n";
      for (const Clip& c : LoadClips(nss_in)) {
        const auto s = nss::SpatialNssVideo(c.seq, nss_stride);
        const auto t = nss::TemporalNssVideo(c.seq);
        Eigen::VectorXd v(static_cast<Eigen::Index>(s.size() + t.size() + (model ? 1 : 0)));
        Eigen::Index k = 0;
        for (double x : s) v[k++] = x;
        for (double x : t) v[k++] = x;
        if (model) v[k++] = nss::NiqeVideoScore(c.seq, *model, nss_stride);
        body += Row(c.id, v);
      }
      WriteCsv(ctx, nss_out, body);
      WriteMeta(ctx, nss_out);
    });
  });

  // ---- nss -----------------------------------------------------------------
  CLI::App* nss_cmd = app.add_subcommand("nss", "pristine model management");
  nss_cmd->require_subcommand(1);
  fs::path fit_in, fit_out;
  size_t fit_stride = 10, fit_patch = 96;
  double fit_sharp = 0.75;
  CLI::App* nfit = leaf(nss_cmd, "fit", "fit a NIQE pristine model on a clip corpus");
  nfit->add_option("--corpus", fit_in, "manifest CSV, .y4m file or directory")->required();
  nfit->add_option("--stride", fit_stride, "frame sampling stride")->check(CLI::PositiveNumber);
  nfit->add_option("--patch", fit_patch, "patch size")->check(CLI::PositiveNumber);
  nfit->add_option("--sharpness", fit_sharp, "sharp-patch fraction")->check(CLI::Range(0.0, 1.0));
  nfit->add_option("--out", fit_out, "model file")->required();
  nfit->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      std::vector<RealPlane> frames;
      for (const auto& seq : LoadCorpusDir(fit_in)) {
        for (auto& p : diversity::LumaPlanes(media::SubsampleFrames(seq, fit_stride))) {
          frames.push_back(std::move(p));
        }
      }
      nss::PatchOptions opt;
      opt.patch_size = fit_patch;
      opt.sharpness_fraction = fit_sharp;
      const auto model = nss::FitPristineModel(frames, opt);
      const auto bytes = nss::SerializePristineModel(model);
      io::WriteFileAtomic(fit_out, std::string(bytes.begin(), bytes.end()));
      WriteMeta(ctx, fit_out);
    });
  });

  // ---- sureal --------------------------------------------------------------
  CLI::App* sureal_cmd = app.add_subcommand("sureal", "subjective score recovery");
  sureal_cmd->require_subcommand(1);
  fs::path sr_in, sr_out, sr_subjects, sr_consistency;
  uint64_t sr_seed = 0;
  int sr_splits = 100;
  double sr_tol = 1e-6, sr_mad = 2.5;
  int sr_iter = 500;
  CLI::App* srec = leaf(sureal_cmd, "recover", "z-score MOS, maximum-likelihood scores, subject flags");
  srec->add_option("--in", sr_in, "opinion CSV")->required();
  srec->add_option("--seed", sr_seed, "seed of the consistency splits")->required();
  srec->add_option("--out", sr_out, "per-video CSV")->required();
  srec->add_option("--subjects", sr_subjects, "per-subject CSV (default: subjects.csv next to --out)");
  srec->add_option("--consistency", sr_consistency, "consistency JSON (optional)");
  srec->add_option("--splits", sr_splits, "consistency splits")->check(CLI::PositiveNumber);
  srec->add_option("--tol", sr_tol, "convergence tolerance")->check(CLI::PositiveNumber);
  srec->add_option("--max-iter", sr_iter, "iteration cap")->check(CLI::PositiveNumber);
  srec->add_option("--mad-k", sr_mad, "outlier flag threshold in MADs")->check(CLI::PositiveNumber);
  srec->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      const auto m = sureal::OpinionMatrix::FromRecords(sureal::ReadOpinionCsv(sr_in.string()));
      const auto z = sureal::RescaleScores(sureal::NormalizeZScores(m));
      const auto mos = sureal::ComputeMos(z);
      const auto rescaled = sureal::RescaledOpinions(z);
      const auto fit = sureal::SolveSureal(rescaled, {sr_tol, sr_iter});
      if (!fit.converged) err << "warning: score recovery did not converge\n";
      std::string videos = "video_id,mos,std,n,recovered\n";
      for (size_t e = 0; e < rescaled.videos.size(); ++e) {
        videos += rescaled.videos[e] + "," + io::FormatDouble(mos.mos[e]) + "," +
                  io::FormatDouble(mos.std[e]) + "," + std::to_string(mos.count[e]) + "," +
                  io::FormatDouble(fit.x[e]) + "\n";
      }
      const auto flags = sureal::FlagOutlierSubjects(fit, sr_mad);
      std::string subjects = "subject_id,bias,inconsistency,flag\n";
      for (size_t s = 0; s < rescaled.subjects.size(); ++s) {
        subjects += rescaled.subjects[s] + "," + io::FormatDouble(fit.b[s]) + "," +
                    io::FormatDouble(fit.v[s]) + "," + (flags[s] ? "1" : "0") + "\n";
      }
      const fs::path subj_path =
          sr_subjects.empty() ? sr_out.parent_path() / "subjects.csv" : sr_subjects;
      WriteCsv(ctx, sr_out, videos);
      WriteCsv(ctx, subj_path, subjects);
      if (!sr_consistency.empty()) {
        const auto c = sureal::ConsistencyAnalysis(z, sr_splits, sr_seed);
        nlohmann::ordered_json j;
        j["config_hash"] = ctx.hash;
        j["inter_plcc"] = c.inter_plcc;
        j["inter_srocc"] = c.inter_srocc;
        j["intra_plcc"] = c.intra_plcc;
        j["intra_srocc"] = c.intra_srocc;
        io::WriteFileAtomic(sr_consistency, j.dump(2) + "\n");
      }
      WriteMeta(ctx, sr_out);
    });
  });

  // ---- bench ---------------------------------------------------------------
  CLI::App* bench_cmd = app.add_subcommand("bench", "regression benchmark over random splits");
  bench_cmd->require_subcommand(1);
  std::vector<fs::path> b_features;
  std::vector<std::string> b_free;
  fs::path b_mos, b_out;
  int b_splits = 1000, b_folds = 5;
  double b_train = 0.8;
  uint64_t b_seed = 0;
  std::string b_regressor = "svr", b_logistic = "standard";
  CLI::App* brun = leaf(bench_cmd, "run", "median SROCC/KRCC/PLCC/RMSE per feature set");
  brun->add_option("--features", b_features, "feature CSVs (model name = file stem)")
      ->required()
      ->delimiter(',');
  brun->add_option("--training-free", b_free, "models scored directly (single column)")
      ->delimiter(',');
  brun->add_option("--mos", b_mos, "CSV with video_id,mos")->required();
  brun->add_option("--splits", b_splits, "random splits")->check(CLI::PositiveNumber);
  brun->add_option("--train-fraction", b_train, "training share")->check(CLI::Range(0.0, 1.0));
  brun->add_option("--folds", b_folds, "cross-validation folds")->check(CLI::Range(2, 100));
  brun->add_option("--regressor", b_regressor, "svr or krr")->check(CLI::IsMember({"svr", "krr"}));
  brun->add_option("--logistic", b_logistic, "standard or literal")
      ->check(CLI::IsMember({"standard", "literal"}));
  brun->add_option("--seed", b_seed, "split and CV seed")->required();
  brun->add_option("--out", b_out, "report JSON")->required();
  brun->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      const io::CsvTable mt = io::ReadCsv(b_mos);
      const size_t cv = mt.Column("video_id"), cm = mt.Column("mos");
      std::vector<std::string> ids;
      std::vector<double> mos;
      for (const auto& r : mt.rows) {
        ids.push_back(r[cv]);
        mos.push_back(io::ParseDouble(r[cm]));
      }
      std::vector<eval::ModelInput> models;
      for (const auto& f : b_features) {
        const FeatureTable t = ReadFeatureCsv(f);
        std::map<std::string, Eigen::Index> row;
        for (size_t i = 0; i < t.ids.size(); ++i) row[t.ids[i]] = static_cast<Eigen::Index>(i);
        eval::ModelInput in;
        in.name = f.stem().string();
        in.training_free = std::find(b_free.begin(), b_free.end(), in.name) != b_free.end();
        in.features.resize(static_cast<Eigen::Index>(ids.size()), t.values.cols());
        for (size_t i = 0; i < ids.size(); ++i) {
          auto it = row.find(ids[i]);
          if (it == row.end()) {
            throw Error(ErrorCode::kSchemaError, f.string() + " lacks video " + ids[i]);
          }
          in.features.row(static_cast<Eigen::Index>(i)) = t.values.row(it->second);
        }
        models.push_back(std::move(in));
      }
      eval::BenchmarkOptions opt;
      opt.plan = {b_splits, b_train, b_seed};
      opt.kind = b_regressor == "svr" ? eval::RegressorKind::kSvrRbf : eval::RegressorKind::kKernelRidge;
      opt.train.cv_folds = b_folds;
      opt.train.seed = b_seed;
      opt.form = b_logistic == "standard" ? eval::LogisticForm::kStandard : eval::LogisticForm::kLiteral;
      const auto results = eval::RunBenchmark(models, mos, opt);
      auto j = nlohmann::ordered_json::parse(eval::BenchmarkReportJson(results, opt));
      j["config_hash"] = ctx.hash;
      io::WriteFileAtomic(b_out, j.dump(2) + "\n");
      WriteMeta(ctx, b_out);
      for (const auto& r : results) {
        out << r.name << " srocc=" << r.median.srocc << " plcc=" << r.median.plcc << "\n";
      }
    });
  });

  // ---- moeva ---------------------------------------------------------------
  CLI::App* moeva_cmd = app.add_subcommand("moeva", "contrastive encoder and fused features");
  moeva_cmd->require_subcommand(1);
  fs::path mp_corpus, mp_out, mp_trace;
  moeva::PretrainConfig mp;
  CLI::App* mpre = leaf(moeva_cmd, "pretrain", "contrastive pre-training of the toy encoder");
  mpre->add_option("--corpus", mp_corpus, "directory of .y4m files, manifest or .y4m")->required();
  mpre->add_option("--out", mp_out, "encoder file")->required();
  mpre->add_option("--trace", mp_trace, "per-step loss CSV");
  mpre->add_option("--seed", mp.seed, "initialisation and sampling seed")->required();
  mpre->add_option("--temperature", mp.temperature)->check(CLI::PositiveNumber);
  mpre->add_option("--momentum", mp.momentum)->check(CLI::Range(0.0, 1.0));
  mpre->add_option("--learning-rate", mp.learning_rate)->check(CLI::PositiveNumber);
  mpre->add_option("--batch", mp.batch)->check(CLI::PositiveNumber);
  mpre->add_option("--steps", mp.steps);
  mpre->add_option("--chunk-size", mp.chunk_size)->check(CLI::PositiveNumber);
  mpre->add_option("--patch", mp.patch)->check(CLI::PositiveNumber);
  mpre->add_option("--ola-min", mp.ola_min)->check(CLI::Range(0.0, 1.0));
  mpre->add_option("--ola-max", mp.ola_max)->check(CLI::Range(0.0, 1.0));
  mpre->add_option("--frame-stride", mp.frame_stride)->check(CLI::PositiveNumber);
  mpre->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      const auto corpus = LoadCorpusDir(mp_corpus);
      const auto frames = moeva::SampleCorpusFrames(corpus, mp.frame_stride);
      const auto result = moeva::Pretrain(frames, mp);
      const auto bytes = moeva::SerializeEncoderPair(result.encoders);
      io::WriteFileAtomic(mp_out, std::string(bytes.begin(), bytes.end()));
      if (!mp_trace.empty()) {
        std::string trace = "step,loss\n";
        for (size_t i = 0; i < result.loss_trace.size(); ++i) {
          trace += std::to_string(i) + "," + io::FormatDouble(result.loss_trace[i]) + "\n";
        }
        WriteCsv(ctx, mp_trace, trace);
      }
      WriteMeta(ctx, mp_out);
      if (!result.loss_trace.empty()) {
        out << "loss " << result.loss_trace.front() << " -> " << result.loss_trace.back() << "\n";
      }
    });
  });

  fs::path mx_encoder, mx_in, mx_out;
  size_t mx_stride = 10;
  CLI::App* mext = leaf(moeva_cmd, "extract", "deep + spatial NSS + temporal NSS features");
  mext->add_option("--encoder", mx_encoder, "encoder file")->required();
  mext->add_option("--input", mx_in, "manifest CSV or .y4m file")->required();
  mext->add_option("--stride", mx_stride, "frame sampling stride")->check(CLI::PositiveNumber);
  mext->add_option("--out", mx_out, "features CSV")->required();
  mext->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      const auto pair = moeva::LoadEncoderPair(mx_encoder);
      std::string body = "id" + NumberedHeader("f", moeva::kMoevaFeatureSize) + "\n";
      for (const Clip& c : LoadClips(mx_in)) {
        body += Row(c.id, moeva::MoevaFeatures(c.seq, pair.online, pair.patch, mx_stride));
      }
      WriteCsv(ctx, mx_out, body);
      WriteMeta(ctx, mx_out);
    });
  });

  // ---- study ---------------------------------------------------------------
  CLI::App* study_cmd = app.add_subcommand("study", "subjective study service");
  study_cmd->require_subcommand(1);
  fs::path st_dir, st_videos;
  study::StudyConfig sc;
  double st_gap_hours = 24;
  uint64_t st_seed = 0;
  CLI::App* sinit = leaf(study_cmd, "init", "build playlists and create a study store");
  sinit->add_option("--dir", st_dir, "store directory")->required();
  sinit->add_option("--videos", st_videos, "CSV with an id column")->required();
  sinit->add_option("--training", sc.training_video_ids, "training video ids")->delimiter(',');
  sinit->add_option("--playlist-count", sc.playlist_count)->check(CLI::PositiveNumber);
  sinit->add_option("--playlist-size", sc.playlist_size)->check(CLI::PositiveNumber);
  sinit->add_option("--playlists-per-subject", sc.playlists_per_subject)->check(CLI::PositiveNumber);
  sinit->add_option("--group-count", sc.group_count)->check(CLI::PositiveNumber);
  sinit->add_option("--gap-hours", st_gap_hours)->check(CLI::NonNegativeNumber);
  sinit->add_flag("--shuffle", sc.shuffle_per_subject, "per-subject playlist order");
  sinit->add_option("--seed", st_seed, "playlist partition seed")->required();
  sinit->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      const io::CsvTable t = io::ReadCsv(st_videos);
      const size_t cid = t.Column("id");
      std::vector<std::string> ids;
      for (const auto& r : t.rows) ids.push_back(r[cid]);
      sc.min_session_gap = static_cast<study::Timestamp>(st_gap_hours * study::kHour);
      sc.seed = st_seed;
      auto store = study::StudyStore::Create(
          st_dir, study::Study(sc, study::BuildPlaylists(ids, sc, st_seed)));
      WriteMeta(ctx, st_dir / "snapshot.json");
      out << "study created in " << st_dir.string() << "\n";
    });
  });

  std::string sv_host = "127.0.0.1";
  int sv_port = 8080;
  fs::path sv_media;
  std::string sv_ext = ".y4m";
  CLI::App* sserve = leaf(study_cmd, "serve", "run the HTTP service");
  sserve->add_option("--dir", st_dir, "store directory")->required();
  sserve->add_option("--host", sv_host, "bind address");
  sserve->add_option("--port", sv_port, "port")->check(CLI::Range(1, 65535));
  sserve->add_option("--media", sv_media, "directory holding <video_id><ext>");
  sserve->add_option("--ext", sv_ext, "media file extension");
  sserve->final_callback([&] {
    actions.push_back([&](RunContext&) {
      auto store = study::StudyStore::Open(st_dir);
      study::StudyApi api(
          store,
          [] {
            return std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                .count();
          },
          sv_media, sv_ext);
      httplib::Server server;
      api.Mount(server);
      g_server = &server;
      std::signal(SIGINT, StopServer);
      std::signal(SIGTERM, StopServer);
      out << "listening on " << sv_host << ":" << sv_port << std::endl;
      const bool ok = server.listen(sv_host, sv_port);
      g_server = nullptr;
      store.Snapshot();
      if (!ok) throw Error(ErrorCode::kIoError, "cannot listen on port " + std::to_string(sv_port));
    });
  });

  fs::path se_out;
  CLI::App* sexp = leaf(study_cmd, "export", "opinion CSV without training ratings");
  sexp->add_option("--dir", st_dir, "store directory")->required();
  sexp->add_option("--out", se_out, "opinion CSV")->required();
  sexp->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      auto store = study::StudyStore::Open(st_dir);
      WriteCsv(ctx, se_out, store.Read([](const study::Study& s) { return s.ExportOpinionCsv(); }));
      WriteMeta(ctx, se_out);
    });
  });

  size_t ss_subjects = 48;
  uint64_t ss_seed = 0;
  double ss_noise = 8;
  CLI::App* ssim = leaf(study_cmd, "simulate", "scripted attendance of every subject");
  ssim->add_option("--dir", st_dir, "existing store directory")->required();
  ssim->add_option("--subjects", ss_subjects, "number of subjects")->check(CLI::PositiveNumber);
  ssim->add_option("--noise", ss_noise, "per-rating noise std")->check(CLI::NonNegativeNumber);
  ssim->add_option("--seed", ss_seed, "score seed")->required();
  ssim->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      auto store = study::StudyStore::Open(st_dir);
      auto rng = rng::DerivedEngine(ss_seed, 0);
      std::map<std::string, double> quality;
      const auto gap = store.Read([](const study::Study& s) { return s.config().min_session_gap; });
      study::Timestamp now = 0;
      using nlohmann::json;
      for (size_t s = 0; s < ss_subjects; ++s) {
        store.Apply({{"op", "register"}, {"subject_id", "sim" + std::to_string(s)}});
      }
      const size_t sessions = store.Read([](const study::Study& s) { return s.config().playlists_per_subject; });
      for (size_t k = 0; k < sessions; ++k) {
        for (size_t s = 0; s < ss_subjects; ++s) {
          const double bias = 10 * (rng::Uniform01(rng) - 0.5);
          const json st = store.Apply(
              {{"op", "start"}, {"subject_id", "sim" + std::to_string(s)}, {"now", now}});
          const std::string sid = st.at("session_id");
          while (true) {
            const json n = store.Apply({{"op", "next"}, {"session_id", sid}});
            if (n.at("done").get<bool>()) break;
            const std::string v = n.at("video_id");
            auto [it, fresh] = quality.try_emplace(v, 0.0);
            if (fresh) it->second = 20 + 60 * rng::Uniform01(rng);
            const double score =
                std::clamp(it->second + bias + ss_noise * rng::Normal01(rng), 0.0, 100.0);
            store.Apply({{"op", "rate"}, {"session_id", sid}, {"video_id", v}, {"score", score}, {"now", now}});
            now += 10;
          }
        }
        now += gap + study::kHour;
      }
      store.Snapshot();
      WriteMeta(ctx, st_dir / "simulate");
      out << "simulated " << ss_subjects << " subjects\n";
    });
  });

  // ---- report --------------------------------------------------------------
  CLI::App* report_cmd = app.add_subcommand("report", "plot data and static SVG");
  report_cmd->require_subcommand(1);
  fs::path rp_in, rp_dir;
  double rp_width = 1.0;
  CLI::App* rmos = leaf(report_cmd, "mos", "MOS histogram");
  rmos->add_option("--mos", rp_in, "CSV with a mos column")->required();
  rmos->add_option("--bin-width", rp_width)->check(CLI::PositiveNumber);
  rmos->add_option("--out-dir", rp_dir, "output directory")->required();
  rmos->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      const io::CsvTable t = io::ReadCsv(rp_in);
      const size_t c = t.Column("mos");
      std::vector<double> v;
      for (const auto& r : t.rows) v.push_back(io::ParseDouble(r[c]));
      const auto bins = report::Histogram(v, rp_width);
      fs::create_directories(rp_dir);
      WriteCsv(ctx, rp_dir / "mos_histogram.csv", report::HistogramCsv(bins));
      WriteSvg(ctx, rp_dir / "mos_histogram.svg", report::HistogramSvg(bins, "MOS"));
      WriteMeta(ctx, rp_dir / "mos_histogram.csv");
    });
  });

  CLI::App* rsub = leaf(report_cmd, "subjects", "per-subject raw-score box data");
  rsub->add_option("--ratings", rp_in, "opinion CSV")->required();
  rsub->add_option("--out-dir", rp_dir, "output directory")->required();
  rsub->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      std::vector<std::string> subjects;
      std::vector<double> scores;
      for (const auto& r : sureal::ReadOpinionCsv(rp_in.string())) {
        subjects.push_back(r.subject_id);
        scores.push_back(r.score);
      }
      fs::create_directories(rp_dir);
      WriteCsv(ctx, rp_dir / "subject_boxes.csv",
               report::BoxCsv(report::SubjectBoxes(subjects, scores)));
      WriteMeta(ctx, rp_dir / "subject_boxes.csv");
    });
  });

  CLI::App* rdiv = leaf(report_cmd, "diversity", "convex hulls of paired diversity features");
  rdiv->add_option("--profiles", rp_in, "profiles CSV")->required();
  rdiv->add_option("--out-dir", rp_dir, "output directory (default: next to the profiles)");
  rdiv->final_callback([&] {
    actions.push_back([&](RunContext& ctx) {
      const io::CsvTable t = io::ReadCsv(rp_in);
      if (t.rows.empty()) throw Error(ErrorCode::kSchemaError, "no profiles");
      const fs::path dir = rp_dir.empty() ? rp_in.parent_path() : rp_dir;
      if (!dir.empty()) fs::create_directories(dir);
      for (const auto& pair : report::DiversityPairs()) {
        const size_t cx = t.Column(pair.x), cy = t.Column(pair.y);
        std::vector<diversity::Point2> pts;
        for (const auto& r : t.rows) pts.push_back({io::ParseDouble(r[cx]), io::ParseDouble(r[cy])});
        const auto hull = diversity::ConvexHull(pts);
        const std::string stem = pair.x + "_" + pair.y;
        WriteCsv(ctx, dir / ("hull_" + stem + ".csv"), report::HullCsv(hull));
        WriteSvg(ctx, dir / ("scatter_" + stem + ".svg"),
                 report::ScatterHullSvg(pts, hull, pair.x, pair.y));
      }
      WriteMeta(ctx, dir / "hulls");
    });
  });

  for (CLI::App* l : leaves) AddEnvOverrides(l);

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  try {
    args = ExpandConfig(std::move(args));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kUsageError ? kExitUsageError : kExitDomainError;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* ctx = &app;
    while (!ctx->get_subcommands().empty()) ctx = ctx->get_subcommands().back();
    err << ctx->help();
    return kExitUsageError;
  }

  const CLI::App* active = &app;
  std::string path;
  while (!active->get_subcommands().empty()) {
    active = active->get_subcommands().back();
    path += (path.empty() ? "" : " ") + active->get_name();
  }
  RunContext ctx;
  ctx.command = path;
  ctx.hash = ConfigHash(path + "\n" + active->config_to_str(true, false));
  if (const CLI::Option* s = active->get_option_no_throw("--seed"); s && s->count() > 0) {
    ctx.seed = s->as<std::string>();
  }
  try {
    for (auto& a : actions) a(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kUsageError ? kExitUsageError : kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace vqalab::cli
