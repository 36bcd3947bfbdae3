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


#include "vqalab/report.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "vqalab/csv.h"
#include "vqalab/error.h"

namespace vqalab::report {

std::vector<HistogramBin> Histogram(std::span<const double> values, double bin_width) {
  if (values.empty()) throw Error(ErrorCode::kSchemaError, "no values to bin");
  if (!(bin_width > 0)) throw Error(ErrorCode::kUsageError, "bin width must be positive");
  long long lo = 0, hi = 0;
  std::map<long long, size_t> counts;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kSchemaError, "non-finite value");
    const long long k = static_cast<long long>(std::floor(v / bin_width));
    ++counts[k];
  }
  lo = counts.begin()->first;
  hi = counts.rbegin()->first;
  std::vector<HistogramBin> bins;
  for (long long k = lo; k <= hi; ++k) {
    auto it = counts.find(k);
    bins.push_back({static_cast<double>(k) * bin_width, static_cast<double>(k + 1) * bin_width,
                    it == counts.end() ? 0 : it->second});
  }
  return bins;
}

namespace {

double Quantile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const size_t i = static_cast<size_t>(std::floor(h));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame2 {
  double x0, x1, y0, y1;
  static constexpr double kW = 640, kH = 480, kPad = 60;
  double X(double x) const { return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad); }
  double Y(double y) const { return kH - kPad - (y - y0) / (y1 - y0) * (kH - 2 * kPad); }
};

std::string Num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string Axes(const Frame2& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<line x1=\"" + Num(f.X(f.x0)) + "\" y1=\"" + Num(f.Y(f.y0)) + "\" x2=\"" +
       Num(f.X(f.x1)) + "\" y2=\"" + Num(f.Y(f.y0)) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + Num(f.X(f.x0)) + "\" y1=\"" + Num(f.Y(f.y0)) + "\" x2=\"" +
       Num(f.X(f.x0)) + "\" y2=\"" + Num(f.Y(f.y1)) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + Num(Frame2::kW / 2) + "\" y=\"" + Num(Frame2::kH - 20) +
       "\" text-anchor=\"middle\">" + Escape(xlabel) + "</text>\n";
  s += "<text x=\"20\" y=\"" + Num(Frame2::kH / 2) + "\" transform=\"rotate(-90 20 " +
       Num(Frame2::kH / 2) + ")\" text-anchor=\"middle\">" + Escape(ylabel) + "</text>\n";
  s += "<text x=\"" + Num(f.X(f.x0)) + "\" y=\"" + Num(f.Y(f.y0) + 16) +
       "\" text-anchor=\"middle\">" + Num(f.x0) + "</text>\n";
  s += "<text x=\"" + Num(f.X(f.x1)) + "\" y=\"" + Num(f.Y(f.y0) + 16) +
       "\" text-anchor=\"middle\">" + Num(f.x1) + "</text>\n";
  s += "<text x=\"" + Num(f.X(f.x0) - 6) + "\" y=\"" + Num(f.Y(f.y0)) +
       "\" text-anchor=\"end\">" + Num(f.y0) + "</text>\n";
  s += "<text x=\"" + Num(f.X(f.x0) - 6) + "\" y=\"" + Num(f.Y(f.y1)) +
       "\" text-anchor=\"end\">" + Num(f.y1) + "</text>\n";
  return s;
}

std::string SvgOpen() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
}

void Widen(double& lo, double& hi) {
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
}

}  // namespace

BoxStats ComputeBox(const std::string& label, std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kSchemaError, "no values for " + label);
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return {label, v.size(), v.front(), Quantile(v, 0.25), Quantile(v, 0.5), Quantile(v, 0.75),
          v.back()};
}

std::vector<BoxStats> SubjectBoxes(const std::vector<std::string>& subjects,
                                   std::span<const double> scores) {
  if (subjects.size() != scores.size()) {
    throw Error(ErrorCode::kSchemaError, "subject and score counts differ");
  }
  if (subjects.empty()) throw Error(ErrorCode::kSchemaError, "no scores");
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> groups;
  for (size_t i = 0; i < subjects.size(); ++i) {
    auto [it, fresh] = groups.try_emplace(subjects[i]);
    if (fresh) order.push_back(subjects[i]);
    it->second.push_back(scores[i]);
  }
  std::vector<BoxStats> out;
  for (const auto& s : order) out.push_back(ComputeBox(s, groups[s]));
  return out;
}

std::string HistogramCsv(const std::vector<HistogramBin>& bins) {
  std::string out = "lo,hi,count\n";
  for (const auto& b : bins) {
    out += io::FormatDouble(b.lo) + "," + io::FormatDouble(b.hi) + "," + std::to_string(b.count) +
           "\n";
  }
  return out;
}

std::string BoxCsv(const std::vector<BoxStats>& boxes) {
  std::string out = "subject_id,n,min,q1,median,q3,max\n";
  for (const auto& b : boxes) {
    out += b.label + "," + std::to_string(b.n) + "," + io::FormatDouble(b.min) + "," +
           io::FormatDouble(b.q1) + "," + io::FormatDouble(b.median) + "," +
           io::FormatDouble(b.q3) + "," + io::FormatDouble(b.max) + "\n";
  }
  return out;
}

std::string HullCsv(const diversity::Hull2D& hull) {
  std::string out = "x,y\n";
  for (const auto& p : hull.vertices) {
    out += io::FormatDouble(p.x) + "," + io::FormatDouble(p.y) + "\n";
  }
  return out;
}

std::string HistogramSvg(const std::vector<HistogramBin>& bins, const std::string& xlabel) {
  if (bins.empty()) throw Error(ErrorCode::kSchemaError, "empty histogram");
  size_t peak = 0;
  for (const auto& b : bins) peak = std::max(peak, b.count);
  Frame2 f{bins.front().lo, bins.back().hi, 0, static_cast<double>(peak)};
  Widen(f.y0, f.y1);
  std::string s = SvgOpen() + Axes(f, xlabel, "count");
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    const double top = f.Y(static_cast<double>(b.count));
    s += "<rect x=\"" + Num(f.X(b.lo)) + "\" y=\"" + Num(top) + "\" width=\"" +
         Num(f.X(b.hi) - f.X(b.lo)) + "\" height=\"" + Num(f.Y(0) - top) +
         "\" fill=\"steelblue\" stroke=\"white\"/>\n";
  }
  return s + "</svg>\n";
}

std::string ScatterHullSvg(std::span<const diversity::Point2> points,
                           const diversity::Hull2D& hull, const std::string& xlabel,
                           const std::string& ylabel) {
  if (points.empty()) throw Error(ErrorCode::kSchemaError, "no points");
  Frame2 f{points[0].x, points[0].x, points[0].y, points[0].y};
  for (const auto& p : points) {
    f.x0 = std::min(f.x0, p.x);
    f.x1 = std::max(f.x1, p.x);
    f.y0 = std::min(f.y0, p.y);
    f.y1 = std::max(f.y1, p.y);
  }
  Widen(f.x0, f.x1);
  Widen(f.y0, f.y1);
  std::string s = SvgOpen() + Axes(f, xlabel, ylabel);
  if (!hull.vertices.empty()) {
    s += "<polygon points=\"";
    for (const auto& v : hull.vertices) s += Num(f.X(v.x)) + "," + Num(f.Y(v.y)) + " ";
    s += "\" fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& p : points) {
    s += "<circle cx=\"" + Num(f.X(p.x)) + "\" cy=\"" + Num(f.Y(p.y)) +
         "\" r=\"2.5\" fill=\"steelblue\"/>\n";
  }
  return s + "</svg>\n";
}

std::vector<FeaturePair> DiversityPairs() {
  return {{"si", "ti"}, {"ci", "sharpness"}, {"brightness", "contrast"}};
}

double ProfileValue(const diversity::DiversityProfile& p, const std::string& name) {
  if (name == "brightness") return p.brightness;
  if (name == "contrast") return p.contrast;
  if (name == "sharpness") return p.sharpness;
  if (name == "si") return p.si;
  if (name == "ti") return p.ti;
  if (name == "ci") return p.ci;
  throw Error(ErrorCode::kSchemaError, "unknown feature " + name);
}

}  // namespace vqalab::report
