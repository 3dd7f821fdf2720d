/* Copyright 2026 The LongiPET Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "longipet/pipeline.hpp"

namespace longipet {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

const char* colour(const std::string& series) {
  if (series == "i2i") return "#1f77b4";
  if (series == "linear") return "#d62728";
  if (series == "ground_truth") return "#2ca02c";
  return "#7f7f7f";
}

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

Stat summarize(const std::vector<double>& v) {
  Stat s;
  s.n = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

// series -> year -> summary
using SeriesMap = std::map<std::string, std::map<int, Stat>>;

struct Panel {
  double x, y, w, h;
};

// One line chart with mean +- SD whiskers per year and a legend.
void line_panel(std::ostringstream& svg, const Panel& p, const std::string& title, const std::string& ylabel,
                const SeriesMap& series) {
  svg << "<g>\n";
  svg << "<rect x=\"" << num(p.x) << "\" y=\"" << num(p.y) << "\" width=\"" << num(p.w) << "\" height=\"" << num(p.h)
      << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  svg << "<text x=\"" << num(p.x + p.w / 2) << "\" y=\"" << num(p.y - 8)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  std::set<int> years;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [name, by_year] : series) {
    for (const auto& [year, s] : by_year) {
      years.insert(year);
      lo = std::min(lo, s.mean - s.sd);
      hi = std::max(hi, s.mean + s.sd);
    }
  }
  if (years.empty()) {
    svg << "<text x=\"" << num(p.x + p.w / 2) << "\" y=\"" << num(p.y + p.h / 2)
        << "\" text-anchor=\"middle\" font-size=\"12\">no data</text>\n</g>\n";
    return;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.08 * (hi - lo);
  lo -= pad;
  hi += pad;
  const int y0 = *years.begin(), y1 = *years.rbegin();
  const double left = p.x + 50, right = p.x + p.w - 10, top = p.y + 10, bottom = p.y + p.h - 35;
  auto sx = [&](int year) {
    return y0 == y1 ? (left + right) / 2 : left + (right - left) * (year - y0) / static_cast<double>(y1 - y0);
  };
  auto sy = [&](double v) { return bottom - (bottom - top) * (v - lo) / (hi - lo); };

  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(right) << "\" y2=\""
      << num(bottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\"" << num(bottom)
      << "\" stroke=\"black\"/>\n";
  for (int year : years) {
    svg << "<text x=\"" << num(sx(year)) << "\" y=\"" << num(bottom + 15) << "\" text-anchor=\"middle\" font-size=\"10\">"
        << year << "</text>\n";
  }
  svg << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(bottom + 30)
      << "\" text-anchor=\"middle\" font-size=\"11\">year</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.3f", v);
    svg << "<text x=\"" << num(left - 4) << "\" y=\"" << num(sy(v) + 3) << "\" text-anchor=\"end\" font-size=\"9\">"
        << label << "</text>\n";
  }
  svg << "<text x=\"" << num(p.x + 10) << "\" y=\"" << num((top + bottom) / 2) << "\" font-size=\"11\" transform=\"rotate(-90 "
      << num(p.x + 10) << " " << num((top + bottom) / 2) << ")\" text-anchor=\"middle\">" << escape(ylabel)
      << "</text>\n";

  int legend = 0;
  for (const auto& [name, by_year] : series) {
    const char* c = colour(name);
    svg << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [year, s] : by_year) {
      svg << (first ? "" : " ") << num(sx(year)) << "," << num(sy(s.mean));
      first = false;
    }
    svg << "\"/>\n";
    for (const auto& [year, s] : by_year) {
      svg << "<line x1=\"" << num(sx(year)) << "\" y1=\"" << num(sy(s.mean - s.sd)) << "\" x2=\"" << num(sx(year))
          << "\" y2=\"" << num(sy(s.mean + s.sd)) << "\" stroke=\"" << c << "\"/>\n";
      svg << "<circle cx=\"" << num(sx(year)) << "\" cy=\"" << num(sy(s.mean)) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    }
    const double ly = top + 4 + 14 * legend++;
    svg << "<rect x=\"" << num(right - 90) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\"" << c
        << "\"/>\n";
    svg << "<text x=\"" << num(right - 76) << "\" y=\"" << num(ly + 9) << "\" font-size=\"10\">" << escape(name)
        << "</text>\n";
  }
  svg << "</g>\n";
}

}  // namespace

std::string render_report_svg(const MetricsTable& table) {
  std::map<std::string, std::map<int, std::vector<double>>> mae, ssim;
  // group -> source -> year -> values; ground truth counted once per subject.
  std::map<std::string, std::map<std::string, std::map<int, std::vector<double>>>> roi;
  std::set<std::pair<std::string, int>> truth_seen;
  for (const MetricsRow& r : table.rows) {
    mae[r.predictor][r.year].push_back(r.mae);
    ssim[r.predictor][r.year].push_back(r.ssim);
    if (!std::isnan(r.meta_roi_suvr)) roi[r.group][r.predictor][r.year].push_back(r.meta_roi_suvr);
    if (!std::isnan(r.gt_meta_roi_suvr) && truth_seen.insert({r.subject_id, r.year}).second) {
      roi[r.group]["ground_truth"][r.year].push_back(r.gt_meta_roi_suvr);
    }
  }
  auto to_series = [](const std::map<std::string, std::map<int, std::vector<double>>>& m) {
    SeriesMap s;
    for (const auto& [name, by_year] : m)
      for (const auto& [year, v] : by_year) s[name][year] = summarize(v);
    return s;
  };

  const double width = 960;
  const double height = roi.empty() ? 340 : 640;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  line_panel(svg, {20, 40, 450, 280}, "A  Mean absolute error", "MAE", to_series(mae));
  line_panel(svg, {490, 40, 450, 280}, "A  Structural similarity", "SSIM", to_series(ssim));
  if (!roi.empty()) {
    std::vector<std::string> groups;
    for (const char* g : {"CN", "MCI", "Dementia"}) {
      if (roi.count(g)) groups.push_back(g);
    }
    for (const auto& [g, m] : roi) {
      if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    }
    const double pw = (width - 40 - 20 * (groups.size() - 1)) / static_cast<double>(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
      line_panel(svg, {20 + i * (pw + 20), 370, pw, 250}, "B  Meta-ROI SUVR: " + groups[i], "SUVR",
                 to_series(roi[groups[i]]));
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace longipet
