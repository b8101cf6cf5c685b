// Copyright 2026 The ssid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ssid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "ssid/errors.hpp"

namespace ssid {

ScoredTrialSet ScoredTrialSet::from(std::span<const ScoredTrial> scored) {
  ScoredTrialSet s;
  s.scores.reserve(scored.size());
  s.labels.reserve(scored.size());
  for (const ScoredTrial& t : scored) {
    s.scores.push_back(t.score);
    s.labels.push_back(t.trial.label ? 1 : 0);
  }
  return s;
}

void ScoredTrialSet::validate() const {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  if (scores.empty()) throw DataError("empty scored trial set");
  bool pos = false, neg = false;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("non-finite score");
    (labels[i] ? pos : neg) = true;
  }
  if (!pos || !neg) throw DataError("EER needs both target and non-target trials");
}

namespace {

// Vertices for every unique score (ascending) followed by the +inf vertex.
std::vector<RocPoint> sweep(std::span<const double> scores, std::span<const uint8_t> labels) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  size_t n_pos = 0;
  for (uint8_t l : labels) n_pos += l ? 1 : 0;
  const size_t n_neg = labels.size() - n_pos;

  std::vector<RocPoint> pts;
  size_t pos_below = 0, neg_below = 0;
  size_t i = 0;
  while (i < order.size()) {
    const double theta = scores[order[i]];
    pts.push_back({theta, static_cast<double>(n_neg - neg_below) / static_cast<double>(n_neg),
                   static_cast<double>(pos_below) / static_cast<double>(n_pos)});
    while (i < order.size() && scores[order[i]] == theta) {
      (labels[order[i]] ? pos_below : neg_below)++;
      ++i;
    }
  }
  pts.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return pts;
}

}  // namespace

EerResult eer(std::span<const double> scores, std::span<const uint8_t> labels) {
  ScoredTrialSet check{{scores.begin(), scores.end()}, {labels.begin(), labels.end()}};
  check.validate();
  const std::vector<RocPoint> pts = sweep(scores, labels);
  // FAR - FRR is non-increasing along the sweep, from 1 to -1.
  for (size_t k = 1; k < pts.size(); ++k) {
    const double d = pts[k].far - pts[k].frr;
    if (d == 0.0) return {pts[k].far, pts[k].threshold};
    if (d < 0.0) {
      const RocPoint& a = pts[k - 1];
      const RocPoint& b = pts[k];
      const double da = a.far - a.frr;
      const double alpha = da / (da - d);
      EerResult r;
      r.eer = a.far + alpha * (b.far - a.far);
      r.threshold = std::isinf(b.threshold) ? a.threshold
                                            : a.threshold + alpha * (b.threshold - a.threshold);
      return r;
    }
  }
  // Unreachable: the +inf vertex has FAR - FRR = -1.
  throw std::logic_error("eer: sweep did not cross");
}

EerResult eer(const ScoredTrialSet& scored) { return eer(scored.scores, scored.labels); }

std::vector<RocPoint> roc_points(const ScoredTrialSet& scored) {
  scored.validate();
  return sweep(scored.scores, scored.labels);
}

ReportMatrix report_matrix(const std::vector<std::string>& systems,
                           const std::vector<std::string>& test_sets,
                           const std::map<CellKey, double>& results,
                           const std::map<CellKey, bool>& seen) {
  ReportMatrix m;
  m.systems = systems;
  m.test_sets = test_sets;
  for (const std::string& s : systems) {
    std::vector<double> row;
    std::vector<bool> seen_row;
    for (const std::string& t : test_sets) {
      const auto r = results.find({s, t});
      const auto v = seen.find({s, t});
      if (r == results.end() || v == seen.end()) {
        throw DataError("report matrix is missing cell (" + s + ", " + t + ")");
      }
      row.push_back(r->second);
      seen_row.push_back(v->second);
    }
    m.eer.push_back(std::move(row));
    m.seen.push_back(std::move(seen_row));
  }
  return m;
}

std::string render_table(const ReportMatrix& m) {
  size_t name_w = 6;
  for (const auto& s : m.systems) name_w = std::max(name_w, s.size());
  size_t col_w = 9;
  for (const auto& t : m.test_sets) col_w = std::max(col_w, t.size() + 1);
  std::ostringstream os;
  const auto pad = [](const std::string& s, size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };
  os << "Model" << std::string(name_w - 5, ' ');
  for (const auto& t : m.test_sets) os << ' ' << pad(t, col_w);
  os << '\n';
  char buf[32];
  for (size_t i = 0; i < m.systems.size(); ++i) {
    os << m.systems[i] << std::string(name_w - m.systems[i].size(), ' ');
    for (size_t j = 0; j < m.test_sets.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.2f%%%s", 100.0 * m.eer[i][j], m.seen[i][j] ? " " : "*");
      os << ' ' << pad(buf, col_w);
    }
    os << '\n';
  }
  os << "(* = VC model not used in training)\n";
  return os.str();
}

std::string render_csv(const ReportMatrix& m) {
  std::ostringstream os;
  os << "system,test_set,eer,seen\n";
  char buf[32];
  for (size_t i = 0; i < m.systems.size(); ++i) {
    for (size_t j = 0; j < m.test_sets.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.6f", m.eer[i][j]);
      os << m.systems[i] << ',' << m.test_sets[j] << ',' << buf << ','
         << (m.seen[i][j] ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

}  // namespace ssid
