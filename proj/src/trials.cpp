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

#include "ssid/trials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ssid/errors.hpp"
#include "ssid/parallel.hpp"
#include "ssid/rng.hpp"

namespace ssid {

std::string to_string(TrialTask t) {
  return t == TrialTask::kGenuineSv ? "genuine_sv" : "source_id";
}

TrialSet::TrialSet(std::vector<Trial> t, TrialTask task_) : trials(std::move(t)), task(task_) {
  for (const Trial& tr : trials) (tr.label ? n_true : n_false)++;
}

void TrialSet::validate() const {
  size_t t = 0, f = 0;
  for (const Trial& tr : trials) (tr.label ? t : f)++;
  if (t != n_true || f != n_false) {
    throw DataError("trial counts (" + std::to_string(n_true) + ", " + std::to_string(n_false) +
                    ") disagree with recount (" + std::to_string(t) + ", " + std::to_string(f) + ")");
  }
}

TrialSet parse_trials(std::istream& is, const std::string& source_name, TrialTask task) {
  std::vector<Trial> trials;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string label, enroll, test, extra;
    if (!(ls >> label >> enroll >> test) || (ls >> extra) || (label != "0" && label != "1")) {
      throw DataError(source_name + ":" + std::to_string(lineno) +
                      ": expected 'label(0|1) enroll_utt_id test_utt_id'");
    }
    trials.push_back({enroll, test, label == "1"});
  }
  return TrialSet(std::move(trials), task);
}

TrialSet load_genuine_trials(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open trial list: " + path.string());
  return parse_trials(is, path.string(), TrialTask::kGenuineSv);
}

void write_trials(const std::filesystem::path& path, const TrialSet& set) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write trial list: " + path.string());
  for (const Trial& t : set.trials) {
    os << (t.label ? 1 : 0) << ' ' << t.enroll_utt_id << ' ' << t.test_utt_id << '\n';
  }
  if (!os) throw DataError("write failed: " + path.string());
}

TrialSet make_genuine_trials(std::span<const UtteranceRecord> records, size_t n_per_class,
                             uint64_t seed) {
  std::vector<std::pair<size_t, size_t>> same, diff;
  for (size_t i = 0; i < records.size(); ++i) {
    for (size_t j = i + 1; j < records.size(); ++j) {
      (records[i].speaker_id == records[j].speaker_id ? same : diff).emplace_back(i, j);
    }
  }
  if (same.size() < n_per_class || diff.size() < n_per_class) {
    throw DataError("not enough utterance pairs for " + std::to_string(n_per_class) +
                    " trials per class");
  }
  Rng rng(seed);
  const auto draw = [&](std::vector<std::pair<size_t, size_t>>& pool) {
    for (size_t a = 0; a < n_per_class; ++a) {
      std::swap(pool[a], pool[a + uniform_index(rng, pool.size() - a)]);
    }
    pool.resize(n_per_class);
  };
  draw(same);
  draw(diff);
  std::vector<Trial> trials;
  trials.reserve(2 * n_per_class);
  // Interleave so that any prefix stays roughly balanced.
  for (size_t k = 0; k < n_per_class; ++k) {
    trials.push_back({records[same[k].first].utt_id, records[same[k].second].utt_id, true});
    trials.push_back({records[diff[k].first].utt_id, records[diff[k].second].utt_id, false});
  }
  return TrialSet(std::move(trials), TrialTask::kGenuineSv);
}

ConversionIndex build_conversion_index(const TrainingManifest& converted,
                                       const std::string& vc_model_id) {
  ConversionIndex index;
  for (const UtteranceRecord& r : converted.records()) {
    if (r.conversion && r.conversion->vc_model_id == vc_model_id) {
      index[r.conversion->target_utt_id].push_back(r);
    }
  }
  return index;
}

TrialSet expand_source_id_trials(const TrialSet& base, const ConversionIndex& conversions,
                                 int attackers_per_target) {
  const auto versions = [&](const std::string& utt) -> const std::vector<UtteranceRecord>& {
    const auto it = conversions.find(utt);
    if (it == conversions.end()) throw DataError("no converted versions of '" + utt + "'");
    if (it->second.size() != static_cast<size_t>(attackers_per_target)) {
      throw DataError("'" + utt + "' has " + std::to_string(it->second.size()) +
                      " converted versions, expected " + std::to_string(attackers_per_target));
    }
    return it->second;
  };
  std::vector<Trial> out;
  out.reserve(base.size() * attackers_per_target * attackers_per_target);
  for (const Trial& t : base.trials) {
    const auto& enroll = versions(t.enroll_utt_id);
    const auto& test = versions(t.test_utt_id);
    for (const UtteranceRecord& e : enroll) {
      for (const UtteranceRecord& x : test) {
        out.push_back({e.utt_id, x.utt_id,
                       e.conversion->source_speaker_id == x.conversion->source_speaker_id});
      }
    }
  }
  return TrialSet(std::move(out), TrialTask::kSourceId);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DataError("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (!(na > 0.0 && nb > 0.0)) throw DataError("cosine_similarity: zero-norm embedding");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<ScoredTrial> score_trials(const EmbeddingStore& embeddings, const TrialSet& set) {
  std::vector<ScoredTrial> out(set.size());
  parallel_for(static_cast<std::ptrdiff_t>(set.size()), [&](std::ptrdiff_t i) {
    const Trial& t = set.trials[i];
    out[i] = {t, cosine_similarity(embeddings.at(t.enroll_utt_id), embeddings.at(t.test_utt_id))};
  });
  return out;
}

void write_scores(const std::filesystem::path& path, std::span<const ScoredTrial> scores) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write score file: " + path.string());
  char buf[64];
  for (const ScoredTrial& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.9g", s.score);
    os << (s.trial.label ? 1 : 0) << ' ' << s.trial.enroll_utt_id << ' ' << s.trial.test_utt_id
       << ' ' << buf << '\n';
  }
  if (!os) throw DataError("write failed: " + path.string());
}

std::vector<ScoredTrial> load_scores(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open score file: " + path.string());
  std::vector<ScoredTrial> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string label, enroll, test;
    double score = 0.0;
    if (!(ls >> label >> enroll >> test >> score) || (label != "0" && label != "1") ||
        !std::isfinite(score)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 'label enroll_utt_id test_utt_id score'");
    }
    out.push_back({{enroll, test, label == "1"}, score});
  }
  return out;
}

}  // namespace ssid
