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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ssid/corpus.hpp"
#include "ssid/embedding_store.hpp"

namespace ssid {

struct Trial {
  std::string enroll_utt_id;
  std::string test_utt_id;
  bool label = false;  // same identity under the task's definition

  bool operator==(const Trial&) const = default;
};

enum class TrialTask { kGenuineSv, kSourceId };
std::string to_string(TrialTask t);

struct TrialSet {
  std::vector<Trial> trials;
  TrialTask task = TrialTask::kGenuineSv;
  size_t n_true = 0;
  size_t n_false = 0;

  TrialSet() = default;
  TrialSet(std::vector<Trial> t, TrialTask task_);

  size_t size() const { return trials.size(); }
  // Recounts labels; throws DataError if the stored counts disagree.
  void validate() const;
};

// "label enroll_utt_id test_utt_id" per line, label in {0, 1},
// whitespace-separated.
TrialSet load_genuine_trials(const std::filesystem::path& path);
TrialSet parse_trials(std::istream& is, const std::string& source_name, TrialTask task);
void write_trials(const std::filesystem::path& path, const TrialSet& set);

// Balanced genuine-verification list over the records: n_per_class
// same-speaker and n_per_class different-speaker pairs, distinct and
// unordered, drawn with the seed.
TrialSet make_genuine_trials(std::span<const UtteranceRecord> records, size_t n_per_class,
                             uint64_t seed);

// target_utt_id -> converted records of that target, in manifest order.
using ConversionIndex = std::map<std::string, std::vector<UtteranceRecord>>;

// Index of the converted records produced by one VC model.
ConversionIndex build_conversion_index(const TrainingManifest& converted,
                                       const std::string& vc_model_id);

// Replaces every base trial (e, t) by the a x a pairs of their converted
// versions (e_i, t_j), labeled true iff the two share a source speaker.
// The base label is discarded. Every base utterance must have exactly
// attackers_per_target converted versions.
TrialSet expand_source_id_trials(const TrialSet& base, const ConversionIndex& conversions,
                                 int attackers_per_target = 3);

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Cosine score per trial, in trial order. Scoring is sharded over threads.
std::vector<ScoredTrial> score_trials(const EmbeddingStore& embeddings, const TrialSet& set);

// "label enroll test score" per line.
void write_scores(const std::filesystem::path& path, std::span<const ScoredTrial> scores);
std::vector<ScoredTrial> load_scores(const std::filesystem::path& path);

}  // namespace ssid
