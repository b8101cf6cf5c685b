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
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ssid {

enum class Origin { kGenuineSource, kGenuineTarget, kConverted };
enum class MediaKind { kWav, kFeat };

std::string to_string(Origin o);
std::string to_string(MediaKind k);
Origin parse_origin(const std::string& s);
MediaKind parse_media_kind(const std::string& s);

// Provenance of one converted utterance x_{s->t} produced by model vc_model_id.
struct ConversionRecord {
  std::string source_utt_id;
  std::string source_speaker_id;
  std::string target_utt_id;
  std::string target_speaker_id;
  std::string vc_model_id;

  bool operator==(const ConversionRecord&) const = default;
};

struct UtteranceRecord {
  std::string utt_id;
  std::string media_path;
  MediaKind media_kind = MediaKind::kWav;
  // True speaker for genuine records. For converted records this column
  // carries the training identity, which must be the source speaker.
  std::string speaker_id;
  Origin origin = Origin::kGenuineTarget;
  // Seconds; 0 when unknown. Not serialized, the manifest line has no column
  // for it.
  double duration_s = 0.0;
  std::optional<ConversionRecord> conversion;

  bool operator==(const UtteranceRecord& o) const {
    return utt_id == o.utt_id && media_path == o.media_path && media_kind == o.media_kind &&
           speaker_id == o.speaker_id && origin == o.origin && conversion == o.conversion;
  }
};

// Training label of a record: the source speaker for converted speech, the
// true speaker otherwise.
const std::string& training_label(const UtteranceRecord& r);

// A validated set of records with its training labels.
class TrainingManifest {
 public:
  TrainingManifest() = default;
  // Validates every record invariant; throws DataError naming the record.
  explicit TrainingManifest(std::vector<UtteranceRecord> records,
                            std::filesystem::path base_dir = {});

  const std::vector<UtteranceRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::map<std::string, std::string>& label_map() const { return label_map_; }
  // Sorted distinct training labels; the classifier width.
  const std::vector<std::string>& speaker_inventory() const { return inventory_; }
  int label_index(const std::string& utt_id) const;
  const UtteranceRecord* find(const std::string& utt_id) const;

  // Media paths in the manifest are relative to this directory unless absolute.
  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::filesystem::path resolve_media(const UtteranceRecord& r) const;

  size_t count(Origin origin) const;

 private:
  std::vector<UtteranceRecord> records_;
  std::filesystem::path base_dir_;
  std::map<std::string, std::string> label_map_;
  std::vector<std::string> inventory_;
  std::map<std::string, size_t> index_;
};

struct ManifestOptions {
  // Registered VC model ids; when set, converted records naming any other id
  // are rejected.
  std::optional<std::set<std::string>> vc_models;
};

// Tab-separated, one record per line, '#' comments:
//   utt_id media_path media_kind speaker_id origin
//     [source_utt_id source_speaker_id target_utt_id target_speaker_id vc_model_id]
// with the bracketed fields present iff origin == converted.
TrainingManifest load_manifest(const std::filesystem::path& path, const ManifestOptions& opts = {});
TrainingManifest parse_manifest(std::istream& is, const std::string& source_name,
                                const std::filesystem::path& base_dir,
                                const ManifestOptions& opts = {});
void write_manifest(const std::filesystem::path& path, const TrainingManifest& manifest);
void write_manifest(std::ostream& os, const TrainingManifest& manifest);

struct ConversionPair {
  std::string source_utt_id;
  std::string target_utt_id;

  bool operator==(const ConversionPair&) const = default;
};

// For each target (in order) draws `attackers_per_target` distinct source
// speakers via a seeded partial Fisher-Yates shuffle, then one utterance of
// each drawn speaker uniformly. Output is grouped by target in input order.
std::vector<ConversionPair> sample_conversion_pairs(std::span<const UtteranceRecord> targets,
                                                    std::span<const UtteranceRecord> sources,
                                                    int attackers_per_target, uint64_t seed);

// Seeded uniform subset of round(fraction * n) records, kept in input order.
std::vector<UtteranceRecord> sample_subset(std::span<const UtteranceRecord> records,
                                           double fraction, uint64_t seed);

// D = Ds u Dt u Dc,1 u ... u Dc,K. Converted records are kept only when their
// vc_model_id is in include_vc, and are ordered canonically by
// (vc_model_id, utt_id) so the result does not depend on the order of
// `converted`. Pass genuine_source = nullptr for the NoVC configuration.
TrainingManifest compose_training_set(const TrainingManifest* genuine_source,
                                      const TrainingManifest& genuine_target,
                                      std::span<const TrainingManifest> converted,
                                      const std::set<std::string>& include_vc);

}  // namespace ssid
