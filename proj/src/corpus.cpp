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

#include "ssid/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ssid/errors.hpp"
#include "ssid/rng.hpp"

namespace ssid {

std::string to_string(Origin o) {
  switch (o) {
    case Origin::kGenuineSource: return "genuine_source";
    case Origin::kGenuineTarget: return "genuine_target";
    case Origin::kConverted: return "converted";
  }
  return "?";
}

std::string to_string(MediaKind k) { return k == MediaKind::kWav ? "wav" : "feat"; }

Origin parse_origin(const std::string& s) {
  if (s == "genuine_source") return Origin::kGenuineSource;
  if (s == "genuine_target") return Origin::kGenuineTarget;
  if (s == "converted") return Origin::kConverted;
  throw DataError("unknown origin '" + s + "'");
}

MediaKind parse_media_kind(const std::string& s) {
  if (s == "wav") return MediaKind::kWav;
  if (s == "feat") return MediaKind::kFeat;
  throw DataError("unknown media kind '" + s + "'");
}

const std::string& training_label(const UtteranceRecord& r) {
  return r.conversion ? r.conversion->source_speaker_id : r.speaker_id;
}

namespace {

// Record-local invariants. Returns an empty string when the record is valid.
std::string check_record(const UtteranceRecord& r, const ManifestOptions* opts) {
  if (r.utt_id.empty()) return "empty utt_id";
  if (r.media_path.empty()) return "empty media path";
  if (r.speaker_id.empty()) return "empty speaker_id";
  const bool converted = r.origin == Origin::kConverted;
  if (converted != r.conversion.has_value()) {
    return converted ? "converted record without conversion fields"
                     : "genuine record carries conversion fields";
  }
  if (!converted) return {};
  const ConversionRecord& c = *r.conversion;
  if (c.source_utt_id.empty() || c.source_speaker_id.empty() || c.target_utt_id.empty() ||
      c.target_speaker_id.empty() || c.vc_model_id.empty()) {
    return "converted record with empty conversion field";
  }
  if (r.speaker_id != c.source_speaker_id) {
    if (r.speaker_id == c.target_speaker_id) {
      return "converted record labeled with its target speaker '" + r.speaker_id +
             "'; the label must be the source speaker '" + c.source_speaker_id + "'";
    }
    return "converted record label '" + r.speaker_id + "' differs from its source speaker '" +
           c.source_speaker_id + "'";
  }
  if (opts != nullptr && opts->vc_models && !opts->vc_models->contains(c.vc_model_id)) {
    return "unknown vc_model_id '" + c.vc_model_id + "'";
  }
  return {};
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

TrainingManifest::TrainingManifest(std::vector<UtteranceRecord> records,
                                   std::filesystem::path base_dir)
    : records_(std::move(records)), base_dir_(std::move(base_dir)) {
  std::set<std::string> labels;
  for (size_t i = 0; i < records_.size(); ++i) {
    const UtteranceRecord& r = records_[i];
    if (auto why = check_record(r, nullptr); !why.empty()) {
      throw DataError("record '" + r.utt_id + "': " + why);
    }
    if (!index_.emplace(r.utt_id, i).second) throw DataError("duplicate utt_id '" + r.utt_id + "'");
    label_map_.emplace(r.utt_id, training_label(r));
    labels.insert(training_label(r));
  }
  // Speaker consistency of conversion provenance, where the referenced
  // utterance is part of this manifest.
  for (const UtteranceRecord& r : records_) {
    if (!r.conversion) continue;
    const auto check = [&](const std::string& utt, const std::string& spk, const char* side) {
      if (const UtteranceRecord* ref = find(utt); ref != nullptr && ref->speaker_id != spk) {
        throw DataError("record '" + r.utt_id + "': " + side + " speaker '" + spk +
                        "' does not match speaker '" + ref->speaker_id + "' of '" + utt + "'");
      }
    };
    check(r.conversion->source_utt_id, r.conversion->source_speaker_id, "source");
    check(r.conversion->target_utt_id, r.conversion->target_speaker_id, "target");
  }
  inventory_.assign(labels.begin(), labels.end());
}

int TrainingManifest::label_index(const std::string& utt_id) const {
  const auto it = label_map_.find(utt_id);
  if (it == label_map_.end()) throw DataError("unknown utt_id '" + utt_id + "'");
  const auto pos = std::lower_bound(inventory_.begin(), inventory_.end(), it->second);
  return static_cast<int>(pos - inventory_.begin());
}

const UtteranceRecord* TrainingManifest::find(const std::string& utt_id) const {
  const auto it = index_.find(utt_id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::filesystem::path TrainingManifest::resolve_media(const UtteranceRecord& r) const {
  const std::filesystem::path p(r.media_path);
  return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
}

size_t TrainingManifest::count(Origin origin) const {
  return static_cast<size_t>(std::count_if(records_.begin(), records_.end(),
                                           [&](const auto& r) { return r.origin == origin; }));
}

TrainingManifest parse_manifest(std::istream& is, const std::string& source_name,
                                const std::filesystem::path& base_dir,
                                const ManifestOptions& opts) {
  std::vector<UtteranceRecord> records;
  std::map<std::string, int> first_line;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fail = [&](const std::string& why) {
      return DataError(source_name + ":" + std::to_string(lineno) + ": " + why);
    };
    const auto f = split_tabs(line);
    if (f.size() != 5 && f.size() != 10) {
      throw fail("expected 5 or 10 tab-separated fields, got " + std::to_string(f.size()));
    }
    UtteranceRecord r;
    try {
      r.utt_id = f[0];
      r.media_path = f[1];
      r.media_kind = parse_media_kind(f[2]);
      r.speaker_id = f[3];
      r.origin = parse_origin(f[4]);
    } catch (const DataError& e) {
      throw fail(e.what());
    }
    if (f.size() == 10) r.conversion = ConversionRecord{f[5], f[6], f[7], f[8], f[9]};
    if (auto why = check_record(r, &opts); !why.empty()) throw fail(why);
    if (auto [it, fresh] = first_line.emplace(r.utt_id, lineno); !fresh) {
      throw fail("duplicate utt_id '" + r.utt_id + "' (first seen on line " +
                 std::to_string(it->second) + ")");
    }
    records.push_back(std::move(r));
  }
  try {
    return TrainingManifest(std::move(records), base_dir);
  } catch (const DataError& e) {
    throw DataError(source_name + ": " + e.what());
  }
}

TrainingManifest load_manifest(const std::filesystem::path& path, const ManifestOptions& opts) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest: " + path.string());
  return parse_manifest(is, path.string(), path.parent_path(), opts);
}

void write_manifest(std::ostream& os, const TrainingManifest& manifest) {
  os << "# utt_id\tmedia_path\tmedia_kind\tspeaker_id\torigin"
        "\t[source_utt_id\tsource_speaker_id\ttarget_utt_id\ttarget_speaker_id\tvc_model_id]\n";
  for (const UtteranceRecord& r : manifest.records()) {
    os << r.utt_id << '\t' << r.media_path << '\t' << to_string(r.media_kind) << '\t'
       << r.speaker_id << '\t' << to_string(r.origin);
    if (r.conversion) {
      const ConversionRecord& c = *r.conversion;
      os << '\t' << c.source_utt_id << '\t' << c.source_speaker_id << '\t' << c.target_utt_id
         << '\t' << c.target_speaker_id << '\t' << c.vc_model_id;
    }
    os << '\n';
  }
}

void write_manifest(const std::filesystem::path& path, const TrainingManifest& manifest) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write manifest: " + path.string());
  write_manifest(os, manifest);
  if (!os) throw DataError("write failed: " + path.string());
}

std::vector<ConversionPair> sample_conversion_pairs(std::span<const UtteranceRecord> targets,
                                                    std::span<const UtteranceRecord> sources,
                                                    int attackers_per_target, uint64_t seed) {
  if (attackers_per_target < 1) throw ConfigError("attackers_per_target must be >= 1");
  if (sources.empty()) throw DataError("no source utterances to sample attackers from");

  // Speakers in sorted order, utterances in input order.
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < sources.size(); ++i) by_speaker[sources[i].speaker_id].push_back(i);
  std::vector<const std::vector<size_t>*> speakers;
  for (const auto& [spk, utts] : by_speaker) speakers.push_back(&utts);
  const size_t n_spk = speakers.size();
  if (n_spk < static_cast<size_t>(attackers_per_target)) {
    throw DataError("need " + std::to_string(attackers_per_target) +
                    " distinct source speakers per target, only " + std::to_string(n_spk) +
                    " available");
  }

  Rng rng(seed);
  std::vector<size_t> perm(n_spk);
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::vector<ConversionPair> pairs;
  pairs.reserve(targets.size() * attackers_per_target);
  for (const UtteranceRecord& target : targets) {
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (int a = 0; a < attackers_per_target; ++a) {
      const size_t j = a + uniform_index(rng, n_spk - a);
      std::swap(perm[a], perm[j]);
    }
    for (int a = 0; a < attackers_per_target; ++a) {
      const auto& utts = *speakers[perm[a]];
      const size_t pick = utts[uniform_index(rng, utts.size())];
      pairs.push_back({sources[pick].utt_id, target.utt_id});
    }
  }
  return pairs;
}

std::vector<UtteranceRecord> sample_subset(std::span<const UtteranceRecord> records,
                                           double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("subset fraction must be in (0, 1]");
  const auto k = static_cast<size_t>(std::llround(fraction * static_cast<double>(records.size())));
  std::vector<size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng rng(seed);
  for (size_t a = 0; a < k; ++a) std::swap(idx[a], idx[a + uniform_index(rng, idx.size() - a)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<UtteranceRecord> out;
  out.reserve(k);
  for (size_t i : idx) out.push_back(records[i]);
  return out;
}

TrainingManifest compose_training_set(const TrainingManifest* genuine_source,
                                      const TrainingManifest& genuine_target,
                                      std::span<const TrainingManifest> converted,
                                      const std::set<std::string>& include_vc) {
  std::vector<UtteranceRecord> records;
  const auto absolutize = [](const TrainingManifest& m, UtteranceRecord r) {
    r.media_path = m.resolve_media(r).string();
    return r;
  };
  const auto add_genuine = [&](const TrainingManifest& m, Origin expected) {
    for (const UtteranceRecord& r : m.records()) {
      if (r.origin != expected) {
        throw DataError("record '" + r.utt_id + "' has origin " + to_string(r.origin) +
                        ", expected " + to_string(expected));
      }
      records.push_back(absolutize(m, r));
    }
  };
  if (genuine_source != nullptr) add_genuine(*genuine_source, Origin::kGenuineSource);
  add_genuine(genuine_target, Origin::kGenuineTarget);

  std::vector<UtteranceRecord> conv;
  for (const TrainingManifest& m : converted) {
    for (const UtteranceRecord& r : m.records()) {
      if (r.origin != Origin::kConverted) {
        throw DataError("record '" + r.utt_id + "' in a converted manifest is not converted");
      }
      if (include_vc.contains(r.conversion->vc_model_id)) conv.push_back(absolutize(m, r));
    }
  }
  std::sort(conv.begin(), conv.end(), [](const UtteranceRecord& a, const UtteranceRecord& b) {
    return std::tie(a.conversion->vc_model_id, a.utt_id) <
           std::tie(b.conversion->vc_model_id, b.utt_id);
  });
  records.insert(records.end(), std::make_move_iterator(conv.begin()),
                 std::make_move_iterator(conv.end()));

  std::set<std::string> seen;
  for (const UtteranceRecord& r : records) {
    if (!seen.insert(r.utt_id).second) {
      throw DataError("utt_id collision across partitions: '" + r.utt_id + "'");
    }
  }
  return TrainingManifest(std::move(records));
}

}  // namespace ssid
