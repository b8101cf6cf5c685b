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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ssid {

struct SpeakerEmbedding {
  std::string utt_id;
  std::vector<float> vector;
};

// utt_id -> float32 vector table. On disk: "SEMB", uint32 version (1),
// uint32 dim, uint64 count, then per entry uint32 id length, id bytes and
// dim little-endian floats.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(int dim = 0) : dim_(dim) {}

  int dim() const { return dim_; }
  size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  // Throws on a duplicate id, a dimension mismatch or non-finite entries.
  void add(const std::string& utt_id, std::span<const float> v);
  bool contains(const std::string& utt_id) const { return index_.contains(utt_id); }
  // Throws DataError for an unknown id.
  std::span<const float> at(const std::string& utt_id) const;

  void save(const std::filesystem::path& path) const;
  static EmbeddingStore load(const std::filesystem::path& path);

 private:
  int dim_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::map<std::string, size_t> index_;
};

}  // namespace ssid
