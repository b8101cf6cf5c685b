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

#include "ssid/embedding_store.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ssid/errors.hpp"

namespace ssid {

void EmbeddingStore::add(const std::string& utt_id, std::span<const float> v) {
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (v.size() != static_cast<size_t>(dim_) || dim_ == 0) {
    throw DataError("embedding for '" + utt_id + "' has dimension " + std::to_string(v.size()) +
                    ", expected " + std::to_string(dim_));
  }
  for (float x : v) {
    if (!std::isfinite(x)) throw DataError("non-finite embedding for '" + utt_id + "'");
  }
  if (!index_.emplace(utt_id, ids_.size()).second) {
    throw DataError("duplicate embedding id '" + utt_id + "'");
  }
  ids_.push_back(utt_id);
  data_.insert(data_.end(), v.begin(), v.end());
}

std::span<const float> EmbeddingStore::at(const std::string& utt_id) const {
  const auto it = index_.find(utt_id);
  if (it == index_.end()) throw DataError("no embedding for '" + utt_id + "'");
  return {data_.data() + it->second * dim_, static_cast<size_t>(dim_)};
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write embedding store: " + path.string());
  const uint32_t version = 1, dim = static_cast<uint32_t>(dim_);
  const uint64_t count = ids_.size();
  os.write("SEMB", 4);
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&dim), 4);
  os.write(reinterpret_cast<const char*>(&count), 8);
  for (size_t i = 0; i < ids_.size(); ++i) {
    const auto len = static_cast<uint32_t>(ids_[i].size());
    os.write(reinterpret_cast<const char*>(&len), 4);
    os.write(ids_[i].data(), len);
    os.write(reinterpret_cast<const char*>(data_.data() + i * dim_),
             static_cast<std::streamsize>(dim_ * sizeof(float)));
  }
  if (!os) throw DataError("write failed: " + path.string());
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open embedding store: " + path.string());
  char magic[4];
  uint32_t version = 0, dim = 0;
  uint64_t count = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&dim), 4);
  is.read(reinterpret_cast<char*>(&count), 8);
  if (!is || std::memcmp(magic, "SEMB", 4) != 0 || version != 1) {
    throw DataError("bad embedding store header: " + path.string());
  }
  EmbeddingStore store(static_cast<int>(dim));
  std::vector<float> v(dim);
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), 4);
    std::string id(len, '\0');
    is.read(id.data(), len);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!is) throw DataError("truncated embedding store: " + path.string());
    store.add(id, v);
  }
  return store;
}

}  // namespace ssid
