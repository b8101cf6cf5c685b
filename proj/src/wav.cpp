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

#include "ssid/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ssid/errors.hpp"

namespace ssid {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

namespace {

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open wav file: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) {
    return DataError("bad wav file " + path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("missing RIFF/WAVE header");
  }

  Waveform wave;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* chunk = bytes.data() + pos;
    const auto size = read_le<uint32_t>(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size()) throw fail("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw fail("short fmt chunk");
      const auto format = read_le<uint16_t>(bytes.data() + body);
      const auto channels = read_le<uint16_t>(bytes.data() + body + 2);
      wave.sample_rate = static_cast<int>(read_le<uint32_t>(bytes.data() + body + 4));
      const auto bits = read_le<uint16_t>(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw fail("only 16-bit mono PCM is supported");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      const size_t n = size / 2;
      wave.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        wave.samples[i] = read_le<int16_t>(bytes.data() + body + 2 * i) / 32768.0f;
      }
      return wave;
    }
    pos = body + size + (size & 1u);
  }
  throw fail("no data chunk");
}

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write wav file: " + path.string());
  const auto data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  os.write("RIFF", 4);
  put_le<uint32_t>(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  put_le<uint32_t>(os, 16);
  put_le<uint16_t>(os, 1);
  put_le<uint16_t>(os, 1);
  put_le<uint32_t>(os, static_cast<uint32_t>(wave.sample_rate));
  put_le<uint32_t>(os, static_cast<uint32_t>(wave.sample_rate) * 2);
  put_le<uint16_t>(os, 2);
  put_le<uint16_t>(os, 16);
  os.write("data", 4);
  put_le<uint32_t>(os, data_bytes);
  for (float s : wave.samples) {
    const long q = std::clamp(std::lrint(s * 32768.0f), -32768L, 32767L);
    put_le<int16_t>(os, static_cast<int16_t>(q));
  }
  if (!os) throw DataError("write failed: " + path.string());
}

}  // namespace ssid
