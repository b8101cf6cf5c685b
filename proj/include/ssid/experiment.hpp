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
#include <set>
#include <string>
#include <vector>

#include "ssid/augment.hpp"
#include "ssid/features.hpp"
#include "ssid/metrics.hpp"
#include "ssid/mockvc.hpp"
#include "ssid/network.hpp"
#include "ssid/trainer.hpp"

namespace ssid {

struct CorpusPaths {
  std::filesystem::path train_source;  // genuine source speakers (attackers)
  std::filesystem::path train_target;  // genuine target speakers
  std::filesystem::path test_source;   // attackers of the evaluation set
  std::filesystem::path test_target;   // evaluation speakers
};

struct Seeds {
  uint64_t data = 1;   // conversion pair sampling
  uint64_t train = 1;  // initialization, shuffling, crops, augmentation
  uint64_t eval = 1;   // trial sampling
};

// One system of the experiment matrix. The classifier width in `network` is
// replaced by the size of the composed training inventory.
struct ExperimentConfig {
  std::string system_name;
  std::set<std::string> include_vc;
  std::vector<MockVCConfig> vc_models;  // every model used in training or testing
  std::vector<std::string> test_sets;   // VC model ids evaluated for source ID
  CorpusPaths corpora;
  FrontEndConfig front_end;
  NetworkConfig network = NetworkConfig::desk();
  TrainConfig train;
  AugmentPolicy augment;
  Seeds seeds;
  int attackers_per_target = 3;
  int genuine_trials_per_class = 500;

  // NoVC <-> no VC data; VC1-<id> <-> exactly {id}; VC<k>[-<ids>] <-> k
  // models (the suffix, when present, spells the sorted ids).
  void validate() const;
  const MockVCConfig& vc_model(const std::string& id) const;
};

// Paths inside the config are resolved against the config file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir);
std::string to_json_text(const ExperimentConfig& cfg);

// Name of the genuine-verification column in reports.
inline const std::string kGenuineTestSet = "genuine";

struct TestResult {
  std::string test_set;  // kGenuineTestSet or a VC model id
  TrialTask task = TrialTask::kGenuineSv;
  size_t n_trials = 0;
  size_t n_true = 0;
  EerResult eer;
};

struct ExperimentResult {
  std::filesystem::path system_dir;
  std::vector<TestResult> results;
  std::string report_csv;
  bool trained = false;  // false when a finished checkpoint was reused
};

// prepare -> convert -> train -> extract -> trials -> score -> report.
// Stage outputs live under run_dir in directories named by a hash of the
// stage inputs, so finished stages are reused (converted features are
// shared between systems). Writes report.csv and artifacts.json (SHA-256 of
// every artifact) into the system directory.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& run_dir);

struct MatrixResult {
  ReportMatrix matrix;
  std::vector<ExperimentResult> systems;
};

// Runs or reuses every system; all systems must declare the same test sets.
MatrixResult run_matrix(const std::vector<ExperimentConfig>& configs,
                        const std::filesystem::path& run_dir);

// Hex SHA-256 digests.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace ssid
