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
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssid/trials.hpp"

namespace ssid {

struct ScoredTrialSet {
  std::vector<double> scores;
  std::vector<uint8_t> labels;  // 1 = target (same identity)

  static ScoredTrialSet from(std::span<const ScoredTrial> scored);
  // Equal lengths, finite scores, both classes present.
  void validate() const;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Threshold sweep over the sorted unique scores with the rule "accept iff
// score >= theta", plus theta = +inf. FAR = false accepts / negatives, FRR =
// false rejects / positives. The EER is read at the vertex where FAR == FRR,
// or linearly interpolated between the two adjacent vertices where FAR - FRR
// changes sign; the threshold is interpolated the same way (the highest
// score is returned when the crossing lies beyond it).
EerResult eer(const ScoredTrialSet& scored);
EerResult eer(std::span<const double> scores, std::span<const uint8_t> labels);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

// Every sweep vertex, in increasing threshold order (for DET/ROC plots).
std::vector<RocPoint> roc_points(const ScoredTrialSet& scored);

// Systems x test sets grid of EERs; unseen cells are those whose VC model was
// not used in training.
struct ReportMatrix {
  std::vector<std::string> systems;
  std::vector<std::string> test_sets;
  std::vector<std::vector<double>> eer;   // [system][test set]
  std::vector<std::vector<bool>> seen;    // [system][test set]
};

using CellKey = std::pair<std::string, std::string>;  // (system, test set)

// Throws DataError when any (system, test set) cell is missing from either map.
ReportMatrix report_matrix(const std::vector<std::string>& systems,
                           const std::vector<std::string>& test_sets,
                           const std::map<CellKey, double>& results,
                           const std::map<CellKey, bool>& seen);

// Fixed-width table, EER in percent, unseen cells suffixed with '*'.
std::string render_table(const ReportMatrix& m);
// "system,test_set,eer,seen" rows, EER as a fraction with 6 decimals.
std::string render_csv(const ReportMatrix& m);

}  // namespace ssid
