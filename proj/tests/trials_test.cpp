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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "ssid/errors.hpp"
#include "test_util.hpp"

namespace ssid {
namespace {

TEST(Expansion, FullSizeCounts) {
  const auto f = oracle::full_size_fixture();
  ASSERT_EQ(f.base.n_true, 18860u);
  ASSERT_EQ(f.base.n_false, 18860u);
  const TrialSet s = expand_source_id_trials(f.base, f.index, 3);
  EXPECT_EQ(s.size(), 339480u);
  EXPECT_EQ(s.n_true, 4164u);
  EXPECT_EQ(s.n_false, 335316u);
  EXPECT_EQ(s.task, TrialTask::kSourceId);
  s.validate();
}

TEST(Expansion, SingleTrialAllShared) {
  oracle::ExpansionFixture f;
  for (int k = 0; k < 3; ++k) {
    f.index["e"].push_back(oracle::conversion("e", "s" + std::to_string(k), k));
    f.index["t"].push_back(oracle::conversion("t", "s" + std::to_string(k), k));
  }
  f.base = TrialSet({{"e", "t", false}}, TrialTask::kGenuineSv);
  const TrialSet s = expand_source_id_trials(f.base, f.index, 3);
  EXPECT_EQ(s.size(), 9u);
  EXPECT_EQ(s.n_true, 3u);
}

TEST(Expansion, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const auto f = oracle::random_fixture(50, 3, 4, rng);
    const TrialSet s = expand_source_id_trials(f.base, f.index, 3);
    EXPECT_EQ(s.trials, oracle::expand(f.base, f.index));
  }
}

TEST(Expansion, LabelIsSymmetric) {
  std::mt19937_64 rng(6);
  const auto f = oracle::random_fixture(30, 3, 3, rng);
  std::vector<Trial> swapped;
  for (const Trial& t : f.base.trials) swapped.push_back({t.test_utt_id, t.enroll_utt_id, t.label});
  const TrialSet a = expand_source_id_trials(f.base, f.index, 3);
  const TrialSet b = expand_source_id_trials(TrialSet(swapped, TrialTask::kGenuineSv), f.index, 3);
  std::multiset<std::tuple<std::string, std::string, bool>> ka, kb;
  for (const Trial& t : a.trials) ka.insert({t.enroll_utt_id, t.test_utt_id, t.label});
  for (const Trial& t : b.trials) kb.insert({t.test_utt_id, t.enroll_utt_id, t.label});
  EXPECT_EQ(ka, kb);
}

TEST(Expansion, IgnoresBaseLabel) {
  std::mt19937_64 rng(7);
  auto f = oracle::random_fixture(20, 3, 3, rng);
  std::vector<Trial> flipped = f.base.trials;
  for (Trial& t : flipped) t.label = !t.label;
  EXPECT_EQ(expand_source_id_trials(f.base, f.index, 3).trials,
            expand_source_id_trials(TrialSet(flipped, TrialTask::kGenuineSv), f.index, 3).trials);
}

TEST(Expansion, MissingOrWrongCountThrows) {
  std::mt19937_64 rng(8);
  auto f = oracle::random_fixture(4, 3, 3, rng);
  auto missing = f.index;
  missing.erase("t2");
  EXPECT_THROW(expand_source_id_trials(f.base, missing, 3), DataError);
  auto short_list = f.index;
  short_list["e1"].pop_back();
  EXPECT_THROW(expand_source_id_trials(f.base, short_list, 3), DataError);
  EXPECT_THROW(expand_source_id_trials(f.base, f.index, 2), DataError);
}

TEST(Expansion, BuildIndexFiltersByModel) {
  std::vector<UtteranceRecord> recs;
  for (int k = 0; k < 3; ++k) recs.push_back(oracle::conversion("x", "s" + std::to_string(k), k));
  UtteranceRecord other = oracle::conversion("x", "s9", 9);
  other.conversion->vc_model_id = "B";
  recs.push_back(other);
  const TrainingManifest m(recs, ".");
  const ConversionIndex idx = build_conversion_index(m, "A");
  ASSERT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx.at("x").size(), 3u);
  EXPECT_TRUE(build_conversion_index(m, "C").empty());
}

TEST(TrialFile, Parsing) {
  std::istringstream empty("");
  const TrialSet e = parse_trials(empty, "empty", TrialTask::kGenuineSv);
  EXPECT_EQ(e.size(), 0u);
  e.validate();

  std::istringstream six("1 a b\n0 a c\n# comment\n\n1 c d\n0 b d\n0 a d\n1 e f\n");
  const TrialSet s = parse_trials(six, "six", TrialTask::kGenuineSv);
  EXPECT_EQ(s.size(), 6u);
  EXPECT_EQ(s.n_true, 3u);
  EXPECT_EQ(s.n_false, 3u);

  std::istringstream bad("1 a b\n2 a c\n");
  try {
    parse_trials(bad, "bad.trials", TrialTask::kGenuineSv);
    FAIL();
  } catch (const DataError& err) {
    EXPECT_NE(std::string(err.what()).find("bad.trials:2"), std::string::npos);
  }
  std::istringstream extra("1 a b c\n");
  EXPECT_THROW(parse_trials(extra, "x", TrialTask::kGenuineSv), DataError);
}

TEST(TrialFile, ValidateCatchesStaleCounts) {
  TrialSet s({{"a", "b", true}}, TrialTask::kGenuineSv);
  s.n_true = 2;
  EXPECT_THROW(s.validate(), DataError);
}

TEST(TrialFile, Roundtrip) {
  testing::TempDir dir("trials");
  const TrialSet s({{"a", "b", true}, {"a", "c", false}}, TrialTask::kGenuineSv);
  write_trials(dir / "x.trials", s);
  EXPECT_EQ(load_genuine_trials(dir / "x.trials").trials, s.trials);
  EXPECT_THROW(load_genuine_trials(dir / "missing"), DataError);
}

TEST(Cosine, HandValues) {
  const std::vector<float> a{1, 0, 0}, b{2, 0, 0}, c{0, 3, 0};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, c), 0.0);
  // (1,2,2)/3 against (2,1,2)/3: 8/9
  const std::vector<float> u{1, 2, 2}, v{2, 1, 2};
  EXPECT_NEAR(cosine_similarity(u, v), 8.0 / 9.0, 1e-12);
  const std::vector<float> z{0, 0, 0};
  EXPECT_THROW(cosine_similarity(a, z), DataError);
  const std::vector<float> short_v{1, 0};
  EXPECT_THROW(cosine_similarity(a, short_v), DataError);
}

TEST(Cosine, BoundedAndScaleInvariant) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::uniform_vector<float>(16, rng), b = testing::uniform_vector<float>(16, rng);
    const double s = cosine_similarity(a, b);
    EXPECT_LE(std::abs(s), 1.0);
    std::vector<float> a2 = a;
    for (float& x : a2) x *= 4.0f;
    EXPECT_NEAR(cosine_similarity(a2, b), s, 1e-6);
    EXPECT_NEAR(cosine_similarity(b, a), s, 1e-12);
  }
}

TEST(Scoring, ScoresEveryTrialAndMissingIdThrows) {
  EmbeddingStore store(2);
  const std::vector<float> x{1, 0}, y{0, 1}, z{1, 1};
  store.add("x", x);
  store.add("y", y);
  store.add("z", z);
  const TrialSet s({{"x", "y", false}, {"x", "z", true}}, TrialTask::kGenuineSv);
  const auto scored = score_trials(store, s);
  ASSERT_EQ(scored.size(), 2u);
  EXPECT_NEAR(scored[0].score, 0.0, 1e-12);
  EXPECT_NEAR(scored[1].score, std::sqrt(0.5), 1e-7);
  EXPECT_EQ(scored[1].trial, s.trials[1]);
  EXPECT_THROW(score_trials(store, TrialSet({{"x", "w", true}}, TrialTask::kGenuineSv)), DataError);

  testing::TempDir dir("scores");
  write_scores(dir / "s.txt", scored);
  const auto back = load_scores(dir / "s.txt");
  ASSERT_EQ(back.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].trial, scored[i].trial);
    EXPECT_NEAR(back[i].score, scored[i].score, 1e-8);
  }
}

std::vector<UtteranceRecord> speakers(int n_spk, int n_utt) {
  std::vector<UtteranceRecord> out;
  for (int s = 0; s < n_spk; ++s) {
    for (int u = 0; u < n_utt; ++u) {
      UtteranceRecord r;
      r.speaker_id = "spk" + std::to_string(s);
      r.utt_id = r.speaker_id + "_" + std::to_string(u);
      r.media_path = r.utt_id + ".wav";
      out.push_back(r);
    }
  }
  return out;
}

TEST(GenuineTrials, BalancedDistinctAndCorrect) {
  const auto recs = speakers(6, 5);
  const TrialSet s = make_genuine_trials(recs, 40, 9);
  EXPECT_EQ(s.n_true, 40u);
  EXPECT_EQ(s.n_false, 40u);
  std::map<std::string, std::string> spk;
  for (const auto& r : recs) spk[r.utt_id] = r.speaker_id;
  std::set<std::pair<std::string, std::string>> seen;
  for (const Trial& t : s.trials) {
    EXPECT_NE(t.enroll_utt_id, t.test_utt_id);
    EXPECT_EQ(t.label, spk[t.enroll_utt_id] == spk[t.test_utt_id]);
    EXPECT_TRUE(seen.insert({t.enroll_utt_id, t.test_utt_id}).second);
  }
  EXPECT_EQ(make_genuine_trials(recs, 40, 9).trials, s.trials);
  EXPECT_NE(make_genuine_trials(recs, 40, 10).trials, s.trials);
  // 6 speakers x C(5,2) = 60 same-speaker pairs available
  EXPECT_NO_THROW(make_genuine_trials(recs, 60, 1));
  EXPECT_THROW(make_genuine_trials(recs, 61, 1), DataError);
}

}  // namespace
}  // namespace ssid
