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

#include "ssid/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "ssid/config_io.hpp"
#include "ssid/corpus.hpp"
#include "ssid/errors.hpp"
#include "ssid/rng.hpp"
#include "ssid/trials.hpp"

namespace ssid {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return sha256_hex(ss.str());
}

namespace {

bool parse_vc_count(const std::string& digits, size_t& k) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return false;
  k = std::stoul(digits);
  return true;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (system_name.empty()) throw ConfigError("system_name is empty");
  if (system_name == "NoVC") {
    if (!include_vc.empty()) throw ConfigError("system NoVC must not include VC data");
  } else {
    if (system_name.rfind("VC", 0) != 0) {
      throw ConfigError("system_name '" + system_name + "' is neither NoVC nor VC<k>[-<ids>]");
    }
    const std::string rest = system_name.substr(2);
    const size_t dash = rest.find('-');
    size_t k = 0;
    if (!parse_vc_count(rest.substr(0, dash), k)) {
      throw ConfigError("system_name '" + system_name + "' lacks a VC model count");
    }
    if (k != include_vc.size() || k == 0) {
      throw ConfigError("system " + system_name + " declares " + std::to_string(k) +
                        " VC models but include_vc has " + std::to_string(include_vc.size()));
    }
    const std::string suffix = dash == std::string::npos ? "" : rest.substr(dash + 1);
    if (k == 1 && suffix.empty()) throw ConfigError("system " + system_name + " must name its VC model");
    if (!suffix.empty()) {
      std::string joined;
      for (const auto& id : include_vc) joined += id;
      if (suffix != joined) {
        throw ConfigError("system " + system_name + " names VC models '" + suffix +
                          "' but include_vc spells '" + joined + "'");
      }
    }
  }
  std::set<std::string> ids;
  for (const auto& m : vc_models) {
    m.validate();
    if (!ids.insert(m.vc_model_id).second) throw ConfigError("duplicate VC model '" + m.vc_model_id + "'");
  }
  for (const auto& id : include_vc) {
    if (!ids.contains(id)) throw ConfigError("include_vc names undefined VC model '" + id + "'");
  }
  std::set<std::string> tests;
  for (const auto& id : test_sets) {
    if (!ids.contains(id)) throw ConfigError("test set names undefined VC model '" + id + "'");
    if (id == kGenuineTestSet) throw ConfigError("VC model id '" + id + "' is reserved");
    if (!tests.insert(id).second) throw ConfigError("duplicate test set '" + id + "'");
  }
  if (corpora.train_target.empty() || corpora.test_target.empty() || corpora.test_source.empty()) {
    throw ConfigError("corpora.train_target, test_source and test_target are required");
  }
  if (!include_vc.empty() && corpora.train_source.empty()) {
    throw ConfigError("corpora.train_source is required when VC data is included");
  }
  if (attackers_per_target < 1) throw ConfigError("attackers_per_target must be >= 1");
  if (genuine_trials_per_class < 1) throw ConfigError("genuine_trials_per_class must be >= 1");
  front_end.validate();
  train.validate();
  augment.validate();
  if (network.input_bins != front_end.n_mels) throw ConfigError("network.input_bins != front_end.n_mels");
}

const MockVCConfig& ExperimentConfig::vc_model(const std::string& id) const {
  for (const auto& m : vc_models) {
    if (m.vc_model_id == id) return m;
  }
  throw ConfigError("undefined VC model '" + id + "'");
}

ExperimentConfig parse_experiment_config(const std::string& text, const fs::path& base_dir) {
  static const std::set<std::string> kKeys{
      "system_name", "include_vc", "vc_models", "test_sets", "corpora", "front_end", "network",
      "train", "augment", "seeds", "attackers_per_target", "genuine_trials_per_class"};
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    for (const auto& [key, _] : j.items()) {
      if (!kKeys.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    c.system_name = j.at("system_name").get<std::string>();
    c.include_vc = j.value("include_vc", std::set<std::string>{});
    c.vc_models = j.value("vc_models", std::vector<MockVCConfig>{});
    c.test_sets = j.value("test_sets", std::vector<std::string>{});
    const auto resolve = [&](const json& obj, const char* key) -> fs::path {
      if (!obj.contains(key)) return {};
      fs::path p = obj.at(key).get<std::string>();
      return p.is_absolute() ? p : base_dir / p;
    };
    const json& corp = j.at("corpora");
    c.corpora = {resolve(corp, "train_source"), resolve(corp, "train_target"),
                 resolve(corp, "test_source"), resolve(corp, "test_target")};
    c.front_end = j.value("front_end", FrontEndConfig{});
    c.network = j.value("network", NetworkConfig::desk());
    c.train = j.value("train", TrainConfig{});
    c.augment = j.value("augment", AugmentPolicy{});
    for (auto& [cat, dir] : c.augment.noise_corpus_dirs) {
      if (fs::path(dir).is_relative()) dir = (base_dir / dir).string();
    }
    for (auto& dir : c.augment.rir_corpus_dirs) {
      if (fs::path(dir).is_relative()) dir = (base_dir / dir).string();
    }
    const json& seeds = j.at("seeds");
    c.seeds = {seeds.at("data").get<uint64_t>(), seeds.at("train").get<uint64_t>(),
               seeds.at("eval").get<uint64_t>()};
    c.attackers_per_target = j.value("attackers_per_target", 3);
    c.genuine_trials_per_class = j.value("genuine_trials_per_class", 500);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.train.seed = c.seeds.train;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_experiment_config(ss.str(), fs::absolute(path).parent_path());
}

std::string to_json_text(const ExperimentConfig& c) {
  const json j = {
      {"system_name", c.system_name},
      {"include_vc", c.include_vc},
      {"vc_models", c.vc_models},
      {"test_sets", c.test_sets},
      {"corpora",
       {{"train_source", c.corpora.train_source.string()},
        {"train_target", c.corpora.train_target.string()},
        {"test_source", c.corpora.test_source.string()},
        {"test_target", c.corpora.test_target.string()}}},
      {"front_end", c.front_end},
      {"network", c.network},
      {"train", c.train},
      {"augment", c.augment},
      {"seeds", {{"data", c.seeds.data}, {"train", c.seeds.train}, {"eval", c.seeds.eval}}},
      {"attackers_per_target", c.attackers_per_target},
      {"genuine_trials_per_class", c.genuine_trials_per_class},
  };
  return j.dump(2) + "\n";
}

namespace {

// Stage failures are rethrown with the stage name, keeping their category.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError("[" + stage + "] " + e.what());
  } catch (const DataError& e) {
    throw DataError("[" + stage + "] " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("[" + stage + "] " + e.what());
  }
}

std::string stage_key(const json& inputs) { return sha256_hex(inputs.dump()).substr(0, 16); }

bool stage_done(const fs::path& dir, const json& inputs) {
  const fs::path marker = dir / "stage.json";
  if (!fs::exists(marker)) return false;
  std::ifstream is(marker);
  try {
    return json::parse(is) == inputs;
  } catch (const json::exception&) {
    return false;
  }
}

void mark_done(const fs::path& dir, const json& inputs) {
  std::ofstream os(dir / "stage.json");
  os << inputs.dump(2) << "\n";
  if (!os) throw DataError("cannot write stage marker in " + dir.string());
}

struct Corpora {
  TrainingManifest train_source, train_target, test_source, test_target;
  std::string train_source_hash, train_target_hash, test_source_hash, test_target_hash;
};

struct Conversion {
  std::string key;
  fs::path dir;
  TrainingManifest manifest;
};

// Converts every target utterance of `targets` with attackers_per_target
// sources under one VC model. The pair list depends on the split and the data
// seed only, so every VC model converts the same pairs.
Conversion convert_split(const ExperimentConfig& cfg, const std::string& split,
                         const MockVCConfig& model, const TrainingManifest& sources,
                         const std::string& sources_hash, const TrainingManifest& targets,
                         const std::string& targets_hash, const fs::path& run_dir) {
  const uint64_t pair_seed = derive_seed(cfg.seeds.data, {fnv1a(split)});
  const json inputs = {{"stage", "convert"},  {"split", split},
                       {"model", model},      {"sources", sources_hash},
                       {"targets", targets_hash}, {"attackers", cfg.attackers_per_target},
                       {"seed", pair_seed},   {"front_end", cfg.front_end}};
  Conversion c;
  c.key = stage_key(inputs);
  c.dir = run_dir / "convert" / c.key;
  if (!stage_done(c.dir, inputs)) {
    fs::create_directories(c.dir);
    const auto pairs = sample_conversion_pairs(targets.records(), sources.records(),
                                               cfg.attackers_per_target, pair_seed);
    const TrainingManifest m = convert_pairs(pairs, sources, targets, model, cfg.front_end, c.dir);
    write_manifest(c.dir / "manifest.tsv", m);
    mark_done(c.dir, inputs);
  }
  c.manifest = load_manifest(c.dir / "manifest.tsv");
  return c;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const fs::path& run_dir) {
  cfg.validate();
  ExperimentResult result;
  fs::create_directories(run_dir);

  const Corpora corpora = run_stage("prepare", [&] {
    Corpora c;
    const auto load = [](const fs::path& p, TrainingManifest& m, std::string& hash) {
      if (p.empty()) return;
      m = load_manifest(p);
      hash = sha256_file(p);
    };
    load(cfg.corpora.train_source, c.train_source, c.train_source_hash);
    load(cfg.corpora.train_target, c.train_target, c.train_target_hash);
    load(cfg.corpora.test_source, c.test_source, c.test_source_hash);
    load(cfg.corpora.test_target, c.test_target, c.test_target_hash);
    return c;
  });

  std::vector<Conversion> train_conv, test_conv;
  run_stage("mock-convert", [&] {
    for (const auto& id : cfg.include_vc) {
      train_conv.push_back(convert_split(cfg, "train", cfg.vc_model(id), corpora.train_source,
                                         corpora.train_source_hash, corpora.train_target,
                                         corpora.train_target_hash, run_dir));
    }
    for (const auto& id : cfg.test_sets) {
      test_conv.push_back(convert_split(cfg, "test", cfg.vc_model(id), corpora.test_source,
                                        corpora.test_source_hash, corpora.test_target,
                                        corpora.test_target_hash, run_dir));
    }
  });

  // The genuine source speakers join training only alongside converted data.
  const bool with_vc = !cfg.include_vc.empty();
  json train_inputs;
  fs::path train_dir;
  Checkpoint ckpt = run_stage("train", [&] {
    std::vector<TrainingManifest> conv;
    std::vector<std::string> conv_keys;
    for (const auto& c : train_conv) {
      conv.push_back(c.manifest);
      conv_keys.push_back(c.key);
    }
    const TrainingManifest composed = compose_training_set(
        with_vc ? &corpora.train_source : nullptr, corpora.train_target, conv, cfg.include_vc);
    NetworkConfig net = cfg.network;
    net.n_classes = static_cast<int>(composed.speaker_inventory().size());
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seeds.train;
    train_inputs = {{"stage", "train"},
                    {"include_vc", cfg.include_vc},
                    {"source", with_vc ? corpora.train_source_hash : ""},
                    {"target", corpora.train_target_hash},
                    {"converted", conv_keys},
                    {"network", net},
                    {"train", tc},
                    {"front_end", cfg.front_end},
                    {"augment", cfg.augment}};
    train_dir = run_dir / "train" / stage_key(train_inputs);
    const fs::path ckpt_path = train_dir / "checkpoint.sckp";
    if (stage_done(train_dir, train_inputs)) return load_checkpoint(ckpt_path);
    fs::create_directories(train_dir);
    write_manifest(train_dir / "train_manifest.tsv", composed);
    AugmentCorpus corpus;
    if (cfg.augment.p_none < 1.0) corpus = AugmentCorpus::load(cfg.augment, cfg.front_end.sample_rate);
    TrainOptions opts;
    opts.front_end = cfg.front_end;
    opts.augment = cfg.augment;
    opts.corpus = &corpus;
    opts.checkpoint_path = ckpt_path;
    Checkpoint out = train(composed, net, tc, opts);
    if (cfg.train.epochs == 0) save_checkpoint(ckpt_path, out);
    std::ofstream hist(train_dir / "history.tsv");
    hist << "epoch\tloss\taccuracy\tlr\n";
    for (const auto& e : out.history) hist << e.epoch << '\t' << e.loss << '\t' << e.accuracy << '\t' << e.lr << '\n';
    mark_done(train_dir, train_inputs);
    result.trained = true;
    return out;
  });

  std::vector<std::string> test_keys;
  for (const auto& c : test_conv) test_keys.push_back(c.key);

  fs::path extract_dir;
  const EmbeddingStore store = run_stage("extract", [&] {
    const json inputs = {{"stage", "extract"},
                         {"train", stage_key(train_inputs)},
                         {"target", corpora.test_target_hash},
                         {"converted", test_keys}};
    extract_dir = run_dir / "extract" / stage_key(inputs);
    const fs::path& dir = extract_dir;
    if (!stage_done(dir, inputs)) {
      fs::create_directories(dir);
      std::vector<TrainingManifest> conv;
      for (const auto& c : test_conv) conv.push_back(c.manifest);
      const std::set<std::string> ids(cfg.test_sets.begin(), cfg.test_sets.end());
      const TrainingManifest eval_set = compose_training_set(nullptr, corpora.test_target, conv, ids);
      to_store(extract_embeddings(eval_set, ckpt)).save(dir / "embeddings.semb");
      mark_done(dir, inputs);
    }
    return EmbeddingStore::load(dir / "embeddings.semb");
  });

  std::vector<std::pair<std::string, TrialSet>> trial_sets;
  fs::path trials_dir;
  run_stage("make-trials", [&] {
    const json inputs = {{"stage", "trials"},
                         {"target", corpora.test_target_hash},
                         {"per_class", cfg.genuine_trials_per_class},
                         {"seed", cfg.seeds.eval},
                         {"attackers", cfg.attackers_per_target},
                         {"converted", test_keys}};
    trials_dir = run_dir / "trials" / stage_key(inputs);
    if (!stage_done(trials_dir, inputs)) {
      fs::create_directories(trials_dir);
      const TrialSet genuine = make_genuine_trials(
          corpora.test_target.records(), static_cast<size_t>(cfg.genuine_trials_per_class), cfg.seeds.eval);
      write_trials(trials_dir / "genuine.trials", genuine);
      for (size_t i = 0; i < cfg.test_sets.size(); ++i) {
        const auto index = build_conversion_index(test_conv[i].manifest, cfg.test_sets[i]);
        write_trials(trials_dir / ("source_id_" + cfg.test_sets[i] + ".trials"),
                     expand_source_id_trials(genuine, index, cfg.attackers_per_target));
      }
      mark_done(trials_dir, inputs);
    }
    trial_sets.emplace_back(kGenuineTestSet, load_genuine_trials(trials_dir / "genuine.trials"));
    for (const auto& id : cfg.test_sets) {
      std::ifstream is(trials_dir / ("source_id_" + id + ".trials"));
      trial_sets.emplace_back(id, parse_trials(is, "source_id_" + id + ".trials", TrialTask::kSourceId));
    }
  });

  const fs::path system_dir = run_dir / "systems" / cfg.system_name;
  result.system_dir = system_dir;
  run_stage("score", [&] {
    fs::create_directories(system_dir);
    for (const auto& [name, set] : trial_sets) {
      const auto scored = score_trials(store, set);
      write_scores(system_dir / ("scores_" + name + ".txt"), scored);
      TestResult r;
      r.test_set = name;
      r.task = set.task;
      r.n_trials = set.size();
      r.n_true = set.n_true;
      r.eer = eer(ScoredTrialSet::from(scored));
      result.results.push_back(r);
    }
  });

  run_stage("report", [&] {
    std::ostringstream csv;
    csv << "system,test_set,task,n_trials,n_true,eer,threshold\n";
    char line[256];
    for (const auto& r : result.results) {
      std::snprintf(line, sizeof(line), "%s,%s,%s,%zu,%zu,%.6f,%.6f\n", cfg.system_name.c_str(),
                    r.test_set.c_str(), to_string(r.task).c_str(), r.n_trials, r.n_true, r.eer.eer,
                    r.eer.threshold);
      csv << line;
    }
    result.report_csv = csv.str();
    {
      std::ofstream os(system_dir / "report.csv", std::ios::binary);
      os << result.report_csv;
    }
    {
      std::ofstream os(system_dir / "config.json");
      os << to_json_text(cfg);
    }
    std::map<std::string, std::string> artifacts;
    const auto add = [&](const fs::path& p) {
      artifacts[fs::relative(p, run_dir).generic_string()] = sha256_file(p);
    };
    for (const auto& c : train_conv) add(c.dir / "manifest.tsv");
    for (const auto& c : test_conv) add(c.dir / "manifest.tsv");
    add(train_dir / "train_manifest.tsv");
    add(train_dir / "checkpoint.sckp");
    add(extract_dir / "embeddings.semb");
    for (const auto& entry : fs::directory_iterator(trials_dir)) {
      if (entry.path().extension() == ".trials") add(entry.path());
    }
    for (const auto& [name, _] : trial_sets) add(system_dir / ("scores_" + name + ".txt"));
    add(system_dir / "report.csv");
    std::ofstream os(system_dir / "artifacts.json");
    os << json{{"system", cfg.system_name}, {"artifacts", artifacts}}.dump(2) << "\n";
  });
  return result;
}

MatrixResult run_matrix(const std::vector<ExperimentConfig>& configs, const fs::path& run_dir) {
  if (configs.empty()) throw ConfigError("run_matrix: no systems");
  std::set<std::string> names;
  for (const auto& c : configs) {
    if (c.test_sets != configs.front().test_sets) {
      throw ConfigError("run_matrix: system " + c.system_name + " declares a different test-set grid");
    }
    if (!names.insert(c.system_name).second) {
      throw ConfigError("run_matrix: duplicate system " + c.system_name);
    }
  }
  MatrixResult out;
  std::vector<std::string> systems;
  std::vector<std::string> test_sets{kGenuineTestSet};
  test_sets.insert(test_sets.end(), configs.front().test_sets.begin(), configs.front().test_sets.end());
  std::map<CellKey, double> cells;
  std::map<CellKey, bool> seen;
  for (const auto& c : configs) {
    out.systems.push_back(run_experiment(c, run_dir));
    systems.push_back(c.system_name);
    for (const auto& r : out.systems.back().results) {
      cells[{c.system_name, r.test_set}] = r.eer.eer;
      seen[{c.system_name, r.test_set}] = r.test_set == kGenuineTestSet || c.include_vc.contains(r.test_set);
    }
  }
  out.matrix = report_matrix(systems, test_sets, cells, seen);
  return out;
}

}  // namespace ssid
