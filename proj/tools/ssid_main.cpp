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

// Command-line front end. Exit codes: 0 success, 2 configuration error,
// 3 data error, 4 any other failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ssid/config_io.hpp"
#include "ssid/corpus.hpp"
#include "ssid/errors.hpp"
#include "ssid/experiment.hpp"
#include "ssid/metrics.hpp"
#include "ssid/mockvc.hpp"
#include "ssid/synthdata.hpp"
#include "ssid/trainer.hpp"
#include "ssid/trials.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssid;

namespace {

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

template <typename T>
T section(const json& j, const char* key, T fallback) {
  try {
    return j.value(key, fallback);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

// Concatenation of several manifests with media paths made absolute.
TrainingManifest merge_manifests(const std::vector<std::string>& paths) {
  std::vector<UtteranceRecord> records;
  for (const auto& p : paths) {
    const TrainingManifest m = load_manifest(p);
    for (UtteranceRecord r : m.records()) {
      r.media_path = m.resolve_media(r).string();
      records.push_back(std::move(r));
    }
  }
  return TrainingManifest(std::move(records));
}

TrialTask parse_task(const std::string& s) {
  if (s == "genuine") return TrialTask::kGenuineSv;
  if (s == "source-id") return TrialTask::kSourceId;
  throw ConfigError("unknown task '" + s + "' (expected genuine or source-id)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source speaker identification of voice-converted speech"};
  app.require_subcommand(1);

  // prepare-data
  auto* prep = app.add_subcommand("prepare-data", "Generate toy corpora or validate manifests");
  std::string prep_out, prep_prefix;
  int n_src = 16, n_tgt = 16, n_utts = 10;
  uint64_t prep_seed = 1;
  double min_dur = 2.0, max_dur = 3.0;
  bool prep_augment = false;
  std::vector<std::string> check;
  prep->add_option("--out", prep_out, "Output directory for synthetic corpora");
  prep->add_option("--source-speakers", n_src);
  prep->add_option("--target-speakers", n_tgt);
  prep->add_option("--utts", n_utts, "Utterances per speaker");
  prep->add_option("--seed", prep_seed);
  prep->add_option("--min-duration", min_dur);
  prep->add_option("--max-duration", max_dur);
  prep->add_option("--prefix", prep_prefix, "Speaker id prefix");
  prep->add_flag("--augment-corpus", prep_augment, "Also write toy noise and RIR clips");
  prep->add_option("--check", check, "Manifests to validate instead of generating data");

  // mock-convert
  auto* conv = app.add_subcommand("mock-convert", "Convert target utterances with a mock VC model");
  std::string conv_src, conv_tgt, conv_out, conv_id, conv_variant = "A", conv_fe;
  double conv_leak = -1.0;
  int conv_attackers = 3;
  uint64_t conv_seed = 1;
  conv->add_option("--source", conv_src, "Source (attacker) manifest")->required();
  conv->add_option("--target", conv_tgt, "Target manifest")->required();
  conv->add_option("--out", conv_out, "Output directory")->required();
  conv->add_option("--vc-id", conv_id, "VC model id")->required();
  conv->add_option("--variant", conv_variant, "A, B or C");
  conv->add_option("--leak", conv_leak, "Source leak coefficient (default per variant)");
  conv->add_option("--attackers", conv_attackers);
  conv->add_option("--seed", conv_seed);
  conv->add_option("--front-end", conv_fe, "JSON front-end config");

  // train
  auto* tr = app.add_subcommand("train", "Train a speaker embedding network");
  std::string tr_cfg, tr_src, tr_tgt, tr_ckpt;
  std::vector<std::string> tr_conv, tr_include;
  std::optional<uint64_t> tr_seed;
  tr->add_option("--config", tr_cfg, "JSON with network, train, front_end and augment sections");
  tr->add_option("--genuine-source", tr_src);
  tr->add_option("--genuine-target", tr_tgt)->required();
  tr->add_option("--converted", tr_conv, "Converted manifests");
  tr->add_option("--include-vc", tr_include, "VC model ids to train on");
  tr->add_option("--checkpoint", tr_ckpt, "Checkpoint path (resumed when compatible)")->required();
  tr->add_option("--seed", tr_seed);

  // extract
  auto* ex = app.add_subcommand("extract", "Extract embeddings");
  std::string ex_ckpt, ex_out;
  std::vector<std::string> ex_manifests;
  ex->add_option("--checkpoint", ex_ckpt)->required();
  ex->add_option("--manifest", ex_manifests)->required();
  ex->add_option("--out", ex_out)->required();

  // make-trials
  auto* mt = app.add_subcommand("make-trials", "Sample genuine trials or expand them for source ID");
  std::string mt_manifest, mt_base, mt_conv, mt_vc, mt_out;
  size_t mt_per_class = 500;
  uint64_t mt_seed = 1;
  int mt_attackers = 3;
  mt->add_option("--manifest", mt_manifest, "Genuine manifest to sample trials from");
  mt->add_option("--per-class", mt_per_class);
  mt->add_option("--seed", mt_seed);
  mt->add_option("--base", mt_base, "Genuine trial list to expand");
  mt->add_option("--converted", mt_conv, "Converted manifest for the expansion");
  mt->add_option("--vc-id", mt_vc);
  mt->add_option("--attackers", mt_attackers);
  mt->add_option("--out", mt_out)->required();

  // score
  auto* sc = app.add_subcommand("score", "Cosine-score a trial list");
  std::string sc_emb, sc_trials, sc_task = "genuine", sc_out;
  sc->add_option("--embeddings", sc_emb)->required();
  sc->add_option("--trials", sc_trials)->required();
  sc->add_option("--task", sc_task, "genuine or source-id");
  sc->add_option("--out", sc_out)->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "EER of a score file");
  std::string ev_scores, ev_roc;
  ev->add_option("--scores", ev_scores)->required();
  ev->add_option("--roc", ev_roc, "Write ROC vertices as CSV");

  // report-matrix
  auto* rm = app.add_subcommand("report-matrix", "Run or reuse every system and print the EER grid");
  std::vector<std::string> rm_cfgs;
  std::string rm_run, rm_csv;
  rm->add_option("--config", rm_cfgs, "Experiment configs, one per system")->required();
  rm->add_option("--run-dir", rm_run)->required();
  rm->add_option("--csv", rm_csv);

  // run-experiment
  auto* re = app.add_subcommand("run-experiment", "Run one system end to end");
  std::string re_cfg, re_run;
  re->add_option("--config", re_cfg)->required();
  re->add_option("--run-dir", re_run)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*prep) {
      if (!check.empty()) {
        for (const auto& p : check) {
          const TrainingManifest m = load_manifest(p);
          std::printf("%s: %zu records, %zu speakers, %zu converted\n", p.c_str(), m.size(),
                      m.speaker_inventory().size(), m.count(Origin::kConverted));
        }
        return 0;
      }
      if (prep_out.empty()) throw ConfigError("prepare-data: --out or --check is required");
      ToyCorpusOptions opts;
      opts.min_duration_s = min_dur;
      opts.max_duration_s = max_dur;
      opts.id_prefix = prep_prefix;
      const ToyCorpora c = make_toy_corpora(n_src, n_tgt, n_utts, prep_seed, prep_out, opts);
      if (prep_augment) make_toy_augment_corpus(fs::path(prep_out) / "augment", prep_seed);
      std::printf("wrote %zu source and %zu target utterances to %s\n", c.source.size(),
                  c.target.size(), prep_out.c_str());
    } else if (*conv) {
      MockVCConfig mc = MockVCConfig::for_variant(conv_id, parse_mock_variant(conv_variant));
      if (conv_leak >= 0.0) mc.leak = conv_leak;
      mc.validate();
      const FrontEndConfig fe = conv_fe.empty() ? FrontEndConfig{} : read_json(conv_fe).get<FrontEndConfig>();
      const TrainingManifest sources = load_manifest(conv_src);
      const TrainingManifest targets = load_manifest(conv_tgt);
      const auto pairs = sample_conversion_pairs(targets.records(), sources.records(), conv_attackers, conv_seed);
      fs::create_directories(conv_out);
      const TrainingManifest out = convert_pairs(pairs, sources, targets, mc, fe, conv_out);
      write_manifest(fs::path(conv_out) / "manifest.tsv", out);
      std::printf("converted %zu utterances with %s\n", out.size(), conv_id.c_str());
    } else if (*tr) {
      const json cfg = tr_cfg.empty() ? json::object() : read_json(tr_cfg);
      const FrontEndConfig fe = section(cfg, "front_end", FrontEndConfig{});
      NetworkConfig net = section(cfg, "network", NetworkConfig::desk());
      TrainConfig tc = section(cfg, "train", TrainConfig{});
      const AugmentPolicy policy = section(cfg, "augment", AugmentPolicy{});
      if (tr_seed) tc.seed = *tr_seed;
      const std::set<std::string> include(tr_include.begin(), tr_include.end());
      std::vector<TrainingManifest> converted;
      for (const auto& p : tr_conv) converted.push_back(load_manifest(p));
      std::optional<TrainingManifest> source;
      if (!include.empty()) {
        if (tr_src.empty()) throw ConfigError("train: --genuine-source is required with --include-vc");
        source = load_manifest(tr_src);
      }
      const TrainingManifest composed = compose_training_set(
          source ? &*source : nullptr, load_manifest(tr_tgt), converted, include);
      net.n_classes = static_cast<int>(composed.speaker_inventory().size());
      const AugmentCorpus corpus =
          policy.p_none < 1.0 ? AugmentCorpus::load(policy, fe.sample_rate) : AugmentCorpus{};
      TrainOptions opts;
      opts.front_end = fe;
      opts.augment = policy;
      opts.corpus = &corpus;
      opts.checkpoint_path = tr_ckpt;
      opts.on_epoch = [](const EpochStats& e) {
        std::printf("epoch %d loss %.4f acc %.4f lr %.3g\n", e.epoch, e.loss, e.accuracy, e.lr);
        std::fflush(stdout);
      };
      const Checkpoint c = train(composed, net, tc, opts);
      if (tc.epochs == 0) save_checkpoint(tr_ckpt, c);
    } else if (*ex) {
      const Checkpoint c = load_checkpoint(ex_ckpt);
      const TrainingManifest m = merge_manifests(ex_manifests);
      to_store(extract_embeddings(m, c)).save(ex_out);
      std::printf("extracted %zu embeddings\n", m.size());
    } else if (*mt) {
      if (!mt_base.empty()) {
        if (mt_conv.empty() || mt_vc.empty()) throw ConfigError("make-trials: --base needs --converted and --vc-id");
        const TrialSet base = load_genuine_trials(mt_base);
        const auto index = build_conversion_index(load_manifest(mt_conv), mt_vc);
        const TrialSet out = expand_source_id_trials(base, index, mt_attackers);
        write_trials(mt_out, out);
        std::printf("%zu trials (%zu true, %zu false)\n", out.size(), out.n_true, out.n_false);
      } else {
        if (mt_manifest.empty()) throw ConfigError("make-trials: --manifest or --base is required");
        const TrainingManifest m = load_manifest(mt_manifest);
        const TrialSet out = make_genuine_trials(m.records(), mt_per_class, mt_seed);
        write_trials(mt_out, out);
        std::printf("%zu trials (%zu true, %zu false)\n", out.size(), out.n_true, out.n_false);
      }
    } else if (*sc) {
      const EmbeddingStore store = EmbeddingStore::load(sc_emb);
      std::ifstream is(sc_trials);
      if (!is) throw DataError("cannot open " + sc_trials);
      const TrialSet set = parse_trials(is, sc_trials, parse_task(sc_task));
      write_scores(sc_out, score_trials(store, set));
    } else if (*ev) {
      const ScoredTrialSet s = ScoredTrialSet::from(load_scores(ev_scores));
      const EerResult r = eer(s);
      std::printf("EER %.4f%% threshold %.6f (%zu trials)\n", 100.0 * r.eer, r.threshold, s.scores.size());
      if (!ev_roc.empty()) {
        std::ofstream os(ev_roc);
        os << "threshold,far,frr\n";
        for (const auto& p : roc_points(s)) os << p.threshold << ',' << p.far << ',' << p.frr << '\n';
      }
    } else if (*rm) {
      std::vector<ExperimentConfig> cfgs;
      for (const auto& p : rm_cfgs) cfgs.push_back(load_experiment_config(p));
      const MatrixResult m = run_matrix(cfgs, rm_run);
      std::fputs(render_table(m.matrix).c_str(), stdout);
      if (!rm_csv.empty()) {
        std::ofstream os(rm_csv, std::ios::binary);
        os << render_csv(m.matrix);
      }
    } else if (*re) {
      const ExperimentResult r = run_experiment(load_experiment_config(re_cfg), re_run);
      std::fputs(r.report_csv.c_str(), stdout);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
