// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Pipeline subcommands. Every stage reads and writes fixed artifact names
// under paths.output_dir:
//
//   ingest            corpus_summary.tsv vocab.src vocab.tgt top_words.txt
//   train-base        base.ckpt base_train_log.tsv
//   synth-mt          mt/<split>/<id>.txt mt_manifest.tsv synth_stats.tsv
//   train-classifier  classifier.<P>.bin classifier.<P>.confusion.tsv classifier_grid.tsv
//   align             align/step_<N>.ckpt align_log.tsv curves.tsv aligned.ckpt selection.txt
//   translate         translations/<system>/<book>.txt
//   rerank            translations/rerank/<book>.txt
//   evaluate          report.tsv
//   curves            curves.tsv
//
// plus <subcommand>.config, the resolved configuration of the last run.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "natalign/align/align.hpp"
#include "natalign/align/rerank.hpp"
#include "natalign/align/select.hpp"
#include "natalign/classifier/evaluation.hpp"
#include "natalign/classifier/io.hpp"
#include "natalign/cli/config.hpp"
#include "natalign/corpus/classifier_data.hpp"
#include "natalign/corpus/loader.hpp"
#include "natalign/corpus/synthesize.hpp"
#include "natalign/corpus/vocabulary.hpp"
#include "natalign/evalreport/curves.hpp"
#include "natalign/evalreport/report.hpp"
#include "natalign/evalreport/system.hpp"
#include "natalign/metrics/lexical.hpp"
#include "natalign/metrics/translation_table.hpp"
#include "natalign/reward/content.hpp"
#include "natalign/seq2seq/checkpoint.hpp"
#include "natalign/seq2seq/tagging.hpp"
#include "natalign/seq2seq/trainer.hpp"
#include "natalign/seq2seq/translate.hpp"

namespace natalign::cli {

namespace fs = std::filesystem;
using Model = Seq2Seq<float>;

inline constexpr const char* kConfigEnv = "NATALIGN_CONFIG";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"ingest",   "train-base", "synth-mt", "train-classifier", "align",
                                             "translate", "rerank",     "evaluate", "curves"};
  return s;
}

/// Exclusive ownership of an output directory for the lifetime of a run.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw Error("output directory is locked by another run: " + path_.string());
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

/// Per-invocation options that are not part of the run configuration.
struct StageOptions {
  std::string model = "base";  // base, aligned, or a checkpoint path
  std::string system;          // defaults to the model name
  std::string split = "test";
};

class Pipeline {
 public:
  Pipeline(RunConfig cfg, std::ostream& log) : cfg_(std::move(cfg)), out_(cfg_.output_dir), log_(log) {}

  void run(const std::string& stage, const StageOptions& opt) {
    if (stage == "ingest") return ingest();
    if (stage == "train-base") return train_base();
    if (stage == "synth-mt") return synth_mt();
    if (stage == "train-classifier") return train_classifiers();
    if (stage == "align") return align();
    if (stage == "translate") return translate(opt);
    if (stage == "rerank") return rerank(opt);
    if (stage == "evaluate") return evaluate();
    if (stage == "curves") return curves();
    throw Error("unknown subcommand '" + stage + "'");
  }

  void ingest() {
    const auto& c = corpus();
    std::vector<Sentence> src, tgt;
    for (const auto& p : c.pairs_in(Split::kTrain)) {
      src.push_back(p.source);
      tgt.push_back(p.target);
    }
    if (src.empty()) throw DataError("ingest: the manifest has no parallel training entries");
    write_file("vocab.src", [&](std::ostream& os) { build_vocab(src, cfg_.min_freq).save(os); });
    write_file("vocab.tgt", [&](std::ostream& os) { build_vocab(tgt, cfg_.min_freq).save(os); });

    std::vector<Sentence> target_side;
    for (const auto& d : c.documents_in(Split::kTrain))
      target_side.insert(target_side.end(), d.sentences.begin(), d.sentences.end());
    write_file("top_words.txt", [&](std::ostream& os) {
      for (const auto& w : top_k_words(flatten(target_side), static_cast<std::size_t>(cfg_.top_words)))
        os << w << '\n';
    });
    write_file("corpus_summary.tsv", [&](std::ostream& os) {
      os << "id\tlanguage\tprovenance\tsplit\tparallel\tsentences\n";
      for (const auto& e : c.manifest.entries)
        os << e.id << '\t' << e.language << '\t' << to_string(e.provenance) << '\t' << to_string(e.split)
           << '\t' << (e.parallel() ? 1 : 0) << '\t' << e.sentences << '\n';
    });
    log_ << "ingest: " << c.manifest.entries.size() << " entries, " << src.size() << " training pairs\n";
  }

  void train_base() {
    const auto& c = corpus();
    Model model(cfg_.model, read_vocab("vocab.src"), read_vocab("vocab.tgt"), cfg_.seed);
    const auto valid = c.pairs_in(Split::kValid);
    if (valid.empty()) throw DataError("train-base: the manifest has no parallel validation entries");
    TrainResult<float> result;
    if (cfg_.model.tagged) {
      result = train_tagged(model, c.pairs_in(Split::kTrain, Provenance::kHuman),
                            c.pairs_in(Split::kTrain, Provenance::kOriginal), valid, cfg_.train, cfg_.tagging);
    } else {
      result = train_supervised(model, encode_pairs(model, c.pairs_in(Split::kTrain)), encode_pairs(model, valid),
                                cfg_.train);
    }
    if (result.diverged) log_ << "train-base: training diverged; keeping the best finite checkpoint\n";
    save_checkpoint(out_ / "base.ckpt", result.best);
    write_file("base_train_log.tsv", [&](std::ostream& os) {
      os << "step\ttrain_loss\tvalid_loss\n";
      for (const auto& r : result.history)
        os << r.step << '\t' << natalign::detail::fmt(r.train_loss, 6) << '\t' << natalign::detail::fmt(r.valid_loss, 6) << '\n';
    });
    log_ << "train-base: best valid loss " << natalign::detail::fmt(result.best.valid_loss, 4) << " at step "
         << result.best.step << (result.early_stopped ? " (early stop)" : "") << '\n';
  }

  void synth_mt() {
    const auto& c = corpus();
    const Model model = load_model("base");
    fs::create_directories(out_ / "mt");
    std::ostringstream manifest, stats;
    stats << "split\ttranslated\tdropped_identical\n";
    for (Split split : {Split::kTrain, Split::kValid}) {
      std::vector<Document> docs;
      SynthesisStats total;
      for (const auto& e : c.manifest.entries) {
        if (e.split != split || !e.parallel() || e.provenance == Provenance::kMachine) continue;
        std::vector<ParallelPair> pairs;
        for (const auto& p : c.pairs)
          if (p.book_id == e.id) pairs.push_back(p);
        SynthesisStats st;
        auto d = synthesize_mt_corpus(pairs, model, cfg_.synth_beam, e.language, &st);
        total.translated += st.translated;
        total.dropped_identical += st.dropped_identical;
        for (auto& doc : d) docs.push_back(std::move(doc));
      }
      const std::string dir = "mt/" + std::string(to_string(split));
      fs::create_directories(out_ / dir);
      for (const auto& d : docs) {
        const std::string rel = dir + "/" + d.id + ".txt";
        write_lines(rel, d.sentences);
        manifest << d.id << ".mt\t" << rel << '\t' << d.language << "\tMT\t" << to_string(split) << '\n';
      }
      stats << to_string(split) << '\t' << total.translated << '\t' << total.dropped_identical << '\n';
    }
    write_file("mt_manifest.tsv", [&](std::ostream& os) { os << manifest.str(); });
    write_file("synth_stats.tsv", [&](std::ostream& os) { os << stats.str(); });
    log_ << "synth-mt: wrote " << (out_ / "mt_manifest.tsv").string() << '\n';
  }

  void train_classifiers() {
    if (cfg_.classifier_perspectives.empty()) throw ConfigError("classifier.perspectives", "is empty");
    const auto train_pools = pools(Split::kTrain);
    const auto test_pools = pools(Split::kValid);
    std::map<Perspective, NaturalnessClassifier> trained;
    std::array<LabeledSet, 3> tests;
    for (Perspective p : cfg_.classifier_perspectives) {
      const std::string name(to_string(p));
      const auto data = make_classifier_dataset(p, train_pools, cfg_.seed);
      auto test = make_classifier_dataset(p, test_pools, cfg_.seed + 1);
      auto r = train_classifier(data, p, cfg_.features, cfg_.classifier);
      const auto cm = confusion_matrix(r.classifier, test);
      save_classifier(out_ / ("classifier." + name + ".bin"), r.classifier);
      write_file("classifier." + name + ".confusion.tsv",
                 [&](std::ostream& os) { write_confusion_tsv(os, cm, p); });
      log_ << "train-classifier: " << name << " train accuracy " << natalign::detail::fmt(r.training_accuracy, 4)
           << ", held-out accuracy " << natalign::detail::fmt(cm.accuracy(), 4) << '\n';
      tests[perspective_index(p)] = std::move(test);
      trained.emplace(p, std::move(r.classifier));
    }
    if (trained.size() == 3) {
      std::array<const NaturalnessScorer*, 3> ptrs{};
      for (std::size_t i = 0; i < 3; ++i) ptrs[i] = &trained.at(kAllPerspectives[i]);
      write_file("classifier_grid.tsv",
                 [&](std::ostream& os) { write_grid_tsv(os, cross_perspective_grid(ptrs, tests)); });
    }
  }

  void align() {
    if (!fs::exists(out_ / "base.ckpt")) throw Error("base checkpoint missing: run train-base first");
    const auto& c = corpus();
    Model model = load_model("base");
    const auto clf = load_perspective_classifier(cfg_.align.perspective);
    const auto scorer = make_content_scorer(cfg_.content_scorer);
    const auto pairs = c.pairs_in(Split::kTrain);
    const auto valid = c.pairs_in(Split::kValid);
    if (valid.empty()) throw DataError("align: the manifest has no parallel validation entries");

    AlignConfig acfg = cfg_.align;
    if (cfg_.sigma_c_auto) {
      std::vector<double> scores;
      for (const auto& p : valid) scores.push_back(scorer->score(p.source, p.target, decode_beam(model, p.source, 1).sentence));
      acfg.reward.sigma_c = calibrate_threshold(scores, cfg_.calibration_quantile);
      log_ << "align: calibrated sigma_c = " << natalign::detail::fmt(acfg.reward.sigma_c, 4) << '\n';
    }

    fs::create_directories(out_ / "align");
    AlignCallbacks<float> cb;
    cb.on_checkpoint = [&](const Checkpoint<float>& ck) {
      save_checkpoint(out_ / "align" / ("step_" + std::to_string(ck.step) + ".ckpt"), ck);
    };
    const auto result = align_train(model, pairs, clf, *scorer, acfg, cb);
    for (const auto& w : result.warnings) log_ << "align: warning: " << w << '\n';
    write_file("align_log.tsv", [&](std::ostream& os) {
      write_step_log_header(os);
      for (const auto& l : result.logs) write_step_log(os, l);
    });

    const auto res = resources(scorer.get(), nullptr);
    std::vector<CurvePoint> points;
    std::vector<CheckpointEval> evals;
    for (const auto& ck : result.checkpoints) {
      points.push_back(evaluate_checkpoint(ck.step, ck.model, valid, res.res, acfg.perspective, cfg_.align_eval_beam));
      evals.push_back(to_checkpoint_eval(points.back(), acfg.perspective));
    }
    write_file("curves.tsv", [&](std::ostream& os) { write_curves_tsv(os, points); });
    const auto& chosen = select_checkpoint(result.checkpoints, evals, cfg_.select, cfg_.fixed_step);
    save_checkpoint(out_ / "aligned.ckpt", chosen);
    write_file("selection.txt", [&](std::ostream& os) {
      os << "criterion\t" << (cfg_.select == SelectionCriterion::kMaxHm ? "hm" : "fixed") << '\n'
         << "step\t" << chosen.step << '\n'
         << "sigma_c\t" << natalign::detail::fmt(acfg.reward.sigma_c, 6) << '\n'
         << "aborted\t" << (result.aborted ? 1 : 0) << '\n';
      for (const auto& w : result.warnings) os << "warning\t" << w << '\n';
    });
    log_ << "align: " << result.logs.size() << " steps, selected step " << chosen.step << '\n';
  }

  void translate(const StageOptions& opt) {
    const Model model = load_model(opt.model);
    const auto pairs = split_pairs(opt.split);
    const std::string system = opt.system.empty() ? fs::path(opt.model).stem().string() : opt.system;
    write_system(system, translate_system(system, model, pairs, cfg_.eval_beam, opt.model));
    log_ << "translate: " << pairs.size() << " sentences as system '" << system << "'\n";
  }

  void rerank(const StageOptions& opt) {
    const Model model = load_model(opt.model);
    const auto clf = load_perspective_classifier(cfg_.align.perspective);
    const auto pairs = split_pairs(opt.split);
    const std::string system = opt.system.empty() ? "rerank" : opt.system;
    Rng rng(cfg_.seed);
    SystemOutput out{system, {}, 0, opt.model};
    std::map<std::string, std::size_t> index;
    for (const auto& p : pairs) {
      auto [it, inserted] = index.emplace(p.book_id, out.books.size());
      if (inserted) out.books.push_back({p.book_id, "", Provenance::kMachine, {}});
      out.books[it->second].sentences.push_back(rerank_topk(model, p.source, clf, rng, cfg_.rerank).sentence);
    }
    write_system(system, out);
    log_ << "rerank: " << pairs.size() << " sentences as system '" << system << "'\n";
  }

  void evaluate() {
    const auto& c = corpus();
    const auto refs = c.pairs_in(Split::kTest);
    if (refs.empty()) throw DataError("evaluate: the manifest has no parallel test entries");
    if (cfg_.systems.empty()) throw ConfigError("eval.systems", "is empty");
    const auto scorer = make_content_scorer(cfg_.content_scorer);
    const auto table = build_translation_table(token_pairs(c.pairs_in(Split::kTrain)), cfg_.table);
    const auto res = resources(scorer.get(), &table);

    std::vector<std::string> books;
    for (const auto& p : refs)
      if (std::find(books.begin(), books.end(), p.book_id) == books.end()) books.push_back(p.book_id);
    std::vector<SystemOutput> systems;
    for (const auto& name : cfg_.systems) {
      const fs::path dir = out_ / "translations" / name;
      if (!fs::is_directory(dir)) throw DataError("translations for system '" + name + "' missing: " + dir.string());
      SystemOutput s{name, {}, 0, ""};
      for (const auto& b : books) {
        const fs::path file = dir / (b + ".txt");
        if (!fs::exists(file)) continue;  // reported as a missing book below
        Document d{b, "", Provenance::kMachine, {}};
        for (const auto& line : read_lines(file)) d.sentences.push_back(tokenize(line, cfg_.lowercase));
        s.books.push_back(std::move(d));
      }
      systems.push_back(std::move(s));
    }
    const auto report = evaluate_systems(systems, refs, res.res);
    write_file("report.tsv", [&](std::ostream& os) { write_report_tsv(os, report); });
    log_ << "evaluate: " << report.rows.size() << " rows\n";
  }

  void curves() {
    const auto& c = corpus();
    const auto valid = c.pairs_in(Split::kValid);
    if (valid.empty()) throw DataError("curves: the manifest has no parallel validation entries");
    std::vector<std::pair<long, fs::path>> files;
    if (fs::is_directory(out_ / "align"))
      for (const auto& e : fs::directory_iterator(out_ / "align")) {
        const std::string n = e.path().filename().string();
        if (n.rfind("step_", 0) == 0 && e.path().extension() == ".ckpt")
          files.emplace_back(std::stol(n.substr(5)), e.path());
      }
    if (files.empty()) throw Error("alignment checkpoints missing: run align first");
    std::sort(files.begin(), files.end());
    const auto scorer = make_content_scorer(cfg_.content_scorer);
    const auto res = resources(scorer.get(), nullptr);
    std::vector<CurvePoint> points;
    for (const auto& [step, path] : files) {
      const auto ck = load_checkpoint<float>(path);
      points.push_back(evaluate_checkpoint(step, ck.model, valid, res.res, cfg_.align.perspective, cfg_.align_eval_beam));
    }
    write_file("curves.tsv", [&](std::ostream& os) { write_curves_tsv(os, points); });
    log_ << "curves: " << points.size() << " checkpoints\n";
  }

 private:
  struct Resources {
    std::vector<std::unique_ptr<NaturalnessClassifier>> owned;
    EvaluationResources res;
  };

  const LoadedCorpus& corpus() {
    if (!corpus_) {
      cfg_.require_corpus();
      corpus_ = load_corpus(cfg_.manifest, cfg_.data_dir, cfg_.lowercase);
    }
    return *corpus_;
  }

  std::vector<ParallelPair> split_pairs(const std::string& split) {
    return corpus().pairs_in(parse_split(split));
  }

  /// Provenance pools for classifier data: manifest documents plus any
  /// synthesized MT documents of the same split.
  std::vector<Document> pools(Split split) {
    auto docs = corpus().documents_in(split);
    const fs::path mt = out_ / "mt_manifest.tsv";
    if (fs::exists(mt)) {
      const auto synth = load_corpus(mt, out_, cfg_.lowercase);
      for (const auto& d : synth.documents_in(split)) docs.push_back(d);
    }
    return docs;
  }

  Vocabulary read_vocab(const std::string& name) const {
    std::ifstream in(out_ / name);
    if (!in) throw Error(name + " missing: run ingest first");
    return Vocabulary::load(in);
  }

  Model load_model(const std::string& which) const {
    fs::path path = which;
    if (which == "base" || which == "aligned") path = out_ / (which + ".ckpt");
    if (!fs::exists(path)) throw Error((which == "base" ? std::string("base checkpoint") : "checkpoint " + path.string()) + " missing");
    return load_checkpoint<float>(path).model;
  }

  NaturalnessClassifier load_perspective_classifier(Perspective p) const {
    const fs::path path = out_ / ("classifier." + std::string(to_string(p)) + ".bin");
    if (!fs::exists(path))
      throw Error("classifier for " + std::string(to_string(p)) + " missing: run train-classifier first");
    return load_classifier(path);
  }

  Resources resources(const ContentScorer* scorer, const LexicalTranslationTable* table) const {
    Resources r;
    for (std::size_t i = 0; i < 3; ++i) {
      const fs::path path = out_ / ("classifier." + std::string(to_string(kAllPerspectives[i])) + ".bin");
      if (!fs::exists(path)) continue;
      r.owned.push_back(std::make_unique<NaturalnessClassifier>(load_classifier(path)));
      r.res.classifiers[i] = r.owned.back().get();
    }
    r.res.content = scorer;
    r.res.table = table;
    const fs::path top = out_ / "top_words.txt";
    if (!fs::exists(top)) throw Error("top_words.txt missing: run ingest first");
    int n = 0;
    for (const auto& w : read_lines(top))
      if (!w.empty() && n++ < cfg_.top_words) r.res.top_words.insert(w);
    r.res.mtld_threshold = cfg_.mtld_threshold;
    r.res.postprocess = cfg_.postprocess;
    return r;
  }

  void write_system(const std::string& system, const SystemOutput& out) const {
    const fs::path dir = out_ / "translations" / system;
    fs::create_directories(dir);
    for (const auto& b : out.books) write_lines("translations/" + system + "/" + b.id + ".txt", b.sentences);
  }

  void write_lines(const std::string& rel, const std::vector<Sentence>& sentences) const {
    write_file(rel, [&](std::ostream& os) {
      for (const auto& s : sentences) os << join_tokens(s.tokens) << '\n';
    });
  }

  template <typename F>
  void write_file(const std::string& rel, F&& body) const {
    const fs::path path = out_ / rel;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    body(os);
    if (!os) throw Error("write failed: " + path.string());
  }

  RunConfig cfg_;
  fs::path out_;
  std::ostream& log_;
  std::optional<LoadedCorpus> corpus_;
};

/// Full command-line entry point. Exit codes: 0 success, 1 configuration,
/// data or runtime failure, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"natalign: naturalness-aligned machine translation pipeline", "natalign"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<long> seed;
  StageOptions stage;
  app.add_option("-c,--config", config_path, "key=value config file (default: $" + std::string(kConfigEnv) + ")");
  app.add_option("-s,--set", overrides, "override one setting, key=value (repeatable)")
      ->allow_extra_args(false);
  app.add_option("--seed", seed, "global seed");

  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name);
    if (name == "translate" || name == "rerank") {
      sub->add_option("--model", stage.model, "base, aligned, or a checkpoint path");
      sub->add_option("--system", stage.system, "system name for the output directory");
      sub->add_option("--split", stage.split, "corpus split to translate")
          ->check(CLI::IsMember({"train", "valid", "test"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    Settings settings;
    if (config_path.empty())
      if (const char* env = std::getenv(kConfigEnv); env && *env) config_path = env;
    if (!config_path.empty()) settings.load(config_path);
    for (const auto& kv : overrides) settings.assign(kv);
    if (seed) settings.set("seed", std::to_string(*seed));
    RunConfig cfg = RunConfig::from(settings);

    OutputLock lock(cfg.output_dir);
    {
      std::ofstream echo(cfg.output_dir / (name + ".config"));
      settings.write(echo);
    }
    Pipeline(std::move(cfg), out).run(name, stage);
    return 0;
  } catch (const ConfigError& e) {
    err << "natalign " << name << ": config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "natalign " << name << ": " << e.what() << '\n';
  }
  return 1;
}

}  // namespace natalign::cli
