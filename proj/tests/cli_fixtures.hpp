// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// In-process CLI driver and a small on-disk corpus, shared by the CLI tests
// and the acceptance run.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "natalign/cli/app.hpp"
#include "natalign/synthetic/tasks.hpp"

namespace natalign::cli::clitest {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out, err;
};

inline Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "natalign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream os(p);
  for (const auto& l : lines) os << l << '\n';
}

inline fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("natalign_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Small register-task corpus on disk: two HT training books, OR monolingual
// text for train and valid, one HT validation book, two HT test books.
inline fs::path make_corpus(const fs::path& dir) {
  synthetic::StyleTaskOptions o;
  o.base_train = 160;
  o.align = 0;
  o.classifier = 60;
  o.classifier_test = 30;
  o.valid = 24;
  o.test = 24;
  o.books = 2;
  const auto task = synthetic::make_style_task(o);
  std::ostringstream manifest;
  auto parallel = [&](const std::string& id, const std::vector<ParallelPair>& pairs, const std::string& split) {
    std::vector<std::string> src, tgt;
    for (const auto& p : pairs) {
      src.push_back(join_tokens(p.source.tokens));
      tgt.push_back(join_tokens(p.target.tokens));
    }
    write_lines(dir / (id + ".src"), src);
    write_lines(dir / (id + ".tgt"), tgt);
    manifest << id << '\t' << id << ".src," << id << ".tgt\tnl\tHT\t" << split << '\n';
  };
  auto mono = [&](const std::string& id, const std::vector<ParallelPair>& pairs, const std::string& split) {
    std::vector<std::string> tgt;
    for (const auto& p : pairs) tgt.push_back(join_tokens(p.target.tokens));
    write_lines(dir / (id + ".txt"), tgt);
    manifest << id << '\t' << id << ".txt\tnl\tOR\t" << split << '\n';
  };
  const auto half = task.base_train.begin() + 80;
  parallel("train_a", {task.base_train.begin(), half}, "train");
  parallel("train_b", {half, task.base_train.end()}, "train");
  mono("or_train", task.classifier_pairs, "train");
  mono("or_valid", task.classifier_test_pairs, "valid");
  parallel("dev", task.valid, "valid");
  parallel("test_a", {task.test.begin(), task.test.begin() + 12}, "test");
  parallel("test_b", {task.test.begin() + 12, task.test.end()}, "test");
  write_lines(dir / "manifest.tsv", {manifest.str()});
  return dir / "manifest.tsv";
}

inline std::vector<std::string> tiny_settings(const fs::path& data, const fs::path& out) {
  const std::vector<std::string> kv = {
      "paths.manifest=" + (data / "manifest.tsv").string(),
      "paths.data_dir=" + data.string(),
      "paths.output_dir=" + out.string(),
      "model.encoder_layers=1",
      "model.decoder_layers=1",
      "model.width=16",
      "model.heads=2",
      "model.ff_width=32",
      "model.max_len=24",
      "train.max_steps=40",
      "train.eval_interval=20",
      "train.batch=8",
      "train.accum=1",
      "train.warmup=5",
      "train.max_lr=3e-3",
      "synth.beam=2",
      "classifier.epochs=3",
      "align.max_steps=4",
      "align.checkpoint_interval=2",
      "align.batch=4",
      "eval.beam=2",
      "eval.systems=base,aligned,rerank",
      "rerank.candidates=2",
  };
  std::vector<std::string> args;
  for (const auto& s : kv) {
    args.push_back("--set");
    args.push_back(s);
  }
  return args;
}

inline const std::vector<std::vector<std::string>> kStages = {
    {"ingest"},
    {"train-base"},
    {"synth-mt"},
    {"train-classifier"},
    {"align"},
    {"translate", "--model", "base"},
    {"translate", "--model", "aligned"},
    {"rerank"},
    {"evaluate"},
    {"curves"},
};

/// Runs every stage in order; returns the first failure, empty on success.
inline std::string run_pipeline(const fs::path& data, const fs::path& out, long seed) {
  for (const auto& stage : kStages) {
    auto args = tiny_settings(data, out);
    args.push_back("--seed");
    args.push_back(std::to_string(seed));
    args.insert(args.end(), stage.begin(), stage.end());
    const auto r = invoke(args);
    if (r.code != 0) return stage[0] + ": " + r.err;
  }
  return "";
}

inline std::map<std::string, std::string> artifacts(const fs::path& out) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file() || e.path().extension() == ".config") continue;
    files[fs::relative(e.path(), out).string()] = slurp(e.path());
  }
  return files;
}

}  // namespace natalign::cli::clitest
