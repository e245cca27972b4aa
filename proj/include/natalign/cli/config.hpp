// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Flat key=value run configuration. Keys carry a section prefix
// ("train.max_lr"); every key has a default, unknown keys are rejected, and
// later assignments (command-line overrides) win.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "natalign/align/align.hpp"
#include "natalign/align/rerank.hpp"
#include "natalign/align/select.hpp"
#include "natalign/classifier/classifier.hpp"
#include "natalign/core/error.hpp"
#include "natalign/metrics/translation_table.hpp"
#include "natalign/seq2seq/model.hpp"
#include "natalign/seq2seq/tagging.hpp"
#include "natalign/seq2seq/trainer.hpp"

namespace natalign::cli {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Every recognized key with its default value, as text.
inline const std::map<std::string, std::string>& default_settings() {
  static const std::map<std::string, std::string> d = [] {
    const ModelConfig m;
    const TrainConfig t;
    const ClassifierTrainOptions c;
    const FeatureSpec f;
    const AlignConfig a;
    const TableOptions tab;
    const RerankOptions rr;
    auto num = [](double v) {
      std::ostringstream os;
      os << v;
      return os.str();
    };
    return std::map<std::string, std::string>{
        {"seed", "1"},
        {"paths.manifest", ""},
        {"paths.data_dir", "."},
        {"paths.output_dir", "natalign_run"},
        {"corpus.lowercase", "0"},
        {"corpus.min_freq", "1"},
        {"model.encoder_layers", num(m.encoder_layers)},
        {"model.decoder_layers", num(m.decoder_layers)},
        {"model.width", num(m.width)},
        {"model.heads", num(m.heads)},
        {"model.ff_width", num(m.ff_width)},
        {"model.max_len", num(m.max_len)},
        {"model.tagged", "0"},
        {"train.max_lr", num(t.max_lr)},
        {"train.warmup", num(t.warmup)},
        {"train.batch", num(t.batch)},
        {"train.accum", num(t.accum)},
        {"train.eval_interval", num(t.eval_interval)},
        {"train.patience", num(t.patience)},
        {"train.max_steps", num(t.max_steps)},
        {"train.weight_decay", num(t.weight_decay)},
        {"train.clip", num(t.clip)},
        {"tagging.translated_per_original", "0"},
        {"synth.beam", "5"},
        {"classifier.perspectives", "HT-OR,MT-HT,MT-OR"},
        {"classifier.reg", num(c.reg)},
        {"classifier.lr", num(c.lr)},
        {"classifier.epochs", num(c.epochs)},
        {"classifier.batch", num(c.batch)},
        {"classifier.min_order", num(f.min_order)},
        {"classifier.max_order", num(f.max_order)},
        {"classifier.hash_bits", num(f.hash_bits)},
        {"classifier.word_unigrams", f.word_unigrams ? "1" : "0"},
        {"classifier.lowercase", f.lowercase ? "1" : "0"},
        {"reward.sigma_t", num(a.reward.sigma_t)},
        {"reward.sigma_c", num(a.reward.sigma_c)},
        {"reward.calibration_quantile", "0.6"},
        {"reward.beta", num(a.reward.beta)},
        {"reward.mode", std::string(to_string(a.reward.mode))},
        {"reward.content", "chrf"},
        {"align.perspective", std::string(to_string(a.perspective))},
        {"align.samples_per_source", num(a.samples_per_source)},
        {"align.temperature", num(a.temperature)},
        {"align.top_k", num(a.top_k)},
        {"align.lr", num(a.lr)},
        {"align.warmup", num(a.warmup)},
        {"align.weight_decay", num(a.weight_decay)},
        {"align.batch", num(a.batch)},
        {"align.max_steps", num(a.max_steps)},
        {"align.checkpoint_interval", num(a.checkpoint_interval)},
        {"align.clip", num(a.clip)},
        {"align.baseline", a.baseline ? "1" : "0"},
        {"align.baseline_decay", num(a.baseline_decay)},
        {"align.select", "fixed"},
        {"align.fixed_step", "5000"},
        {"align.eval_beam", "1"},
        {"metrics.mtld_threshold", "0.72"},
        {"metrics.top_words", "1000"},
        {"metrics.table_iters", num(tab.iters)},
        {"metrics.posterior_floor", num(tab.posterior_floor)},
        {"metrics.min_source_freq", num(tab.min_source_freq)},
        {"metrics.min_options", num(tab.min_options)},
        {"eval.beam", "5"},
        {"eval.postprocess", "1"},
        {"eval.systems", "base,aligned"},
        {"rerank.candidates", num(rr.candidates)},
        {"rerank.top_k", num(rr.top_k)},
        {"rerank.temperature", num(rr.temperature)},
    };
  }();
  return d;
}

/// Resolved settings plus typed accessors that raise ConfigError naming the
/// key on malformed values.
class Settings {
 public:
  Settings() : values_(default_settings()) {}

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw ConfigError(key, "unknown configuration key");
    values_[key] = value;
  }

  /// "key=value" form used by overrides.
  void assign(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "expected key=value");
    set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
  }

  /// Reads key=value lines; '#' starts a comment.
  void load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.find('=') == std::string::npos)
        throw ConfigError("config", path.string() + ":" + std::to_string(lineno) + ": expected key=value");
      assign(line);
    }
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "unknown configuration key");
    return it->second;
  }

  long integer(const std::string& key) const {
    const auto& s = str(key);
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ConfigError(key, "expected an integer, got '" + s + "'");
    return v;
  }

  double real(const std::string& key) const {
    const auto& s = str(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key, "expected a number, got '" + s + "'");
  }

  bool flag(const std::string& key) const {
    const auto& s = str(key);
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw ConfigError(key, "expected 0/1, got '" + s + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream is(str(key));
    std::string item;
    while (std::getline(is, item, ','))
      if (!detail::trim(item).empty()) out.push_back(detail::trim(item));
    return out;
  }

  /// Sorted key=value lines, the form echoed next to run outputs.
  void write(std::ostream& os) const {
    for (const auto& [k, v] : values_) os << k << '=' << v << '\n';
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Typed view of the settings. The global seed feeds every stochastic
/// component.
struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path manifest, data_dir, output_dir;
  bool lowercase = false;
  int min_freq = 1;
  ModelConfig model;
  TrainConfig train;
  TaggingOptions tagging;
  int synth_beam = 5;
  std::vector<Perspective> classifier_perspectives;
  ClassifierTrainOptions classifier;
  FeatureSpec features;
  AlignConfig align;
  bool sigma_c_auto = false;
  double calibration_quantile = 0.6;
  std::string content_scorer;
  SelectionCriterion select = SelectionCriterion::kFixedStep;
  long fixed_step = 5000;
  int align_eval_beam = 1;
  double mtld_threshold = 0.72;
  int top_words = 1000;
  TableOptions table;
  int eval_beam = 5;
  bool postprocess = true;
  std::vector<std::string> systems;
  RerankOptions rerank;

  static RunConfig from(const Settings& s) {
    RunConfig c;
    const long seed = s.integer("seed");
    if (seed < 0) throw ConfigError("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    c.manifest = s.str("paths.manifest");
    c.data_dir = s.str("paths.data_dir");
    c.output_dir = s.str("paths.output_dir");
    if (c.output_dir.empty()) throw ConfigError("paths.output_dir", "must be set");
    c.lowercase = s.flag("corpus.lowercase");
    c.min_freq = static_cast<int>(s.integer("corpus.min_freq"));
    if (c.min_freq < 1) throw ConfigError("corpus.min_freq", "must be >= 1");

    auto i = [&](const char* k) { return static_cast<int>(s.integer(k)); };
    c.model.encoder_layers = i("model.encoder_layers");
    c.model.decoder_layers = i("model.decoder_layers");
    c.model.width = i("model.width");
    c.model.heads = i("model.heads");
    c.model.ff_width = i("model.ff_width");
    c.model.max_len = i("model.max_len");
    c.model.tagged = s.flag("model.tagged");
    {
      ModelConfig probe = c.model;
      probe.src_vocab = probe.tgt_vocab = 1;
      probe.validate();
    }

    c.train.max_lr = s.real("train.max_lr");
    c.train.warmup = i("train.warmup");
    c.train.batch = i("train.batch");
    c.train.accum = i("train.accum");
    c.train.eval_interval = i("train.eval_interval");
    c.train.patience = i("train.patience");
    c.train.max_steps = i("train.max_steps");
    c.train.weight_decay = s.real("train.weight_decay");
    c.train.clip = s.real("train.clip");
    c.train.seed = c.seed;
    c.train.validate();
    c.tagging.translated_per_original = s.real("tagging.translated_per_original");
    if (c.tagging.translated_per_original < 0)
      throw ConfigError("tagging.translated_per_original", "must be >= 0");
    c.tagging.seed = c.seed;

    c.synth_beam = i("synth.beam");
    if (c.synth_beam < 1) throw ConfigError("synth.beam", "must be >= 1");

    for (const auto& p : s.list("classifier.perspectives")) {
      try {
        c.classifier_perspectives.push_back(parse_perspective(p));
      } catch (const ConfigError& e) {
        throw ConfigError("classifier.perspectives", e.what());
      }
    }
    c.classifier.reg = s.real("classifier.reg");
    c.classifier.lr = s.real("classifier.lr");
    c.classifier.epochs = i("classifier.epochs");
    c.classifier.batch = i("classifier.batch");
    c.classifier.seed = c.seed;
    c.classifier.validate();
    c.features.min_order = i("classifier.min_order");
    c.features.max_order = i("classifier.max_order");
    c.features.hash_bits = i("classifier.hash_bits");
    c.features.word_unigrams = s.flag("classifier.word_unigrams");
    c.features.lowercase = s.flag("classifier.lowercase");
    c.features.validate();

    c.align.reward.sigma_t = s.real("reward.sigma_t");
    c.sigma_c_auto = s.str("reward.sigma_c") == "auto";
    if (!c.sigma_c_auto) c.align.reward.sigma_c = s.real("reward.sigma_c");
    c.calibration_quantile = s.real("reward.calibration_quantile");
    if (!(c.calibration_quantile >= 0.0 && c.calibration_quantile <= 1.0))
      throw ConfigError("reward.calibration_quantile", "must be in [0, 1]");
    c.align.reward.beta = s.real("reward.beta");
    try {
      c.align.reward.mode = parse_reward_mode(s.str("reward.mode"));
    } catch (const ConfigError& e) {
      throw ConfigError("reward.mode", e.what());
    }
    c.content_scorer = s.str("reward.content");
    try {
      c.align.perspective = parse_perspective(s.str("align.perspective"));
    } catch (const ConfigError& e) {
      throw ConfigError("align.perspective", e.what());
    }
    c.align.samples_per_source = i("align.samples_per_source");
    c.align.temperature = s.real("align.temperature");
    c.align.top_k = i("align.top_k");
    c.align.lr = s.real("align.lr");
    c.align.warmup = i("align.warmup");
    c.align.weight_decay = s.real("align.weight_decay");
    c.align.batch = i("align.batch");
    c.align.max_steps = i("align.max_steps");
    c.align.checkpoint_interval = i("align.checkpoint_interval");
    c.align.clip = s.real("align.clip");
    c.align.baseline = s.flag("align.baseline");
    c.align.baseline_decay = s.real("align.baseline_decay");
    c.align.seed = c.seed;
    c.align.validate();
    c.select = parse_selection_criterion(s.str("align.select"));
    c.fixed_step = s.integer("align.fixed_step");
    c.align_eval_beam = i("align.eval_beam");
    if (c.align_eval_beam < 1) throw ConfigError("align.eval_beam", "must be >= 1");

    c.mtld_threshold = s.real("metrics.mtld_threshold");
    if (!(c.mtld_threshold > 0.0 && c.mtld_threshold < 1.0))
      throw ConfigError("metrics.mtld_threshold", "must be in (0, 1)");
    c.top_words = i("metrics.top_words");
    if (c.top_words < 1) throw ConfigError("metrics.top_words", "must be >= 1");
    c.table.iters = i("metrics.table_iters");
    c.table.posterior_floor = s.real("metrics.posterior_floor");
    c.table.min_source_freq = i("metrics.min_source_freq");
    c.table.min_options = i("metrics.min_options");
    if (c.table.iters < 0) throw ConfigError("metrics.table_iters", "must be >= 0");

    c.eval_beam = i("eval.beam");
    if (c.eval_beam < 1) throw ConfigError("eval.beam", "must be >= 1");
    c.postprocess = s.flag("eval.postprocess");
    c.systems = s.list("eval.systems");

    c.rerank.candidates = i("rerank.candidates");
    c.rerank.top_k = i("rerank.top_k");
    c.rerank.temperature = s.real("rerank.temperature");
    if (c.rerank.candidates < 1) throw ConfigError("rerank.candidates", "must be >= 1");
    if (c.rerank.top_k < 0) throw ConfigError("rerank.top_k", "must be >= 0");
    if (!(c.rerank.temperature > 0.0)) throw ConfigError("rerank.temperature", "must be positive");
    return c;
  }

  /// Corpus paths must exist before any stage reads them.
  void require_corpus() const {
    if (manifest.empty()) throw ConfigError("paths.manifest", "must be set");
    if (!std::filesystem::exists(manifest))
      throw ConfigError("paths.manifest", "does not exist: " + manifest.string());
    if (!std::filesystem::is_directory(data_dir))
      throw ConfigError("paths.data_dir", "is not a directory: " + data_dir.string());
  }
};

}  // namespace natalign::cli
