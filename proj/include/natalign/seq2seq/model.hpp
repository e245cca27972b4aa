// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/hash.hpp"
#include "natalign/core/random.hpp"
#include "natalign/corpus/types.hpp"
#include "natalign/corpus/vocabulary.hpp"
#include "natalign/seq2seq/autodiff.hpp"

namespace natalign {

struct ModelConfig {
  int encoder_layers = 2;
  int decoder_layers = 2;
  int width = 128;
  int heads = 4;
  int ff_width = 512;
  int max_len = 128;
  int src_vocab = 0;
  int tgt_vocab = 0;
  /// Sources carry an <orig>/<tran> tag; inference prepends <orig>.
  bool tagged = false;

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v <= 0) throw ConfigError(std::string("model.") + name, "must be positive");
    };
    positive(encoder_layers, "encoder_layers");
    positive(decoder_layers, "decoder_layers");
    positive(width, "width");
    positive(heads, "heads");
    positive(ff_width, "ff_width");
    positive(max_len, "max_len");
    positive(src_vocab, "src_vocab");
    positive(tgt_vocab, "tgt_vocab");
    if (width % heads != 0)
      throw ConfigError("model.heads", "width must be divisible by heads");
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "encoder_layers=" << encoder_layers << "\ndecoder_layers=" << decoder_layers
       << "\nwidth=" << width << "\nheads=" << heads << "\nff_width=" << ff_width
       << "\nmax_len=" << max_len << "\nsrc_vocab=" << src_vocab
       << "\ntgt_vocab=" << tgt_vocab << "\ntagged=" << (tagged ? 1 : 0) << "\n";
    return os.str();
  }

  static ModelConfig parse(const std::string& text) {
    ModelConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = line.substr(0, eq);
      const int v = std::stoi(line.substr(eq + 1));
      if (k == "encoder_layers") c.encoder_layers = v;
      else if (k == "decoder_layers") c.decoder_layers = v;
      else if (k == "width") c.width = v;
      else if (k == "heads") c.heads = v;
      else if (k == "ff_width") c.ff_width = v;
      else if (k == "max_len") c.max_len = v;
      else if (k == "src_vocab") c.src_vocab = v;
      else if (k == "tgt_vocab") c.tgt_vocab = v;
      else if (k == "tagged") c.tagged = v != 0;
      else throw DataError("unknown model config key '" + k + "'");
    }
    return c;
  }

  std::uint64_t hash() const { return fnv1a(serialize()); }

  bool operator==(const ModelConfig&) const = default;
};

namespace detail {

struct AttentionParams {
  int wq, bq, wk, bk, wv, bv, wo, bo;
};
struct NormParams {
  int gain, bias;
};
struct FeedForwardParams {
  int w1, b1, w2, b2;
};
struct EncoderLayerParams {
  NormParams norm1;
  AttentionParams attn;
  NormParams norm2;
  FeedForwardParams ffn;
};
struct DecoderLayerParams {
  NormParams norm1;
  AttentionParams self_attn;
  NormParams norm2;
  AttentionParams cross_attn;
  NormParams norm3;
  FeedForwardParams ffn;
};

}  // namespace detail

/// Pre-norm Transformer encoder-decoder p(y | x; theta).
///
/// Parameters live in a flat named store. Gradient buffers are mutable so a
/// const model can still be differentiated through a recording tape; a
/// non-recording tape never touches them.
template <typename T>
class Seq2Seq {
 public:
  using Scalar = T;

  Seq2Seq() = default;

  Seq2Seq(ModelConfig cfg, Vocabulary src, Vocabulary tgt, std::uint64_t seed)
      : cfg_(std::move(cfg)), src_vocab_(std::move(src)), tgt_vocab_(std::move(tgt)) {
    cfg_.src_vocab = src_vocab_.size();
    cfg_.tgt_vocab = tgt_vocab_.size();
    cfg_.validate();
    build_layout();
    initialize(seed);
  }

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& source_vocab() const { return src_vocab_; }
  const Vocabulary& target_vocab() const { return tgt_vocab_; }

  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }

  Parameter<T>& parameter(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return p;
    throw Error("no parameter named '" + name + "'");
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  /// Optimizer steps applied so far; 0 means untrained.
  long steps_trained() const { return steps_; }
  void set_steps_trained(long s) { steps_ = s; }
  bool trained() const { return steps_ > 0; }

  void zero_grad() const {
    for (const auto& p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
  }

  /// Throws NumericError naming the first parameter with a NaN/Inf entry.
  void check_finite() const {
    for (const auto& p : params_)
      if (!p.value.allFinite())
        throw NumericError("non-finite value in parameter '" + p.name + "'");
  }

  /// Restores parameter values from another model with the same layout.
  void copy_values_from(const Seq2Seq& other) {
    if (other.params_.size() != params_.size()) throw Error("layout mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i].value = other.params_[i].value;
    steps_ = other.steps_;
  }

  /// Replace the parameter store wholesale (checkpoint loading).
  void load_parameters(std::vector<Parameter<T>> loaded) {
    if (loaded.size() != params_.size()) throw DataError("checkpoint: parameter count mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (loaded[i].name != params_[i].name ||
          loaded[i].value.rows() != params_[i].value.rows() ||
          loaded[i].value.cols() != params_[i].value.cols())
        throw DataError("checkpoint: parameter '" + loaded[i].name + "' does not fit the layout");
      params_[i].value = std::move(loaded[i].value);
    }
  }

  // -------------------------------------------------------------------------
  // Encoding of sentences into id sequences.

  /// Source ids followed by EOS. A tagged model gets <orig> unless the
  /// sentence already starts with a tag.
  std::vector<int> encode_source(const Sentence& x) const {
    std::vector<int> ids;
    if (cfg_.tagged && (x.tokens.empty() || (x.tokens.front() != "<orig>" &&
                                             x.tokens.front() != "<tran>")))
      ids.push_back(Vocabulary::kOrigTag);
    for (int id : src_vocab_.encode(x.tokens)) ids.push_back(id);
    ids.push_back(Vocabulary::kEos);
    if (static_cast<int>(ids.size()) > cfg_.max_len)
      throw Error("source of " + std::to_string(ids.size()) +
                  " ids exceeds model max_len " + std::to_string(cfg_.max_len));
    return ids;
  }

  /// Target ids without BOS/EOS.
  std::vector<int> encode_target(const Sentence& y) const {
    auto ids = tgt_vocab_.encode(y.tokens);
    if (static_cast<int>(ids.size()) + 1 > cfg_.max_len)
      throw Error("target of " + std::to_string(ids.size()) +
                  " tokens exceeds model max_len " + std::to_string(cfg_.max_len));
    return ids;
  }

  /// Longest output (in tokens, EOS included) the decoder can produce while
  /// the output stays usable as a teacher-forcing target.
  int max_output_steps() const { return cfg_.max_len - 1; }

  // -------------------------------------------------------------------------
  // Differentiable forward pass.

  ad::Var<T> encode(ad::Tape<T>& t, const std::vector<int>& src_ids) const {
    const int n = static_cast<int>(src_ids.size());
    auto x = ad::scale(ad::embedding(leaf(t, src_embed_), src_ids), embed_scale());
    x = ad::add_constant(x, Matrix<T>(positions_.topRows(n)));
    for (const auto& L : enc_layers_) {
      auto h = norm(t, x, L.norm1);
      x = ad::add(x, attention(t, h, h, L.attn, false));
      h = norm(t, x, L.norm2);
      x = ad::add(x, feed_forward(t, h, L.ffn));
    }
    return norm(t, x, enc_norm_);
  }

  /// Logits (len(dec_in) x tgt_vocab) for teacher-forced decoder input.
  ad::Var<T> decode(ad::Tape<T>& t, ad::Var<T> memory, const std::vector<int>& dec_in) const {
    const int n = static_cast<int>(dec_in.size());
    if (n > cfg_.max_len) throw Error("decoder input exceeds max_len");
    auto y = ad::scale(ad::embedding(leaf(t, tgt_embed_), dec_in), embed_scale());
    y = ad::add_constant(y, Matrix<T>(positions_.topRows(n)));
    for (const auto& L : dec_layers_) {
      auto h = norm(t, y, L.norm1);
      y = ad::add(y, attention(t, h, h, L.self_attn, true));
      h = norm(t, y, L.norm2);
      y = ad::add(y, attention(t, h, memory, L.cross_attn, false));
      h = norm(t, y, L.norm3);
      y = ad::add(y, feed_forward(t, h, L.ffn));
    }
    y = norm(t, y, dec_norm_);
    auto logits = ad::add_row(ad::matmul(y, leaf(t, out_w_)), leaf(t, out_b_));
    return ad::add_constant(logits, Matrix<T>(output_mask_.replicate(n, 1)));
  }

  // -------------------------------------------------------------------------
  // Raw access used by the incremental decoder.

  const Matrix<T>& value(int index) const { return params_[static_cast<std::size_t>(index)].value; }
  const Matrix<T>& positions() const { return positions_; }
  T embed_scale() const { return std::sqrt(static_cast<T>(cfg_.width)); }
  const std::vector<detail::DecoderLayerParams>& decoder_layers() const { return dec_layers_; }
  int target_embedding_index() const { return tgt_embed_; }
  detail::NormParams decoder_norm() const { return dec_norm_; }
  int output_weight_index() const { return out_w_; }
  int output_bias_index() const { return out_b_; }
  /// Added to every logit row: PAD, BOS and the tags can never be emitted.
  const Matrix<T>& output_mask() const { return output_mask_; }

 private:
  int add_param(const std::string& name, int rows, int cols) {
    Parameter<T> p;
    p.name = name;
    p.value = Matrix<T>::Zero(rows, cols);
    p.grad = Matrix<T>::Zero(rows, cols);
    params_.push_back(std::move(p));
    return static_cast<int>(params_.size()) - 1;
  }

  detail::AttentionParams add_attention(const std::string& prefix) {
    const int d = cfg_.width;
    return {add_param(prefix + ".wq", d, d), add_param(prefix + ".bq", 1, d),
            add_param(prefix + ".wk", d, d), add_param(prefix + ".bk", 1, d),
            add_param(prefix + ".wv", d, d), add_param(prefix + ".bv", 1, d),
            add_param(prefix + ".wo", d, d), add_param(prefix + ".bo", 1, d)};
  }

  detail::NormParams add_norm(const std::string& prefix) {
    return {add_param(prefix + ".gain", 1, cfg_.width), add_param(prefix + ".bias", 1, cfg_.width)};
  }

  detail::FeedForwardParams add_ffn(const std::string& prefix) {
    return {add_param(prefix + ".w1", cfg_.width, cfg_.ff_width),
            add_param(prefix + ".b1", 1, cfg_.ff_width),
            add_param(prefix + ".w2", cfg_.ff_width, cfg_.width),
            add_param(prefix + ".b2", 1, cfg_.width)};
  }

  void build_layout() {
    params_.clear();
    enc_layers_.clear();
    dec_layers_.clear();
    src_embed_ = add_param("src.embed", cfg_.src_vocab, cfg_.width);
    tgt_embed_ = add_param("tgt.embed", cfg_.tgt_vocab, cfg_.width);
    for (int l = 0; l < cfg_.encoder_layers; ++l) {
      const std::string p = "enc." + std::to_string(l);
      detail::EncoderLayerParams L;
      L.norm1 = add_norm(p + ".norm1");
      L.attn = add_attention(p + ".attn");
      L.norm2 = add_norm(p + ".norm2");
      L.ffn = add_ffn(p + ".ffn");
      enc_layers_.push_back(L);
    }
    enc_norm_ = add_norm("enc.norm");
    for (int l = 0; l < cfg_.decoder_layers; ++l) {
      const std::string p = "dec." + std::to_string(l);
      detail::DecoderLayerParams L;
      L.norm1 = add_norm(p + ".norm1");
      L.self_attn = add_attention(p + ".self_attn");
      L.norm2 = add_norm(p + ".norm2");
      L.cross_attn = add_attention(p + ".cross_attn");
      L.norm3 = add_norm(p + ".norm3");
      L.ffn = add_ffn(p + ".ffn");
      dec_layers_.push_back(L);
    }
    dec_norm_ = add_norm("dec.norm");
    out_w_ = add_param("out.weight", cfg_.width, cfg_.tgt_vocab);
    out_b_ = add_param("out.bias", 1, cfg_.tgt_vocab);

    output_mask_ = Matrix<T>::Zero(1, cfg_.tgt_vocab);
    for (int id : {Vocabulary::kPad, Vocabulary::kBos, Vocabulary::kOrigTag, Vocabulary::kTranTag})
      output_mask_(0, id) = T(-1e9);

    positions_.resize(cfg_.max_len, cfg_.width);
    for (int pos = 0; pos < cfg_.max_len; ++pos) {
      for (int i = 0; i < cfg_.width; i += 2) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / cfg_.width);
        positions_(pos, i) = static_cast<T>(std::sin(pos * freq));
        if (i + 1 < cfg_.width) positions_(pos, i + 1) = static_cast<T>(std::cos(pos * freq));
      }
    }
  }

  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& p : params_) {
      const bool is_gain = p.name.ends_with(".gain");
      const bool is_bias = p.value.rows() == 1 && !is_gain;
      if (is_gain) {
        p.value.setOnes();
      } else if (is_bias) {
        p.value.setZero();
      } else if (p.name.ends_with(".embed")) {
        const double sd = 1.0 / std::sqrt(static_cast<double>(cfg_.width));
        for (Eigen::Index i = 0; i < p.value.size(); ++i)
          p.value.data()[i] = static_cast<T>(rng.normal(0.0, sd));
      } else {
        // Xavier uniform.
        const double a = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
        for (Eigen::Index i = 0; i < p.value.size(); ++i)
          p.value.data()[i] = static_cast<T>(rng.uniform(-a, a));
      }
    }
  }

  ad::Var<T> leaf(ad::Tape<T>& t, int index) const {
    return t.leaf(params_[static_cast<std::size_t>(index)]);
  }

  ad::Var<T> norm(ad::Tape<T>& t, ad::Var<T> x, detail::NormParams n) const {
    return ad::layer_norm(x, leaf(t, n.gain), leaf(t, n.bias));
  }

  ad::Var<T> linear(ad::Tape<T>& t, ad::Var<T> x, int w, int b) const {
    return ad::add_row(ad::matmul(x, leaf(t, w)), leaf(t, b));
  }

  ad::Var<T> attention(ad::Tape<T>& t, ad::Var<T> query_in, ad::Var<T> kv_in,
                       const detail::AttentionParams& a, bool causal) const {
    auto q = linear(t, query_in, a.wq, a.bq);
    auto k = linear(t, kv_in, a.wk, a.bk);
    auto v = linear(t, kv_in, a.wv, a.bv);
    const int dk = cfg_.width / cfg_.heads;
    const T inv_sqrt_dk = T(1) / std::sqrt(static_cast<T>(dk));
    std::vector<ad::Var<T>> heads;
    heads.reserve(static_cast<std::size_t>(cfg_.heads));
    for (int h = 0; h < cfg_.heads; ++h) {
      auto qh = ad::columns(q, h * dk, dk);
      auto kh = ad::columns(k, h * dk, dk);
      auto vh = ad::columns(v, h * dk, dk);
      auto probs = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), inv_sqrt_dk), causal);
      heads.push_back(ad::matmul(probs, vh));
    }
    return linear(t, ad::hconcat(heads), a.wo, a.bo);
  }

  ad::Var<T> feed_forward(ad::Tape<T>& t, ad::Var<T> x, const detail::FeedForwardParams& f) const {
    return linear(t, ad::gelu(linear(t, x, f.w1, f.b1)), f.w2, f.b2);
  }

  ModelConfig cfg_;
  Vocabulary src_vocab_;
  Vocabulary tgt_vocab_;
  std::vector<Parameter<T>> params_;
  Matrix<T> positions_;
  Matrix<T> output_mask_;
  long steps_ = 0;

  int src_embed_ = -1, tgt_embed_ = -1, out_w_ = -1, out_b_ = -1;
  detail::NormParams enc_norm_{}, dec_norm_{};
  std::vector<detail::EncoderLayerParams> enc_layers_;
  std::vector<detail::DecoderLayerParams> dec_layers_;
};

// ---------------------------------------------------------------------------
// Sequence-level scoring.

/// Teacher-forcing ids for target y: decoder input BOS+y, gold y+EOS.
struct TeacherForcing {
  std::vector<int> decoder_input;
  std::vector<int> gold;
};

inline TeacherForcing teacher_forcing(const std::vector<int>& target_ids) {
  TeacherForcing tf;
  tf.decoder_input.reserve(target_ids.size() + 1);
  tf.decoder_input.push_back(Vocabulary::kBos);
  tf.decoder_input.insert(tf.decoder_input.end(), target_ids.begin(), target_ids.end());
  tf.gold = target_ids;
  tf.gold.push_back(Vocabulary::kEos);
  return tf;
}

/// Per-token log p(y_i | y_<i, x), EOS included (length m = |y| + 1).
template <typename T>
std::vector<double> token_log_probs(const Seq2Seq<T>& model, const std::vector<int>& src_ids,
                                    const std::vector<int>& tgt_ids) {
  ad::Tape<T> tape(false);
  const auto tf = teacher_forcing(tgt_ids);
  auto memory = model.encode(tape, src_ids);
  auto logits = model.decode(tape, memory, tf.decoder_input);
  std::vector<T> lp;
  ad::cross_entropy(logits, tf.gold, std::vector<T>(tf.gold.size(), T(0)), &lp);
  std::vector<double> out(lp.begin(), lp.end());
  for (double v : out)
    if (!std::isfinite(v)) {
      model.check_finite();
      throw NumericError("non-finite log-probability in forward pass");
    }
  return out;
}

template <typename T>
std::vector<double> token_log_probs(const Seq2Seq<T>& model, const Sentence& x, const Sentence& y) {
  return token_log_probs(model, model.encode_source(x), model.encode_target(y));
}

/// sum_i log p(y_i | y_<i, x).
template <typename T>
double sequence_log_prob(const Seq2Seq<T>& model, const Sentence& x, const Sentence& y) {
  double s = 0.0;
  for (double v : token_log_probs(model, x, y)) s += v;
  return s;
}

/// Per-token negative log-likelihood, -(1/m) sum_i log p(y_i | y_<i, x).
template <typename T>
double nll_loss(const Seq2Seq<T>& model, const Sentence& x, const Sentence& y) {
  const auto lp = token_log_probs(model, x, y);
  double s = 0.0;
  for (double v : lp) s += v;
  return -s / static_cast<double>(lp.size());
}

/// Adds coefficient * d/dtheta [-sum_i log p(y_i | y_<i, x)] into the
/// parameter gradient buffers. Returns sum_i log p(y_i | ...).
template <typename T>
double backprop_sequence(const Seq2Seq<T>& model, const std::vector<int>& src_ids,
                         const std::vector<int>& tgt_ids, double coefficient) {
  ad::Tape<T> tape(true);
  const auto tf = teacher_forcing(tgt_ids);
  auto memory = model.encode(tape, src_ids);
  auto logits = model.decode(tape, memory, tf.decoder_input);
  std::vector<T> lp;
  auto loss = ad::cross_entropy(logits, tf.gold,
                                std::vector<T>(tf.gold.size(), static_cast<T>(coefficient)), &lp);
  double total = 0.0;
  for (T v : lp) total += static_cast<double>(v);
  if (!std::isfinite(total)) {
    model.check_finite();
    throw NumericError("non-finite log-probability in forward pass");
  }
  if (coefficient != 0.0) tape.backward(loss);
  return total;
}

}  // namespace natalign
