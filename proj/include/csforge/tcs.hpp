#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"
#include "csforge/io.hpp"
#include "csforge/nn/adam.hpp"
#include "csforge/nn/autograd.hpp"
#include "csforge/rng.hpp"

namespace csforge {

using nn::Matrix;
using nn::NodePtr;
using nn::Param;
using nn::ParamBinder;
using nn::Tape;

// Which language path a sentence flows through: SRC is monolingual Hindi
// (private p0 layers), TGT is English / code-switched text (private p1).
enum class Side { SRC, TGT };

enum class Direction { SRC2TGT, TGT2SRC };

struct NoiseConfig {
  double p_drop = 0.1;
  std::size_t shuffle_window = 3;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(p_drop >= 0.0 && p_drop < 1.0))
      throw ConfigError("p_drop must lie in [0,1)");
  }
};

namespace detail {

// Drop-and-local-shuffle noise over an index sequence. Each element is
// dropped with p_drop (a seeded-uniform survivor is kept if all would
// drop); survivors are reordered by stable-sorting position + U[0,k], so
// nothing moves more than k slots from its post-drop position.
template <typename T>
std::vector<T> drop_shuffle(const std::vector<T>& items, double p_drop,
                            std::size_t window, Rng& rng) {
  std::vector<T> kept;
  kept.reserve(items.size());
  for (const auto& it : items)
    if (!rng.bernoulli(p_drop)) kept.push_back(it);
  if (kept.empty() && !items.empty())
    kept.push_back(items[rng.next_below(items.size())]);

  std::vector<std::pair<double, std::size_t>> keys(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    keys[i] = {static_cast<double>(i) +
                   rng.next_double() * static_cast<double>(window),
               i};
  std::stable_sort(keys.begin(), keys.end(),
                   [](const auto& a, const auto& b) {
                     return a.first < b.first;
                   });
  std::vector<T> out;
  out.reserve(kept.size());
  for (const auto& [key, idx] : keys) out.push_back(kept[idx]);
  return out;
}

}  // namespace detail

// DAE input corruption on a tagged sentence.
inline TaggedSentence noise(const TaggedSentence& s, const NoiseConfig& cfg) {
  cfg.validate();
  if (s.tokens.empty()) throw EmptySentenceError("noise: no tokens");
  Rng rng = keyed_rng(cfg.seed, s.id, 0);
  TaggedSentence out;
  out.id = s.id;
  out.source = s.source;
  out.tokens =
      detail::drop_shuffle(s.tokens, cfg.p_drop, cfg.shuffle_window, rng);
  return out;
}

struct TcsConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 2;
  std::size_t d_ff = 128;
  std::size_t max_len = 32;

  // Paper-scale preset: 256-dim embeddings, Adam lr 1e-4.
  static TcsConfig paper_preset() {
    TcsConfig c;
    c.d_model = 256;
    c.n_heads = 4;
    c.d_ff = 512;
    return c;
  }

  void validate() const {
    if (d_model == 0 || n_heads == 0 || d_ff == 0 || max_len == 0)
      throw ConfigError("model dimensions must be positive");
    if (d_model % n_heads != 0)
      throw ConfigError("d_model must be divisible by n_heads");
  }
};

// Shared token inventory across both sides. Ids 0..2 are reserved.
class Vocab {
public:
  static constexpr std::size_t kUnkId = 0;
  static constexpr std::size_t kBosId = 1;
  static constexpr std::size_t kEosId = 2;

  Vocab() {
    words_ = {"<unk>", "<s>", "</s>"};
    for (std::size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = i;
  }

  static Vocab from_words(std::vector<std::string> words) {
    Vocab v;
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (auto& w : words) v.add(w);
    return v;
  }

  void add(const std::string& w) {
    if (index_.count(w)) return;
    index_[w] = words_.size();
    words_.push_back(w);
  }

  std::size_t id(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? kUnkId : it->second;
  }

  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  std::vector<std::size_t> encode(const TaggedSentence& s,
                                  std::size_t max_len) const {
    std::vector<std::size_t> ids;
    ids.reserve(std::min(s.tokens.size(), max_len));
    for (const auto& t : s.tokens) {
      if (ids.size() >= max_len) break;
      ids.push_back(id(t.surface));
    }
    return ids;
  }

private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

struct AttentionParams {
  Param wq, wk, wv, wo;
  AttentionParams(const std::string& prefix, const std::string& part,
                  std::size_t d, Rng& rng)
      : wq(prefix + ".wq", part, xavier(d, d, rng)),
        wk(prefix + ".wk", part, xavier(d, d, rng)),
        wv(prefix + ".wv", part, xavier(d, d, rng)),
        wo(prefix + ".wo", part, xavier(d, d, rng)) {}

  static Matrix xavier(std::size_t rows, std::size_t cols, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = (2.0 * rng.next_double() - 1.0) * a;
    return m;
  }
};

struct LayerNormParams {
  Param gain, bias;
  LayerNormParams(const std::string& prefix, const std::string& part,
                  std::size_t d)
      : gain(prefix + ".g", part, Matrix::Ones(1, d)),
        bias(prefix + ".b", part, Matrix::Zero(1, d)) {}
};

struct FfnParams {
  Param w1, b1, w2, b2;
  FfnParams(const std::string& prefix, const std::string& part, std::size_t d,
            std::size_t d_ff, Rng& rng)
      : w1(prefix + ".w1", part, AttentionParams::xavier(d, d_ff, rng)),
        b1(prefix + ".b1", part, Matrix::Zero(1, d_ff)),
        w2(prefix + ".w2", part, AttentionParams::xavier(d_ff, d, rng)),
        b2(prefix + ".b2", part, Matrix::Zero(1, d)) {}
};

// Pre-norm transformer encoder layer.
struct EncLayer {
  LayerNormParams ln1;
  AttentionParams attn;
  LayerNormParams ln2;
  FfnParams ffn;

  EncLayer(const std::string& prefix, const std::string& part, std::size_t d,
           std::size_t d_ff, Rng& rng)
      : ln1(prefix + ".ln1", part, d),
        attn(prefix + ".attn", part, d, rng),
        ln2(prefix + ".ln2", part, d),
        ffn(prefix + ".ffn", part, d, d_ff, rng) {}
};

// Decoder layer: causal self-attention, cross-attention, feed-forward.
struct DecLayer {
  LayerNormParams ln1;
  AttentionParams self_attn;
  LayerNormParams ln_cross;
  AttentionParams cross_attn;
  LayerNormParams ln2;
  FfnParams ffn;

  DecLayer(const std::string& prefix, const std::string& part, std::size_t d,
           std::size_t d_ff, Rng& rng)
      : ln1(prefix + ".ln1", part, d),
        self_attn(prefix + ".self", part, d, rng),
        ln_cross(prefix + ".lnc", part, d),
        cross_attn(prefix + ".cross", part, d, rng),
        ln2(prefix + ".ln2", part, d),
        ffn(prefix + ".ffn", part, d, d_ff, rng) {}
};

}  // namespace detail

// Running counters used by tests to pin training-loop contracts.
struct TcsStats {
  std::size_t bt_decodes = 0;  // pseudo-pair decodes, bumped every bt step
};

// The shared/private translation model: a shared embedding table, one
// private bottom encoder layer per side under two shared ones, and two
// shared bottom decoder layers under one private top layer per side.
class TcsModel {
public:
  TcsModel(TcsConfig cfg, Vocab vocab, std::uint64_t seed)
      : cfg_(cfg), vocab_(std::move(vocab)) {
    cfg_.validate();
    Rng rng(mix_u64(seed, 0x7c5));
    const auto d = cfg_.d_model;
    const auto ff = cfg_.d_ff;

    Matrix emb(vocab_.size(), d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (Eigen::Index r = 0; r < emb.rows(); ++r)
      for (Eigen::Index c = 0; c < emb.cols(); ++c)
        emb(r, c) = rng.next_gaussian() * scale;
    embed_ = std::make_unique<Param>("embed", "embed", std::move(emb));

    enc_p0_ = std::make_unique<detail::EncLayer>("enc_p0.l0", "enc_p0", d, ff, rng);
    enc_p1_ = std::make_unique<detail::EncLayer>("enc_p1.l0", "enc_p1", d, ff, rng);
    enc_sh_.push_back(std::make_unique<detail::EncLayer>("enc_sh.l0", "enc_sh", d, ff, rng));
    enc_sh_.push_back(std::make_unique<detail::EncLayer>("enc_sh.l1", "enc_sh", d, ff, rng));
    enc_exit_ = std::make_unique<detail::LayerNormParams>("enc_sh.exit", "enc_sh", d);

    dec_sh_.push_back(std::make_unique<detail::DecLayer>("dec_sh.l0", "dec_sh", d, ff, rng));
    dec_sh_.push_back(std::make_unique<detail::DecLayer>("dec_sh.l1", "dec_sh", d, ff, rng));
    dec_p0_ = std::make_unique<detail::DecLayer>("dec_p0.l2", "dec_p0", d, ff, rng);
    dec_p1_ = std::make_unique<detail::DecLayer>("dec_p1.l2", "dec_p1", d, ff, rng);
    dec_p0_exit_ = std::make_unique<detail::LayerNormParams>("dec_p0.exit", "dec_p0", d);
    dec_p1_exit_ = std::make_unique<detail::LayerNormParams>("dec_p1.exit", "dec_p1", d);

    build_positional();
  }

  const TcsConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  TcsStats& stats() { return stats_; }

  template <typename Fn>
  void for_each_param(Fn&& fn) {
    fn(*embed_);
    auto visit_ln = [&](detail::LayerNormParams& ln) {
      fn(ln.gain);
      fn(ln.bias);
    };
    auto visit_attn = [&](detail::AttentionParams& a) {
      fn(a.wq);
      fn(a.wk);
      fn(a.wv);
      fn(a.wo);
    };
    auto visit_ffn = [&](detail::FfnParams& f) {
      fn(f.w1);
      fn(f.b1);
      fn(f.w2);
      fn(f.b2);
    };
    auto visit_enc = [&](detail::EncLayer& l) {
      visit_ln(l.ln1);
      visit_attn(l.attn);
      visit_ln(l.ln2);
      visit_ffn(l.ffn);
    };
    auto visit_dec = [&](detail::DecLayer& l) {
      visit_ln(l.ln1);
      visit_attn(l.self_attn);
      visit_ln(l.ln_cross);
      visit_attn(l.cross_attn);
      visit_ln(l.ln2);
      visit_ffn(l.ffn);
    };
    visit_enc(*enc_p0_);
    visit_enc(*enc_p1_);
    for (auto& l : enc_sh_) visit_enc(*l);
    visit_ln(*enc_exit_);
    for (auto& l : dec_sh_) visit_dec(*l);
    visit_dec(*dec_p0_);
    visit_dec(*dec_p1_);
    visit_ln(*dec_p0_exit_);
    visit_ln(*dec_p1_exit_);
  }

  // Parameters grouped by partition label.
  std::map<std::string, std::vector<Param*>> partitions() {
    std::map<std::string, std::vector<Param*>> out;
    for_each_param([&](Param& p) { out[p.partition].push_back(&p); });
    return out;
  }

  // ---- Graph builders ----

  NodePtr encode(Tape& tape, ParamBinder& bind,
                 const std::vector<std::size_t>& ids, Side side) {
    if (ids.empty()) throw EmptySentenceError("encode: no ids");
    NodePtr x = embed_input(tape, bind, ids);
    detail::EncLayer& bottom = side == Side::SRC ? *enc_p0_ : *enc_p1_;
    x = enc_layer(tape, bind, bottom, x);
    for (auto& l : enc_sh_) x = enc_layer(tape, bind, *l, x);
    return nn::layer_norm(tape, x, bind(enc_exit_->gain), bind(enc_exit_->bias));
  }

  NodePtr decode_logits(Tape& tape, ParamBinder& bind, const NodePtr& memory,
                        const std::vector<std::size_t>& tgt_in, Side side) {
    NodePtr y = embed_input(tape, bind, tgt_in);
    const Matrix mask = causal_mask(tgt_in.size());
    for (auto& l : dec_sh_) y = dec_layer(tape, bind, *l, y, memory, mask);
    detail::DecLayer& top = side == Side::SRC ? *dec_p0_ : *dec_p1_;
    y = dec_layer(tape, bind, top, y, memory, mask);
    detail::LayerNormParams& exit_ln =
        side == Side::SRC ? *dec_p0_exit_ : *dec_p1_exit_;
    y = nn::layer_norm(tape, y, bind(exit_ln.gain), bind(exit_ln.bias));
    // Output projection is tied to the embedding table.
    return nn::matmul_nt(tape, y, bind(*embed_));
  }

  struct SeqLoss {
    NodePtr nll_sum;
    std::size_t n_tokens = 0;
  };

  // Teacher-forced NLL of tgt given src through the chosen private paths.
  SeqLoss seq2seq_nll(Tape& tape, ParamBinder& bind,
                      const std::vector<std::size_t>& src_ids,
                      const std::vector<std::size_t>& tgt_ids, Side enc_side,
                      Side dec_side) {
    NodePtr memory = encode(tape, bind, src_ids, enc_side);
    std::vector<std::size_t> tgt_in{Vocab::kBosId};
    tgt_in.insert(tgt_in.end(), tgt_ids.begin(), tgt_ids.end());
    std::vector<std::size_t> tgt_out = tgt_ids;
    tgt_out.push_back(Vocab::kEosId);
    NodePtr logits = decode_logits(tape, bind, memory, tgt_in, dec_side);
    return {nn::cross_entropy_sum(tape, logits, tgt_out), tgt_out.size()};
  }

  // Greedy decoding without gradients. Returns generated ids (EOS not
  // included).
  std::vector<std::size_t> greedy_decode(const std::vector<std::size_t>& src,
                                         Side enc_side, Side dec_side,
                                         std::size_t max_len) {
    Tape tape;
    ParamBinder bind(tape, /*frozen=*/true);
    NodePtr memory = encode(tape, bind, src, enc_side);
    std::vector<std::size_t> out;
    std::vector<std::size_t> tgt_in{Vocab::kBosId};
    max_len = std::min(max_len, cfg_.max_len);
    while (out.size() < max_len) {
      NodePtr logits = decode_logits(tape, bind, memory, tgt_in, dec_side);
      Eigen::Index best = 0;
      logits->value.row(logits->value.rows() - 1).maxCoeff(&best);
      const auto id = static_cast<std::size_t>(best);
      if (id == Vocab::kEosId) break;
      out.push_back(id);
      tgt_in.push_back(id);
    }
    return out;
  }

  TaggedSentence translate(const TaggedSentence& s, Direction dir,
                           std::size_t max_len) {
    const Side enc_side = dir == Direction::SRC2TGT ? Side::SRC : Side::TGT;
    const Side dec_side = dir == Direction::SRC2TGT ? Side::TGT : Side::SRC;
    auto src = vocab_.encode(s, cfg_.max_len);
    auto ids = greedy_decode(src, enc_side, dec_side, max_len);
    TaggedSentence out;
    out.id = s.id;
    out.source = Source::TCS;
    for (auto id : ids) {
      const auto& w = vocab_.word(id);
      out.tokens.push_back({w, tag_language(w)});
    }
    if (out.tokens.empty())
      out.tokens.push_back({vocab_.word(Vocab::kUnkId), Lang::OTHER});
    return out;
  }

  // ---- Checkpoints ----

  void save(const std::string& path) {
    std::string out;
    out.append("CSTM1");
    append_u32(out, 1);
    append_u32(out, static_cast<std::uint32_t>(cfg_.d_model));
    append_u32(out, static_cast<std::uint32_t>(cfg_.n_heads));
    append_u32(out, static_cast<std::uint32_t>(cfg_.d_ff));
    append_u32(out, static_cast<std::uint32_t>(cfg_.max_len));
    append_u32(out, static_cast<std::uint32_t>(vocab_.size()));
    for (const auto& w : vocab_.words()) append_str(out, w);
    std::vector<Param*> params;
    for_each_param([&](Param& p) { params.push_back(&p); });
    append_u32(out, static_cast<std::uint32_t>(params.size()));
    for (Param* p : params) {
      append_str(out, p->name);
      append_str(out, p->partition);
      append_u32(out, static_cast<std::uint32_t>(p->value.rows()));
      append_u32(out, static_cast<std::uint32_t>(p->value.cols()));
      for (Eigen::Index r = 0; r < p->value.rows(); ++r)
        for (Eigen::Index c = 0; c < p->value.cols(); ++c)
          append_f64(out, p->value(r, c));
    }
    atomic_write(path, out);
  }

  static TcsModel load(const std::string& path) {
    std::string data = read_file(path);
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
      if (pos + n > data.size())
        throw IoError("truncated checkpoint: " + path);
    };
    need(5);
    if (data.compare(0, 5, "CSTM1") != 0)
      throw IoError("bad magic in " + path);
    pos = 5;
    if (read_u32(data, pos, need) != 1)
      throw IoError("unsupported checkpoint version in " + path);
    TcsConfig cfg;
    cfg.d_model = read_u32(data, pos, need);
    cfg.n_heads = read_u32(data, pos, need);
    cfg.d_ff = read_u32(data, pos, need);
    cfg.max_len = read_u32(data, pos, need);
    const std::uint32_t n_words = read_u32(data, pos, need);
    Vocab vocab;
    for (std::uint32_t i = 0; i < n_words; ++i) vocab.add(read_str(data, pos, need));
    TcsModel model(cfg, vocab, 0);
    std::unordered_map<std::string, Param*> by_name;
    model.for_each_param([&](Param& p) { by_name[p.name] = &p; });
    const std::uint32_t n_params = read_u32(data, pos, need);
    if (n_params != by_name.size())
      throw IoError("checkpoint parameter count mismatch in " + path);
    for (std::uint32_t i = 0; i < n_params; ++i) {
      const std::string name = read_str(data, pos, need);
      const std::string part = read_str(data, pos, need);
      const std::uint32_t rows = read_u32(data, pos, need);
      const std::uint32_t cols = read_u32(data, pos, need);
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw IoError("unknown parameter " + name + " in " + path);
      Param& p = *it->second;
      if (p.partition != part ||
          p.value.rows() != static_cast<Eigen::Index>(rows) ||
          p.value.cols() != static_cast<Eigen::Index>(cols))
        throw IoError("parameter shape/partition mismatch for " + name);
      for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c)
          p.value(r, c) = read_f64(data, pos, need);
    }
    return model;
  }

  // Deep copy of parameter values (used for best-checkpoint tracking).
  std::vector<Matrix> snapshot() {
    std::vector<Matrix> vals;
    for_each_param([&](Param& p) { vals.push_back(p.value); });
    return vals;
  }

  void restore(const std::vector<Matrix>& vals) {
    std::size_t i = 0;
    for_each_param([&](Param& p) { p.value = vals.at(i++); });
  }

private:
  NodePtr embed_input(Tape& tape, ParamBinder& bind,
                      const std::vector<std::size_t>& ids) {
    NodePtr table = bind(*embed_);
    NodePtr x = nn::embedding_rows(tape, table, ids);
    x = nn::scale(tape, x, std::sqrt(static_cast<double>(cfg_.d_model)));
    return nn::add_const(tape, x, positional_.topRows(ids.size()));
  }

  NodePtr attention(Tape& tape, ParamBinder& bind, detail::AttentionParams& ap,
                    const NodePtr& q_in, const NodePtr& kv,
                    const Matrix* mask) {
    const auto d = cfg_.d_model;
    const auto h = cfg_.n_heads;
    const auto dh = d / h;
    NodePtr q = nn::matmul(tape, q_in, bind(ap.wq));
    NodePtr k = nn::matmul(tape, kv, bind(ap.wk));
    NodePtr v = nn::matmul(tape, kv, bind(ap.wv));
    std::vector<NodePtr> heads;
    heads.reserve(h);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    for (std::size_t i = 0; i < h; ++i) {
      NodePtr qh = nn::slice_cols(tape, q, i * dh, dh);
      NodePtr kh = nn::slice_cols(tape, k, i * dh, dh);
      NodePtr vh = nn::slice_cols(tape, v, i * dh, dh);
      NodePtr scores = nn::scale(tape, nn::matmul_nt(tape, qh, kh), inv_sqrt);
      if (mask) scores = nn::add_const(tape, scores, *mask);
      NodePtr attn = nn::softmax_rows(tape, scores);
      heads.push_back(nn::matmul(tape, attn, vh));
    }
    NodePtr cat = nn::concat_cols(tape, heads);
    return nn::matmul(tape, cat, bind(ap.wo));
  }

  NodePtr ffn(Tape& tape, ParamBinder& bind, detail::FfnParams& fp,
              const NodePtr& x) {
    NodePtr h = nn::add_rowvec(tape, nn::matmul(tape, x, bind(fp.w1)), bind(fp.b1));
    h = nn::relu(tape, h);
    return nn::add_rowvec(tape, nn::matmul(tape, h, bind(fp.w2)), bind(fp.b2));
  }

  NodePtr enc_layer(Tape& tape, ParamBinder& bind, detail::EncLayer& l,
                    NodePtr x) {
    NodePtr h = nn::layer_norm(tape, x, bind(l.ln1.gain), bind(l.ln1.bias));
    x = nn::add(tape, x, attention(tape, bind, l.attn, h, h, nullptr));
    NodePtr h2 = nn::layer_norm(tape, x, bind(l.ln2.gain), bind(l.ln2.bias));
    return nn::add(tape, x, ffn(tape, bind, l.ffn, h2));
  }

  NodePtr dec_layer(Tape& tape, ParamBinder& bind, detail::DecLayer& l,
                    NodePtr y, const NodePtr& memory, const Matrix& mask) {
    NodePtr h = nn::layer_norm(tape, y, bind(l.ln1.gain), bind(l.ln1.bias));
    y = nn::add(tape, y, attention(tape, bind, l.self_attn, h, h, &mask));
    NodePtr hc = nn::layer_norm(tape, y, bind(l.ln_cross.gain), bind(l.ln_cross.bias));
    y = nn::add(tape, y, attention(tape, bind, l.cross_attn, hc, memory, nullptr));
    NodePtr h2 = nn::layer_norm(tape, y, bind(l.ln2.gain), bind(l.ln2.bias));
    return nn::add(tape, y, ffn(tape, bind, l.ffn, h2));
  }

  Matrix causal_mask(std::size_t n) const {
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m(i, j) = -1e30;
    return m;
  }

  void build_positional() {
    const auto n = cfg_.max_len + 2;
    const auto d = cfg_.d_model;
    positional_ = Matrix(n, d);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t i = 0; i < d; ++i) {
        const double angle =
            static_cast<double>(p) /
            std::pow(10000.0, static_cast<double>(2 * (i / 2)) /
                                  static_cast<double>(d));
        positional_(p, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
      }
  }

  static void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  static void append_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i)
      out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  static void append_str(std::string& out, const std::string& s) {
    append_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
  }
  template <typename Need>
  static std::uint32_t read_u32(const std::string& d, std::size_t& pos,
                                Need need) {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(d[pos + i]))
           << (8 * i);
    pos += 4;
    return v;
  }
  template <typename Need>
  static double read_f64(const std::string& d, std::size_t& pos, Need need) {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(d[pos + i]))
              << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  template <typename Need>
  static std::string read_str(const std::string& d, std::size_t& pos,
                              Need need) {
    const std::uint32_t len = read_u32(d, pos, need);
    need(len);
    std::string s = d.substr(pos, len);
    pos += len;
    return s;
  }

  TcsConfig cfg_;
  Vocab vocab_;
  TcsStats stats_;
  Matrix positional_;

  std::unique_ptr<Param> embed_;
  std::unique_ptr<detail::EncLayer> enc_p0_;
  std::unique_ptr<detail::EncLayer> enc_p1_;
  std::vector<std::unique_ptr<detail::EncLayer>> enc_sh_;
  std::unique_ptr<detail::LayerNormParams> enc_exit_;
  std::vector<std::unique_ptr<detail::DecLayer>> dec_sh_;
  std::unique_ptr<detail::DecLayer> dec_p0_;
  std::unique_ptr<detail::DecLayer> dec_p1_;
  std::unique_ptr<detail::LayerNormParams> dec_p0_exit_;
  std::unique_ptr<detail::LayerNormParams> dec_p1_exit_;
};

}  // namespace csforge
