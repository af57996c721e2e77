#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"
#include "csforge/io.hpp"

namespace csforge {

inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUnk = "<unk>";

// Interpolated Kneser-Ney n-gram model with one absolute discount. The
// highest order uses raw counts, lower orders continuation counts, and the
// base distribution is uniform over the prediction vocabulary, so every
// context's probabilities sum to exactly 1.
//
// Desk-scale evaluation plumbing: this model stands in for the neural LM
// when comparing pretraining corpora, it is not a contribution itself.
class NgramLm {
public:
  using Id = std::uint32_t;

  NgramLm() = default;

  static NgramLm train(const Corpus& corpus, std::size_t order,
                       double discount = 0.75, std::size_t min_count = 1) {
    if (order < 1 || order > 5)
      throw ConfigError("order must lie in [1,5]");
    if (!(discount > 0.0 && discount < 1.0))
      throw ConfigError("discount must lie in (0,1)");
    if (corpus.empty()) throw ConfigError("training corpus is empty");

    NgramLm lm;
    lm.order_ = order;
    lm.discount_ = discount;

    // Vocabulary: frequency-thresholded surfaces + <unk> + </s>. <s> gets
    // an id too but is context-only and never predicted.
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& s : corpus.sentences)
      for (const auto& t : s.tokens) ++freq[t.surface];
    std::vector<std::string> kept;
    for (const auto& [w, c] : freq)
      if (c >= min_count) kept.push_back(w);
    std::sort(kept.begin(), kept.end());
    lm.add_word(kUnk);
    lm.add_word(kEos);
    lm.bos_ = lm.add_word(kBos);
    for (const auto& w : kept) lm.add_word(w);

    for (const auto& s : corpus.sentences) {
      std::vector<Id> ids(order - 1, lm.bos_);
      for (const auto& t : s.tokens) ids.push_back(lm.lookup(t.surface));
      ids.push_back(lm.eos());
      for (std::size_t k = 1; k <= order; ++k) {
        if (ids.size() < k) continue;
        // Skip windows that lie entirely in the <s> padding.
        for (std::size_t i = 0; i + k <= ids.size(); ++i) {
          if (i + k <= order - 1) continue;
          ++lm.counts_[k - 1][pack(ids.data() + i, k)];
        }
      }
    }
    lm.build_tables();
    return lm;
  }

  // Uniform model: P(w) = 1 / |V| for every vocabulary word. </s> and
  // <unk> join the vocabulary if absent, so perplexity of in-vocabulary
  // text is exactly vocab_size().
  static NgramLm uniform(const std::vector<std::string>& vocab) {
    NgramLm lm;
    lm.order_ = 1;
    lm.discount_ = 0.5;
    lm.uniform_ = true;
    lm.add_word(kUnk);
    lm.add_word(kEos);
    lm.bos_ = lm.add_word(kBos);
    for (const auto& w : vocab)
      if (!lm.word_to_id_.count(w)) lm.add_word(w);
    return lm;
  }

  std::size_t order() const { return order_; }
  double discount() const { return discount_; }

  // Prediction vocabulary size (<s> excluded).
  std::size_t vocab_size() const { return words_.size() - 1; }

  const std::vector<std::string>& words() const { return words_; }

  Id lookup(const std::string& w) const {
    auto it = word_to_id_.find(w);
    return it == word_to_id_.end() ? 0 /*<unk>*/ : it->second;
  }

  Id eos() const { return 1; }
  Id bos() const { return bos_; }

  // P(word | context). Context is truncated to the last order-1 ids; a
  // shorter context starts the interpolation at the matching level.
  double prob(const std::vector<Id>& context, Id word) const {
    if (uniform_) return 1.0 / static_cast<double>(vocab_size());
    std::size_t ctx_len = std::min(context.size(), order_ - 1);
    const Id* ctx = context.data() + (context.size() - ctx_len);
    return prob_level(ctx, ctx_len, word);
  }

  double prob(const std::vector<std::string>& context,
              const std::string& word) const {
    std::vector<Id> ctx;
    ctx.reserve(context.size());
    for (const auto& w : context) ctx.push_back(lookup_ctx(w));
    return prob(ctx, lookup(word));
  }

  // exp of mean negative log-likelihood per token; </s> is scored at each
  // sentence end, <s> is context only.
  double perplexity(const Corpus& corpus) const {
    double nll = 0.0;
    std::size_t n_pred = 0;
    for (const auto& s : corpus.sentences) {
      std::vector<Id> ids(order_ > 0 ? order_ - 1 : 0, bos_);
      for (const auto& t : s.tokens) ids.push_back(lookup(t.surface));
      ids.push_back(eos());
      for (std::size_t i = order_ - 1; i < ids.size(); ++i) {
        std::vector<Id> ctx(ids.begin() + (i - (order_ - 1)),
                            ids.begin() + i);
        nll -= std::log(prob(ctx, ids[i]));
        ++n_pred;
      }
    }
    if (n_pred == 0) throw UndefinedError("perplexity: no tokens scored");
    return std::exp(nll / static_cast<double>(n_pred));
  }

  void save(const std::string& path) const {
    std::string out;
    out.append("CSLM1");
    append_u32(out, 2);  // format version
    append_u32(out, static_cast<std::uint32_t>(order_));
    append_f64(out, discount_);
    out.push_back(uniform_ ? 1 : 0);
    append_u32(out, static_cast<std::uint32_t>(words_.size()));
    for (const auto& w : words_) {
      append_u32(out, static_cast<std::uint32_t>(w.size()));
      out.append(w);
    }
    for (std::size_t k = 0; k < order_; ++k) {
      const auto& table = counts_[k];
      append_u32(out, static_cast<std::uint32_t>(table.size()));
      for (const auto& [gram, count] : table) {
        out.append(gram);
        append_u32(out, static_cast<std::uint32_t>(count));
      }
    }
    atomic_write(path, out);
  }

  static NgramLm load(const std::string& path) {
    std::string data = read_file(path);
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
      if (pos + n > data.size()) throw IoError("truncated LM file: " + path);
    };
    need(5);
    if (data.compare(0, 5, "CSLM1") != 0)
      throw IoError("bad magic in " + path);
    pos = 5;
    NgramLm lm;
    std::uint32_t version = read_u32(data, pos, need);
    if (version != 2) throw IoError("unsupported LM version in " + path);
    lm.order_ = read_u32(data, pos, need);
    lm.discount_ = read_f64(data, pos, need);
    need(1);
    lm.uniform_ = data[pos++] != 0;
    std::uint32_t n_words = read_u32(data, pos, need);
    for (std::uint32_t i = 0; i < n_words; ++i) {
      std::uint32_t len = read_u32(data, pos, need);
      need(len);
      lm.add_word(data.substr(pos, len));
      pos += len;
    }
    lm.bos_ = lm.word_to_id_.at(kBos);
    for (std::size_t k = 0; k < lm.order_; ++k) {
      std::uint32_t n_entries = read_u32(data, pos, need);
      for (std::uint32_t i = 0; i < n_entries; ++i) {
        need((k + 1) * 4);
        std::string gram = data.substr(pos, (k + 1) * 4);
        pos += (k + 1) * 4;
        lm.counts_[k][gram] = read_u32(data, pos, need);
      }
    }
    if (!lm.uniform_) lm.build_tables();
    return lm;
  }

private:
  // Grams are packed little-endian 32-bit ids.
  static std::string pack(const Id* ids, std::size_t n) {
    std::string key(n * 4, '\0');
    for (std::size_t i = 0; i < n; ++i) {
      key[4 * i] = static_cast<char>(ids[i] & 0xFF);
      key[4 * i + 1] = static_cast<char>((ids[i] >> 8) & 0xFF);
      key[4 * i + 2] = static_cast<char>((ids[i] >> 16) & 0xFF);
      key[4 * i + 3] = static_cast<char>((ids[i] >> 24) & 0xFF);
    }
    return key;
  }

  Id add_word(const std::string& w) {
    auto it = word_to_id_.find(w);
    if (it != word_to_id_.end()) return it->second;
    Id id = static_cast<Id>(words_.size());
    words_.push_back(w);
    word_to_id_[w] = id;
    return id;
  }

  // <s> maps to itself in contexts; unknown context words become <unk>.
  Id lookup_ctx(const std::string& w) const {
    auto it = word_to_id_.find(w);
    return it == word_to_id_.end() ? 0 : it->second;
  }

  struct ContextStats {
    double denom = 0.0;
    double n_types = 0.0;  // distinct continuations with positive count
  };

  void build_tables() {
    // Continuation counts for orders below the top: cc_k(g) counts the
    // distinct left extensions of g among (k+1)-grams.
    for (std::size_t k = 1; k < order_; ++k) {
      cont_[k - 1].clear();
      for (const auto& [gram, count] : counts_[k]) {
        (void)count;
        ++cont_[k - 1][gram.substr(4)];
      }
    }
    // Per-context denominators and continuation-type counts, per level.
    for (std::size_t k = 1; k <= order_; ++k) {
      const auto& table = level_table(k);
      auto& stats = ctx_stats_[k - 1];
      stats.clear();
      for (const auto& [gram, count] : table) {
        auto& cs = stats[gram.substr(0, gram.size() - 4)];
        cs.denom += static_cast<double>(count);
        cs.n_types += 1.0;
      }
    }
  }

  // Level k uses raw counts at the top, continuation counts below.
  const std::unordered_map<std::string, std::size_t>& level_table(
      std::size_t k) const {
    return k == order_ ? counts_[k - 1] : cont_[k - 1];
  }

  double prob_level(const Id* ctx, std::size_t ctx_len, Id word) const {
    const std::size_t k = ctx_len + 1;
    const double uniform_p = 1.0 / static_cast<double>(vocab_size());
    if (k == 1) {
      const auto& table = level_table(1);
      auto cs = ctx_stats_[0].find(std::string());
      if (cs == ctx_stats_[0].end() || cs->second.denom == 0.0)
        return uniform_p;
      const double denom = cs->second.denom;
      const double types = cs->second.n_types;
      double num = 0.0;
      auto it = table.find(pack(&word, 1));
      if (it != table.end())
        num = std::max(static_cast<double>(it->second) - discount_, 0.0);
      return num / denom + discount_ * types / denom * uniform_p;
    }
    const auto& stats = ctx_stats_[k - 1];
    auto cs = stats.find(pack(ctx, ctx_len));
    const double lower = prob_level(ctx + 1, ctx_len - 1, word);
    if (cs == stats.end() || cs->second.denom == 0.0) return lower;
    const double denom = cs->second.denom;
    const double types = cs->second.n_types;
    const auto& table = level_table(k);
    std::vector<Id> gram(ctx, ctx + ctx_len);
    gram.push_back(word);
    double num = 0.0;
    auto it = table.find(pack(gram.data(), gram.size()));
    if (it != table.end())
      num = std::max(static_cast<double>(it->second) - discount_, 0.0);
    return num / denom + discount_ * types / denom * lower;
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

  std::size_t order_ = 1;
  double discount_ = 0.75;
  bool uniform_ = false;
  Id bos_ = 2;
  std::vector<std::string> words_;
  std::unordered_map<std::string, Id> word_to_id_;
  // Raw n-gram counts, counts_[k-1] holding k-grams.
  std::array<std::unordered_map<std::string, std::size_t>, 5> counts_;
  // Continuation counts for levels 1..order-1.
  std::array<std::unordered_map<std::string, std::size_t>, 4> cont_;
  std::array<std::unordered_map<std::string, ContextStats>, 5> ctx_stats_;
};

}  // namespace csforge
