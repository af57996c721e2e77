#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"
#include "csforge/rng.hpp"
#include "csforge/util.hpp"

namespace csforge {

struct BleuScore {
  double score = 0.0;  // 0..100
  std::array<double, 4> precisions{0, 0, 0, 0};
  double brevity_penalty = 1.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

namespace detail {

// N-grams keyed as unit-separator-joined surfaces.
inline void count_ngrams(const std::vector<Token>& tokens, std::size_t n,
                         std::unordered_map<std::string, std::size_t>& out) {
  if (tokens.size() < n) return;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + k].surface;
    }
    ++out[key];
  }
}

struct BleuAccumulator {
  std::array<std::size_t, 4> matched{0, 0, 0, 0};
  std::array<std::size_t, 4> total{0, 0, 0, 0};
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;

  void add(const TaggedSentence& cand,
           const std::vector<const TaggedSentence*>& refs) {
    cand_len += cand.size();
    // Effective reference length: closest to the candidate, ties going to
    // the shorter reference.
    std::size_t best = refs.front()->size();
    for (const auto* r : refs) {
      auto diff = [&](std::size_t len) {
        return len > cand.size() ? len - cand.size() : cand.size() - len;
      };
      if (diff(r->size()) < diff(best) ||
          (diff(r->size()) == diff(best) && r->size() < best))
        best = r->size();
    }
    ref_len += best;

    for (std::size_t n = 1; n <= 4; ++n) {
      std::unordered_map<std::string, std::size_t> cand_counts;
      count_ngrams(cand.tokens, n, cand_counts);
      std::unordered_map<std::string, std::size_t> ref_max;
      for (const auto* r : refs) {
        std::unordered_map<std::string, std::size_t> rc;
        count_ngrams(r->tokens, n, rc);
        for (auto& [k, v] : rc) {
          auto& slot = ref_max[k];
          slot = std::max(slot, v);
        }
      }
      for (auto& [k, v] : cand_counts) {
        auto it = ref_max.find(k);
        if (it != ref_max.end()) matched[n - 1] += std::min(v, it->second);
        total[n - 1] += v;
      }
    }
  }

  void merge(const BleuAccumulator& o) {
    for (std::size_t n = 0; n < 4; ++n) {
      matched[n] += o.matched[n];
      total[n] += o.total[n];
    }
    cand_len += o.cand_len;
    ref_len += o.ref_len;
  }
};

inline BleuScore finalize(const BleuAccumulator& acc, std::size_t max_order,
                          double floor) {
  BleuScore bs;
  bs.candidate_length = acc.cand_len;
  bs.reference_length = acc.ref_len;
  bs.brevity_penalty =
      acc.cand_len >= acc.ref_len || acc.cand_len == 0
          ? 1.0
          : std::exp(1.0 - static_cast<double>(acc.ref_len) /
                               static_cast<double>(acc.cand_len));
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < max_order; ++n) {
    double p = acc.total[n] > 0 ? static_cast<double>(acc.matched[n]) /
                                      static_cast<double>(acc.total[n])
                                : 0.0;
    if (p <= 0.0) {
      if (floor > 0.0)
        p = floor;
      else
        zero = true;
    }
    bs.precisions[n] = p;
    if (!zero) log_sum += std::log(p);
  }
  bs.score = zero ? 0.0
                  : 100.0 * bs.brevity_penalty *
                        std::exp(log_sum / static_cast<double>(max_order));
  return bs;
}

}  // namespace detail

// Standard 4-gram corpus BLEU with clipped counts and the closest-length
// reference convention. Unsmoothed: any empty n-gram order scores 0.
inline BleuScore corpus_bleu(
    const Corpus& candidates,
    const std::vector<std::vector<const TaggedSentence*>>& references) {
  if (candidates.size() != references.size())
    throw SizeMismatchError("corpus_bleu: " + std::to_string(candidates.size()) +
                            " candidates vs " +
                            std::to_string(references.size()) +
                            " reference sets");
  if (candidates.empty()) throw SizeMismatchError("corpus_bleu: empty input");
  detail::BleuAccumulator acc;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (references[i].empty())
      throw SizeMismatchError("corpus_bleu: sentence " +
                              candidates.sentences[i].id +
                              " has no reference");
    acc.add(candidates.sentences[i], references[i]);
  }
  return detail::finalize(acc, 4, 0.0);
}

// Single-reference-per-candidate convenience: reference corpora aligned by
// index, one or more reference streams.
inline BleuScore corpus_bleu(const Corpus& candidates,
                             const std::vector<Corpus>& reference_streams) {
  std::vector<std::vector<const TaggedSentence*>> refs(candidates.size());
  for (const auto& stream : reference_streams) {
    if (stream.size() != candidates.size())
      throw SizeMismatchError("corpus_bleu: reference stream " + stream.name +
                              " has " + std::to_string(stream.size()) +
                              " sentences, candidates have " +
                              std::to_string(candidates.size()));
    for (std::size_t i = 0; i < stream.size(); ++i)
      refs[i].push_back(&stream.sentences[i]);
  }
  return corpus_bleu(candidates, refs);
}

// Sentence BLEU used inside self-BLEU: order capped at the candidate
// length and precisions floored at 1e-9 so short sentences do not
// degenerate. All-identical inputs still score exactly 100.
inline BleuScore sentence_bleu(const TaggedSentence& cand,
                               const std::vector<const TaggedSentence*>& refs,
                               double floor = 1e-9) {
  detail::BleuAccumulator acc;
  acc.add(cand, refs);
  const std::size_t max_order =
      std::max<std::size_t>(1, std::min<std::size_t>(4, cand.size()));
  return detail::finalize(acc, max_order, floor);
}

// Mean sentence BLEU of seeded-sampled sentences against the rest of the
// corpus. Lower = more diverse. Samples are scored in parallel slots and
// reduced in index order, so the result does not depend on thread count.
inline double self_bleu(const Corpus& c, std::size_t sample,
                        std::uint64_t seed) {
  if (c.size() < 2)
    throw UndefinedError("self_bleu needs at least 2 sentences");
  Rng rng(seed);
  auto picks = rng.sample_indices(c.size(), std::min(sample, c.size()));
  std::vector<double> scores(picks.size());
  parallel_for(picks.size(), [&](std::size_t k) {
    const std::size_t idx = picks[k];
    std::vector<const TaggedSentence*> refs;
    refs.reserve(c.size() - 1);
    for (std::size_t j = 0; j < c.size(); ++j)
      if (j != idx) refs.push_back(&c.sentences[j]);
    scores[k] = sentence_bleu(c.sentences[idx], refs).score;
  });
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(picks.size());
}

}  // namespace csforge
