#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"
#include "csforge/metrics.hpp"
#include "csforge/rng.hpp"
#include "csforge/util.hpp"

namespace csforge {

// Hindi surface -> ordered English candidate surfaces.
struct Lexicon {
  std::unordered_map<std::string, std::vector<std::string>> entries;

  const std::vector<std::string>* find(const std::string& surface) const {
    auto it = entries.find(surface);
    return it == entries.end() ? nullptr : &it->second;
  }
};

// TSV, one key per line: hindi<TAB>english1|english2|...
inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon: " + path);
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": expected hindi<TAB>candidates");
    std::string key = line.substr(0, tab);
    std::vector<std::string> cands;
    std::string rest = line.substr(tab + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto bar = rest.find('|', pos);
      std::string cand = rest.substr(
          pos, bar == std::string::npos ? std::string::npos : bar - pos);
      if (!cand.empty()) cands.push_back(std::move(cand));
      if (bar == std::string::npos) break;
      pos = bar + 1;
    }
    if (cands.empty())
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": no candidates for key " + key);
    lex.entries[key] = std::move(cands);
  }
  return lex;
}

struct LexConfig {
  double p_switch = 0.25;
  std::uint64_t seed = 0;
  std::size_t variants_per_sentence = 1;
};

// English token fraction of the reference corpus; the single scalar that
// stands in for its switching distribution.
inline double calibrate_switch_prob(const Corpus& reference) {
  auto mc = detail::mix_counts(reference);
  const auto total = mc.hi + mc.en;
  if (total == 0)
    throw UndefinedError("calibrate_switch_prob: no HI/EN tokens");
  return static_cast<double>(mc.en) / static_cast<double>(total);
}

// Each HI token with a lexicon entry is independently replaced with
// probability p_switch by a uniformly chosen candidate (retagged EN).
// Everything else passes through untouched, so token count is preserved.
// RNG stream is keyed by (seed, sentence id, variant index).
inline std::vector<TaggedSentence> generate_lex(const TaggedSentence& s,
                                                const Lexicon& lex,
                                                const LexConfig& cfg) {
  if (s.tokens.empty()) throw EmptySentenceError("generate_lex: no tokens");
  if (cfg.p_switch < 0.0 || cfg.p_switch > 1.0)
    throw ConfigError("p_switch must lie in [0,1]");
  std::vector<TaggedSentence> out;
  out.reserve(cfg.variants_per_sentence);
  for (std::size_t v = 0; v < cfg.variants_per_sentence; ++v) {
    Rng rng = keyed_rng(cfg.seed, s.id, v);
    TaggedSentence var = s;
    var.id = s.id + "#lex" + std::to_string(v);
    var.source = Source::LEX;
    for (auto& tok : var.tokens) {
      if (tok.lang != Lang::HI) continue;
      const auto* cands = lex.find(tok.surface);
      if (!cands) continue;
      // Draw both randoms unconditionally to keep streams aligned
      // regardless of p_switch.
      const bool flip = rng.bernoulli(cfg.p_switch);
      const std::size_t pick = rng.next_below(cands->size());
      if (!flip) continue;
      tok.surface = (*cands)[pick];
      tok.lang = Lang::EN;
    }
    out.push_back(std::move(var));
  }
  return out;
}

// Per-sentence RNG streams make the corpus driver safe to parallelize;
// results land in per-sentence slots so the output order is fixed.
inline Corpus generate_lex_corpus(const Corpus& c, const Lexicon& lex,
                                  const LexConfig& cfg) {
  std::vector<std::vector<TaggedSentence>> slots(c.size());
  parallel_for(c.size(), [&](std::size_t i) {
    slots[i] = generate_lex(c.sentences[i], lex, cfg);
  });
  Corpus out;
  out.name = c.name + ".lex";
  out.sentences.reserve(c.size() * cfg.variants_per_sentence);
  for (auto& variants : slots)
    for (auto& v : variants) out.sentences.push_back(std::move(v));
  return out;
}

}  // namespace csforge
