#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "csforge/error.hpp"
#include "csforge/rng.hpp"

namespace csforge {

// Language tag of a single token. NE is reserved for the named-entity
// mask token; OTHER covers tokens with no Devanagari and no Latin letters.
enum class Lang { HI, EN, NE, OTHER };

inline const char* to_string(Lang l) {
  switch (l) {
    case Lang::HI: return "HI";
    case Lang::EN: return "EN";
    case Lang::NE: return "NE";
    default: return "OTHER";
  }
}

inline Lang lang_from_string(std::string_view s) {
  if (s == "HI") return Lang::HI;
  if (s == "EN") return Lang::EN;
  if (s == "NE") return Lang::NE;
  if (s == "OTHER") return Lang::OTHER;
  throw IoError("unknown language tag: " + std::string(s));
}

// Surface form of the named-entity mask token.
inline constexpr const char* kNeMask = "<NE>";

struct Token {
  std::string surface;
  Lang lang = Lang::OTHER;

  bool operator==(const Token&) const = default;
};

// Provenance of a sentence: real data or one of the generators.
enum class Source { REAL, LEX, EMT, TCS, MONO };

inline const char* to_string(Source s) {
  switch (s) {
    case Source::REAL: return "REAL";
    case Source::LEX: return "LEX";
    case Source::EMT: return "EMT";
    case Source::TCS: return "TCS";
    default: return "MONO";
  }
}

inline Source source_from_string(std::string_view s) {
  if (s == "REAL") return Source::REAL;
  if (s == "LEX") return Source::LEX;
  if (s == "EMT") return Source::EMT;
  if (s == "TCS") return Source::TCS;
  if (s == "MONO") return Source::MONO;
  throw IoError("unknown source: " + std::string(s));
}

struct TaggedSentence {
  std::string id;
  std::vector<Token> tokens;
  Source source = Source::REAL;

  std::size_t size() const { return tokens.size(); }

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i].surface;
    }
    return out;
  }

  bool operator==(const TaggedSentence&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<TaggedSentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }

  // Throws on duplicate sentence ids.
  void check_ids() const {
    std::unordered_set<std::string_view> seen;
    for (const auto& s : sentences)
      if (!seen.insert(s.id).second)
        throw IoError("duplicate sentence id: " + s.id);
  }
};

struct ParallelCorpus {
  std::string name;
  std::vector<std::pair<TaggedSentence, TaggedSentence>> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// Splits on Unicode whitespace (ASCII space/tab/CR/LF plus U+00A0 and the
// U+2000 block). Punctuation stays attached to its token.
inline std::vector<std::string> tokenize(std::string_view line) {
  auto is_space_at = [&](std::size_t i, std::size_t& len) {
    unsigned char c = static_cast<unsigned char>(line[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
        c == '\f') {
      len = 1;
      return true;
    }
    // U+00A0 no-break space: C2 A0.
    if (c == 0xC2 && i + 1 < line.size() &&
        static_cast<unsigned char>(line[i + 1]) == 0xA0) {
      len = 2;
      return true;
    }
    // U+2000..U+200A and U+2028/U+2029/U+205F: E2 80 80..8A / A8 / A9, E2 81 9F.
    if (c == 0xE2 && i + 2 < line.size()) {
      unsigned char c1 = static_cast<unsigned char>(line[i + 1]);
      unsigned char c2 = static_cast<unsigned char>(line[i + 2]);
      if (c1 == 0x80 && ((c2 >= 0x80 && c2 <= 0x8A) || c2 == 0xA8 || c2 == 0xA9)) {
        len = 3;
        return true;
      }
      if (c1 == 0x81 && c2 == 0x9F) {
        len = 3;
        return true;
      }
    }
    // U+3000 ideographic space: E3 80 80.
    if (c == 0xE3 && i + 2 < line.size() &&
        static_cast<unsigned char>(line[i + 1]) == 0x80 &&
        static_cast<unsigned char>(line[i + 2]) == 0x80) {
      len = 3;
      return true;
    }
    return false;
  };

  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < line.size();) {
    std::size_t len = 0;
    if (is_space_at(i, len)) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
      i += len;
    } else {
      cur += line[i];
      ++i;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  if (out.empty()) throw EmptySentenceError();
  return out;
}

// Devanagari wins over Latin when a token mixes scripts; NE only for the
// exact mask surface.
inline Lang tag_language(std::string_view surface) {
  if (surface == kNeMask) return Lang::NE;
  bool has_latin = false;
  std::size_t i = 0;
  while (i < surface.size()) {
    unsigned char c = static_cast<unsigned char>(surface[i]);
    if (c < 0x80) {
      if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) has_latin = true;
      ++i;
      continue;
    }
    // Decode one UTF-8 code point; skip malformed bytes.
    std::uint32_t cp;
    std::size_t extra;
    if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      extra = 3;
    } else {
      ++i;
      continue;
    }
    if (i + extra >= surface.size()) break;
    bool ok = true;
    for (std::size_t k = 1; k <= extra; ++k) {
      unsigned char cc = static_cast<unsigned char>(surface[i + k]);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      ++i;
      continue;
    }
    if (cp >= 0x0900 && cp <= 0x097F) return Lang::HI;
    i += extra + 1;
  }
  return has_latin ? Lang::EN : Lang::OTHER;
}

inline TaggedSentence make_sentence(std::string id, std::string_view text,
                                    Source source = Source::REAL) {
  TaggedSentence s;
  s.id = std::move(id);
  s.source = source;
  for (auto& surf : tokenize(text)) {
    Token t;
    t.lang = tag_language(surf);
    t.surface = std::move(surf);
    s.tokens.push_back(std::move(t));
  }
  return s;
}

// Replaces every token whose surface is listed in ne_list by the NE mask
// token. Idempotent; length-preserving.
inline TaggedSentence mask_named_entities(
    const TaggedSentence& s, const std::set<std::string>& ne_list) {
  TaggedSentence out = s;
  for (auto& tok : out.tokens) {
    if (ne_list.count(tok.surface)) {
      tok.surface = kNeMask;
      tok.lang = Lang::NE;
    }
  }
  return out;
}

inline Corpus mask_named_entities(const Corpus& c,
                                  const std::set<std::string>& ne_list) {
  Corpus out;
  out.name = c.name;
  out.sentences.reserve(c.size());
  for (const auto& s : c.sentences)
    out.sentences.push_back(mask_named_entities(s, ne_list));
  return out;
}

// Deterministic seeded 3-way partition. Sizes are the rounded fractions,
// adjusted so they sum to the corpus size (train absorbs the remainder).
inline std::array<Corpus, 3> split_corpus(const Corpus& c,
                                          double train_frac, double valid_frac,
                                          double test_frac,
                                          std::uint64_t seed) {
  if (train_frac <= 0 || valid_frac <= 0 || test_frac <= 0 ||
      std::fabs(train_frac + valid_frac + test_frac - 1.0) > 1e-9)
    throw ConfigError("split fractions must be positive and sum to 1");
  const std::size_t n = c.size();
  if (n < 3) throw TooSmallError("corpus has fewer than 3 sentences");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  auto nearest = [](double x) {
    return static_cast<std::size_t>(std::llround(x));
  };
  std::size_t n_valid = std::min<std::size_t>(nearest(valid_frac * n), n);
  std::size_t n_test = std::min<std::size_t>(nearest(test_frac * n), n - n_valid);
  std::size_t n_train = n - n_valid - n_test;

  std::array<Corpus, 3> out;
  out[0].name = c.name + ".train";
  out[1].name = c.name + ".valid";
  out[2].name = c.name + ".test";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = c.sentences[order[i]];
    if (i < n_train)
      out[0].sentences.push_back(s);
    else if (i < n_train + n_valid)
      out[1].sentences.push_back(s);
    else
      out[2].sentences.push_back(s);
  }
  return out;
}

}  // namespace csforge
