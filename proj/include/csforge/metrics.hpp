#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"

namespace csforge {

// Table-2-style corpus statistics.
struct MetricReport {
  std::size_t n_sentences = 0;
  std::size_t n_tokens = 0;
  std::size_t n_ne = 0;
  double ne_fraction = 0.0;
  double m_index = 0.0;
  double i_index = 0.0;
  std::map<std::size_t, std::size_t> en_span_histogram;
  std::map<std::size_t, std::size_t> sentence_length_histogram;
};

namespace detail {

struct MixCounts {
  std::size_t hi = 0;
  std::size_t en = 0;
  std::size_t switches = 0;       // adjacent unequal HI/EN pairs
  std::size_t adjacent_pairs = 0; // adjacent HI/EN pairs, per sentence

  void add(const TaggedSentence& s) {
    Lang prev = Lang::OTHER;
    bool have_prev = false;
    for (const auto& t : s.tokens) {
      if (t.lang != Lang::HI && t.lang != Lang::EN) continue;
      if (t.lang == Lang::HI)
        ++hi;
      else
        ++en;
      if (have_prev) {
        ++adjacent_pairs;
        if (t.lang != prev) ++switches;
      }
      prev = t.lang;
      have_prev = true;
    }
  }
};

inline MixCounts mix_counts(const Corpus& c) {
  MixCounts mc;
  for (const auto& s : c.sentences) mc.add(s);
  return mc;
}

}  // namespace detail

// Gini-based monolingual index over the two languages. NE/OTHER tokens are
// excluded. 0 = purely monolingual, 1 = exact 50/50 mixing.
inline double m_index(const Corpus& c) {
  auto mc = detail::mix_counts(c);
  const double total = static_cast<double>(mc.hi + mc.en);
  if (total == 0) throw UndefinedError("m_index: no HI/EN tokens");
  const double p_hi = mc.hi / total;
  const double p_en = mc.en / total;
  const double sum_sq = p_hi * p_hi + p_en * p_en;
  // k = 2 languages, so the (k-1) factor is 1.
  return (1.0 - sum_sq) / sum_sq;
}

// Fraction of switch points: adjacent HI/EN tag pairs that differ, counted
// within sentences only (never across sentence boundaries).
inline double i_index(const Corpus& c) {
  auto mc = detail::mix_counts(c);
  if (mc.adjacent_pairs == 0)
    throw UndefinedError("i_index: no adjacent HI/EN pair in any sentence");
  return static_cast<double>(mc.switches) /
         static_cast<double>(mc.adjacent_pairs);
}

// Counts maximal runs of consecutive EN-tagged tokens, bucketed by length.
inline std::map<std::size_t, std::size_t> en_span_histogram(const Corpus& c) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& s : c.sentences) {
    std::size_t run = 0;
    for (const auto& t : s.tokens) {
      if (t.lang == Lang::EN) {
        ++run;
      } else if (run > 0) {
        ++hist[run];
        run = 0;
      }
    }
    if (run > 0) ++hist[run];
  }
  return hist;
}

inline std::map<std::size_t, std::size_t> sentence_length_histogram(
    const Corpus& c) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& s : c.sentences) ++hist[s.size()];
  return hist;
}

// Full report. NE counting is done on the corpus as given; callers that
// want NE masking applied should pass the corpus through
// mask_named_entities first (the CLI does this when --ne is supplied).
inline MetricReport report(const Corpus& c) {
  if (c.empty()) throw UndefinedError("report: empty corpus");
  MetricReport r;
  r.n_sentences = c.size();
  for (const auto& s : c.sentences) {
    r.n_tokens += s.size();
    for (const auto& t : s.tokens)
      if (t.lang == Lang::NE) ++r.n_ne;
  }
  r.ne_fraction = static_cast<double>(r.n_ne) / static_cast<double>(r.n_tokens);
  try {
    r.m_index = m_index(c);
  } catch (const UndefinedError&) {
    r.m_index = 0.0;
  }
  try {
    r.i_index = i_index(c);
  } catch (const UndefinedError&) {
    r.i_index = 0.0;
  }
  r.en_span_histogram = en_span_histogram(c);
  r.sentence_length_histogram = sentence_length_histogram(c);
  return r;
}

// Convenience overload: mask the NE surfaces first, then report. This is
// what the CLI uses when an NE list file is given.
inline MetricReport report(const Corpus& c,
                           const std::set<std::string>& ne_list) {
  return report(mask_named_entities(c, ne_list));
}

inline nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json j;
  j["n_sentences"] = r.n_sentences;
  j["n_tokens"] = r.n_tokens;
  j["n_ne"] = r.n_ne;
  j["ne_fraction"] = r.ne_fraction;
  j["m_index"] = r.m_index;
  j["i_index"] = r.i_index;
  nlohmann::json spans = nlohmann::json::object();
  for (auto [len, count] : r.en_span_histogram)
    spans[std::to_string(len)] = count;
  j["en_span_histogram"] = std::move(spans);
  nlohmann::json lens = nlohmann::json::object();
  for (auto [len, count] : r.sentence_length_histogram)
    lens[std::to_string(len)] = count;
  j["sentence_length_histogram"] = std::move(lens);
  return j;
}

// Two-column CSV, one block per histogram.
inline std::string histograms_to_csv(const MetricReport& r) {
  std::string out = "histogram,length,count\n";
  for (auto [len, count] : r.en_span_histogram)
    out += "en_span," + std::to_string(len) + "," + std::to_string(count) + "\n";
  for (auto [len, count] : r.sentence_length_histogram)
    out += "sentence_length," + std::to_string(len) + "," +
           std::to_string(count) + "\n";
  return out;
}

}  // namespace csforge
