#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "csforge/corpus.hpp"
#include "csforge/error.hpp"
#include "csforge/rng.hpp"

namespace csforge {

// Node of a bracketed constituency tree. Spans are [lo, hi) token index
// intervals over the English sentence; leaves carry the terminal token.
struct ParseNode {
  std::string label;
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::string terminal;  // leaf token, empty for interior nodes
  std::vector<ParseNode> children;

  bool is_leaf() const { return children.empty(); }
  std::size_t span_len() const { return hi - lo; }
};

struct Alignment {
  // (en_index, hi_index) links.
  std::vector<std::pair<std::size_t, std::size_t>> links;
};

using SpanKey = std::pair<std::size_t, std::size_t>;

struct ParseBundle {
  TaggedSentence en;
  ParseNode tree;
  std::optional<TaggedSentence> hi;
  std::optional<Alignment> align;
  std::map<SpanKey, std::string> clause_translations;
};

struct EmtConfig {
  std::vector<std::string> clause_tags = {"S", "SBAR", "SINV", "SQ", "SBARQ"};
  std::vector<std::string> phrase_fallback = {"NP", "VP", "ADJP", "ADVP"};
  std::size_t max_switches = 1;
  std::uint64_t seed = 0;
};

enum class EmtStrategy { TRANSLATION, ALIGNMENT };

namespace detail {

// Penn labels carry functional annotations after "-" or "=" (NP-SBJ, S=1).
// Strip them, but leave labels that begin with "-" (-LRB-, -NONE-) alone.
inline std::string strip_annotation(const std::string& label) {
  if (label.empty() || label[0] == '-') return label;
  auto cut = label.find_first_of("-=");
  return cut == std::string::npos ? label : label.substr(0, cut);
}

struct BracketScanner {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r' ||
            text[pos] == '\n'))
      ++pos;
  }

  std::string read_atom() {
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
           text[pos] != ' ' && text[pos] != '\t' && text[pos] != '\r' &&
           text[pos] != '\n')
      ++pos;
    return std::string(text.substr(start, pos - start));
  }

  ParseNode parse_node(std::size_t& next_leaf) {
    skip_ws();
    if (pos >= text.size() || text[pos] != '(')
      throw ParseError("expected '('", pos);
    ++pos;
    skip_ws();
    ParseNode node;
    if (pos < text.size() && text[pos] != '(' && text[pos] != ')')
      node.label = strip_annotation(read_atom());
    else
      node.label = "TOP";
    skip_ws();
    node.lo = next_leaf;
    bool saw_child = false;
    bool saw_terminal = false;
    while (true) {
      skip_ws();
      if (pos >= text.size()) throw ParseError("unbalanced parse", pos);
      if (text[pos] == ')') {
        ++pos;
        break;
      }
      if (text[pos] == '(') {
        if (saw_terminal)
          throw ParseError("mixed terminal and child nodes", pos);
        node.children.push_back(parse_node(next_leaf));
        saw_child = true;
      } else {
        if (saw_child || saw_terminal)
          throw ParseError("unexpected second terminal", pos);
        node.terminal = read_atom();
        saw_terminal = true;
      }
    }
    if (saw_terminal) {
      node.lo = next_leaf;
      node.hi = ++next_leaf;
    } else if (saw_child) {
      node.hi = next_leaf;
    } else {
      throw ParseError("node '" + node.label + "' has no leaves", pos);
    }
    return node;
  }
};

}  // namespace detail

// Reads one Penn-style bracketed parse. Leaves enumerate token indices
// left to right; a label-less outer wrapper "( (S ...) )" is unwrapped.
inline ParseNode parse_bracketed(std::string_view text) {
  detail::BracketScanner sc{text};
  std::size_t next_leaf = 0;
  ParseNode root = sc.parse_node(next_leaf);
  sc.skip_ws();
  if (sc.pos != text.size())
    throw ParseError("trailing characters after parse", sc.pos);
  if (root.label == "TOP" && root.children.size() == 1)
    root = std::move(root.children.front());
  return root;
}

inline std::size_t leaf_count(const ParseNode& n) { return n.hi - n.lo; }

namespace detail {

inline void collect_by_tags(const ParseNode& node, const ParseNode& root,
                            const std::set<std::string>& tags,
                            std::vector<const ParseNode*>& out) {
  if (&node != &root && tags.count(node.label) &&
      !(node.lo == root.lo && node.hi == root.hi))
    out.push_back(&node);
  for (const auto& ch : node.children) collect_by_tags(ch, root, tags, out);
}

}  // namespace detail

// Non-root clause-tag nodes in document order; when the sentence has none,
// falls back to the phrase-level tags. Whole-sentence spans never qualify.
inline std::vector<const ParseNode*> select_switch_candidates(
    const ParseNode& tree, const EmtConfig& cfg) {
  std::set<std::string> clause(cfg.clause_tags.begin(), cfg.clause_tags.end());
  std::vector<const ParseNode*> out;
  detail::collect_by_tags(tree, tree, clause, out);
  if (!out.empty()) return out;
  std::set<std::string> phrase(cfg.phrase_fallback.begin(),
                               cfg.phrase_fallback.end());
  detail::collect_by_tags(tree, tree, phrase, out);
  return out;
}

// Minimal contiguous Hindi span covering all links out of [lo, hi), or
// nullopt when the span has no link at all.
inline std::optional<SpanKey> project_span(std::size_t lo, std::size_t hi,
                                           const Alignment& align,
                                           std::size_t hi_len) {
  std::size_t min_j = hi_len;
  std::size_t max_j = 0;
  bool any = false;
  for (auto [i, j] : align.links) {
    if (i < lo || i >= hi) continue;
    if (j >= hi_len) continue;
    any = true;
    min_j = std::min(min_j, j);
    max_j = std::max(max_j, j);
  }
  if (!any) return std::nullopt;
  return SpanKey{min_j, max_j + 1};
}

namespace detail {

struct Splice {
  std::size_t lo, hi;               // English span to remove
  std::vector<std::string> tokens;  // Hindi tokens to insert
};

inline std::optional<Splice> make_splice(const ParseNode& cand,
                                         const ParseBundle& bundle,
                                         EmtStrategy strategy) {
  if (strategy == EmtStrategy::TRANSLATION) {
    auto it = bundle.clause_translations.find({cand.lo, cand.hi});
    if (it == bundle.clause_translations.end()) return std::nullopt;
    Splice sp{cand.lo, cand.hi, {}};
    try {
      sp.tokens = tokenize(it->second);
    } catch (const EmptySentenceError&) {
      return std::nullopt;
    }
    return sp;
  }
  auto proj = project_span(cand.lo, cand.hi, *bundle.align,
                           bundle.hi->tokens.size());
  if (!proj) return std::nullopt;
  Splice sp{cand.lo, cand.hi, {}};
  for (std::size_t j = proj->first; j < proj->second; ++j)
    sp.tokens.push_back(bundle.hi->tokens[j].surface);
  return sp;
}

}  // namespace detail

// Builds one EMT variant per variant index: seeded sampling picks up to
// max_switches mutually non-overlapping candidates, each English span is
// replaced by its Hindi rendering (translation lookup or alignment
// projection), and variants that end up monolingual are discarded.
inline std::vector<TaggedSentence> generate_emt(const ParseBundle& bundle,
                                                const EmtConfig& cfg,
                                                EmtStrategy strategy,
                                                std::size_t n_variants = 1) {
  if (bundle.tree.lo != 0 || bundle.tree.hi != bundle.en.tokens.size())
    throw ConfigError("parse tree covers [" + std::to_string(bundle.tree.lo) +
                      "," + std::to_string(bundle.tree.hi) + ") but sentence " +
                      bundle.en.id + " has " +
                      std::to_string(bundle.en.tokens.size()) + " tokens");
  if (strategy == EmtStrategy::ALIGNMENT && (!bundle.hi || !bundle.align))
    throw ConfigError("alignment strategy needs a Hindi sentence and links");
  if (strategy == EmtStrategy::TRANSLATION && bundle.clause_translations.empty())
    throw ConfigError("translation strategy needs clause translations");
  if (cfg.max_switches == 0) throw ConfigError("max_switches must be positive");
  if (cfg.clause_tags.empty() || cfg.phrase_fallback.empty())
    throw ConfigError("clause and phrase tag lists must be non-empty");
  for (const auto& tag : cfg.clause_tags)
    if (std::find(cfg.phrase_fallback.begin(), cfg.phrase_fallback.end(),
                  tag) != cfg.phrase_fallback.end())
      throw ConfigError("tag '" + tag + "' appears in both tag lists");

  auto candidates = select_switch_candidates(bundle.tree, cfg);
  if (candidates.empty())
    throw NoSwitchPointError("sentence " + bundle.en.id +
                             ": no clause or phrase switch candidate");

  std::vector<TaggedSentence> out;
  for (std::size_t v = 0; v < n_variants; ++v) {
    Rng rng = keyed_rng(cfg.seed, bundle.en.id, v);
    std::vector<const ParseNode*> order = candidates;
    rng.shuffle(order);

    std::vector<detail::Splice> chosen;
    for (const ParseNode* cand : order) {
      if (chosen.size() >= cfg.max_switches) break;
      bool overlaps = false;
      for (const auto& sp : chosen)
        if (cand->lo < sp.hi && sp.lo < cand->hi) overlaps = true;
      if (overlaps) continue;
      auto sp = detail::make_splice(*cand, bundle, strategy);
      if (sp) chosen.push_back(std::move(*sp));
    }
    if (chosen.empty()) continue;
    std::sort(chosen.begin(), chosen.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo; });

    TaggedSentence var;
    var.id = bundle.en.id + "#emt" + std::to_string(v);
    var.source = Source::EMT;
    std::size_t cursor = 0;
    for (const auto& sp : chosen) {
      for (std::size_t i = cursor; i < sp.lo; ++i)
        var.tokens.push_back(bundle.en.tokens[i]);
      for (const auto& surf : sp.tokens)
        var.tokens.push_back({surf, Lang::HI});
      cursor = sp.hi;
    }
    for (std::size_t i = cursor; i < bundle.en.tokens.size(); ++i)
      var.tokens.push_back(bundle.en.tokens[i]);

    bool has_hi = false, has_en = false;
    for (const auto& t : var.tokens) {
      if (t.lang == Lang::HI) has_hi = true;
      if (t.lang == Lang::EN) has_en = true;
    }
    if (has_hi && has_en) out.push_back(std::move(var));
  }
  return out;
}

// One bracketed parse per line, aligned with the corpus file.
inline std::vector<ParseNode> load_parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open parse file: " + path);
  std::vector<ParseNode> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      out.push_back(parse_bracketed(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(),
                       0);
    }
  }
  return out;
}

// Pharaoh format: space-separated "i-j" pairs per line, 0-based.
inline std::vector<Alignment> load_pharaoh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alignment file: " + path);
  std::vector<Alignment> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    Alignment a;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\r'))
        ++pos;
      if (pos >= line.size()) break;
      std::size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      std::string pair = line.substr(pos, end - pos);
      auto dash = pair.find('-');
      if (dash == std::string::npos || dash == 0 || dash + 1 >= pair.size())
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": malformed link '" + pair + "'");
      try {
        a.links.emplace_back(std::stoul(pair.substr(0, dash)),
                             std::stoul(pair.substr(dash + 1)));
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": malformed link '" + pair + "'");
      }
      pos = end;
    }
    out.push_back(std::move(a));
  }
  return out;
}

// Clause translations for strategy 1, JSONL aligned by line:
// {"spans": [{"lo": 2, "hi": 5, "text": "..."}, ...]}
inline std::vector<std::map<SpanKey, std::string>> load_clause_translations(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open clause translations: " + path);
  std::vector<std::map<SpanKey, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::map<SpanKey, std::string> m;
    if (!line.empty()) {
      try {
        auto j = nlohmann::json::parse(line);
        for (const auto& span : j.at("spans"))
          m[{span.at("lo").get<std::size_t>(),
             span.at("hi").get<std::size_t>()}] =
              span.at("text").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace csforge
