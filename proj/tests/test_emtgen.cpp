#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <functional>

#include "csforge/emtgen.hpp"
#include "csforge/io.hpp"

using namespace csforge;

namespace {

// Independent paren-depth scanner: counts leaves as maximal atom runs that
// directly follow another atom (label), at any depth.
std::size_t oracle_leaf_count(const std::string& text) {
  std::size_t leaves = 0;
  bool in_atom = false;
  bool label_pending = false;  // saw '(' and its label atom already
  for (char ch : text) {
    bool space = ch == ' ' || ch == '\t';
    if (ch == '(') {
      label_pending = false;
      in_atom = false;
    } else if (ch == ')') {
      in_atom = false;
    } else if (space) {
      in_atom = false;
    } else {
      if (!in_atom) {
        if (label_pending) {
          ++leaves;        // second atom inside a bracket = terminal
          label_pending = false;
        } else {
          label_pending = true;  // first atom = label
        }
      }
      in_atom = true;
      continue;
    }
    if (space) continue;
  }
  return leaves;
}

ParseBundle alignment_bundle(const std::string& en_text,
                             const std::string& parse,
                             const std::string& hi_text,
                             const std::vector<std::pair<std::size_t, std::size_t>>& links) {
  ParseBundle b;
  b.en = make_sentence("e0", en_text);
  b.tree = parse_bracketed(parse);
  b.hi = make_sentence("h0", hi_text);
  b.align = Alignment{links};
  return b;
}

}  // namespace

TEST_CASE("parse_bracketed basic tree") {
  auto root = parse_bracketed("(S (NP (PRP he)) (VP (VBD ran)))");
  REQUIRE(root.label == "S");
  REQUIRE(root.lo == 0);
  REQUIRE(root.hi == 2);
  REQUIRE(root.children.size() == 2);
  REQUIRE(root.children[0].label == "NP");
  REQUIRE(root.children[0].lo == 0);
  REQUIRE(root.children[0].hi == 1);
  REQUIRE(root.children[1].label == "VP");
  REQUIRE(root.children[1].lo == 1);
  REQUIRE(root.children[1].hi == 2);
  // POS leaves.
  REQUIRE(root.children[0].children[0].label == "PRP");
  REQUIRE(root.children[0].children[0].terminal == "he");
}

TEST_CASE("parse_bracketed strips functional annotations") {
  auto root = parse_bracketed("(S (NP-SBJ (PRP he)) (VP=2 (VBD ran)))");
  REQUIRE(root.children[0].label == "NP");
  REQUIRE(root.children[1].label == "VP");
  // Labels that begin with '-' stay intact.
  auto r2 = parse_bracketed("(S (NP (-LRB- x) (NN y)))");
  REQUIRE(r2.children[0].children[0].label == "-LRB-");
}

TEST_CASE("parse_bracketed unwraps the empty-label PTB wrapper") {
  auto root = parse_bracketed("( (S (NP (PRP he)) (VP (VBD ran))) )");
  REQUIRE(root.label == "S");
  REQUIRE(root.hi == 2);
}

TEST_CASE("parse_bracketed error cases") {
  REQUIRE_THROWS_AS(parse_bracketed("(S)"), ParseError);
  REQUIRE_THROWS_AS(parse_bracketed(""), ParseError);
  REQUIRE_THROWS_AS(parse_bracketed("(S (NP (PRP he))"), ParseError);
  REQUIRE_THROWS_AS(parse_bracketed("(S (NP (PRP he))))"), ParseError);
  REQUIRE_THROWS_AS(parse_bracketed("no parens"), ParseError);
}

TEST_CASE("parse_bracketed leaf count matches the paren-depth oracle") {
  std::vector<std::string> lines = {
      "(S (NP (DT the) (JJ quick) (NN fox)) (VP (VBD jumped) (PP (IN over) "
      "(NP (DT the) (JJ lazy) (NN dog)))) (. .))",
      "(S (SBAR (IN because) (S (NP (PRP she)) (VP (VBD left)))) (NP (PRP "
      "he)) (VP (VBD cried)))",
      "(SBARQ (WHNP (WP who)) (SQ (VBD did) (NP (PRP you)) (VP (VB see))) "
      "(. ?))"};
  for (const auto& line : lines) {
    auto root = parse_bracketed(line);
    REQUIRE(leaf_count(root) == oracle_leaf_count(line));
  }
}

TEST_CASE("select_switch_candidates finds clause tags in document order") {
  // SBAR inside S inside root: outer S child listed before inner SBAR.
  auto root = parse_bracketed(
      "(S (NP (PRP i)) (VP (VBD knew) (S (NP (PRP he)) (VP (VBD said) (SBAR "
      "(IN that) (S (NP (PRP she)) (VP (VBD left))))))))");
  EmtConfig cfg;
  auto cands = select_switch_candidates(root, cfg);
  REQUIRE(cands.size() == 3);
  REQUIRE(cands[0]->label == "S");
  REQUIRE(cands[0]->lo == 2);
  REQUIRE(cands[1]->label == "SBAR");
  REQUIRE(cands[2]->label == "S");
  // Document order: outer nodes first.
  REQUIRE(cands[0]->span_len() >= cands[1]->span_len());
}

TEST_CASE("select_switch_candidates falls back to phrase tags") {
  auto root = parse_bracketed("(S (NP (PRP he)) (VP (VBD ran)))");
  EmtConfig cfg;
  auto cands = select_switch_candidates(root, cfg);
  REQUIRE(cands.size() == 2);
  REQUIRE(cands[0]->label == "NP");
  REQUIRE(cands[1]->label == "VP");
}

TEST_CASE("select_switch_candidates exhaustive node enumeration") {
  auto root = parse_bracketed(
      "(S (SBAR (IN if) (S (NP (PRP it)) (VP (VBZ rains)))) (NP (PRP we)) "
      "(VP (VBP stay)))");
  EmtConfig cfg;
  auto cands = select_switch_candidates(root, cfg);

  // Oracle: walk every node, collect clause-tag non-root non-full spans.
  std::vector<const ParseNode*> expected;
  std::function<void(const ParseNode&)> walk = [&](const ParseNode& n) {
    bool is_clause = n.label == "S" || n.label == "SBAR" ||
                     n.label == "SINV" || n.label == "SQ" ||
                     n.label == "SBARQ";
    if (&n != &root && is_clause && !(n.lo == root.lo && n.hi == root.hi))
      expected.push_back(&n);
    for (const auto& ch : n.children) walk(ch);
  };
  walk(root);
  REQUIRE(cands == expected);
  // Phrase nodes are absent because clause nodes exist.
  for (auto* c : cands)
    REQUIRE((c->label != "NP" && c->label != "VP"));
}

TEST_CASE("select_switch_candidates excludes whole-sentence spans") {
  // The inner S spans the full sentence via a unary chain: it is excluded
  // even though it is not the root, so the phrase fallback kicks in.
  auto root = parse_bracketed("(S (S (NP (PRP he)) (VP (VBD ran))))");
  REQUIRE(root.label == "S");
  REQUIRE(root.children.size() == 1);
  EmtConfig cfg;
  auto cands = select_switch_candidates(root, cfg);
  REQUIRE(cands.size() == 2);
  for (auto* c : cands) {
    REQUIRE((c->label == "NP" || c->label == "VP"));
    REQUIRE(c->span_len() < root.span_len());
  }
}

TEST_CASE("returns empty when nothing matches") {
  auto root = parse_bracketed("(FRAG (INTJ (UH oh)) (. !))");
  EmtConfig cfg;
  REQUIRE(select_switch_candidates(root, cfg).empty());
}

TEST_CASE("project_span min-max covering") {
  Alignment a{{{1, 0}, {2, 2}}};
  auto p = project_span(1, 3, a, 5);
  REQUIRE(p.has_value());
  REQUIRE(p->first == 0);
  REQUIRE(p->second == 3);

  REQUIRE_FALSE(project_span(0, 1, Alignment{{{3, 3}}}, 5).has_value());

  // Identity alignment projects a span onto itself.
  Alignment ident;
  for (std::size_t i = 0; i < 6; ++i) ident.links.emplace_back(i, i);
  auto q = project_span(2, 5, ident, 6);
  REQUIRE(q->first == 2);
  REQUIRE(q->second == 5);
}

TEST_CASE("generate_emt translation strategy splices the clause") {
  ParseBundle b;
  b.en = make_sentence("e0", "he said that she left");
  b.tree = parse_bracketed(
      "(S (NP (PRP he)) (VP (VBD said) (SBAR (IN that) (S (NP (PRP she)) "
      "(VP (VBD left))))))");
  b.clause_translations[{2, 5}] = "कि वह चली गई";
  EmtConfig cfg;
  cfg.seed = 7;
  auto out = generate_emt(b, cfg, EmtStrategy::TRANSLATION, 1);
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].text() == "he said कि वह चली गई");
  REQUIRE(out[0].source == Source::EMT);
  REQUIRE(out[0].tokens[0].lang == Lang::EN);
  REQUIRE(out[0].tokens[2].lang == Lang::HI);
}

TEST_CASE("generate_emt alignment strategy with identity alignment") {
  auto b = alignment_bundle(
      "we stay if it rains",
      "(S (NP (PRP we)) (VP (VBP stay) (SBAR (IN if) (S (NP (PRP it)) (VP "
      "(VBZ rains))))))",
      "हम रहना अगर यह बरसे", {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}});
  EmtConfig cfg;
  auto out = generate_emt(b, cfg, EmtStrategy::ALIGNMENT, 1);
  REQUIRE(out.size() == 1);
  // Identity alignment: spliced span replaces the same positions, so
  // length is preserved.
  REQUIRE(out[0].size() == b.en.size());
  // The candidate chosen covers either SBAR [2,5) or inner S [3,5);
  // leading EN tokens stay put.
  REQUIRE(out[0].tokens[0].surface == "we");
  REQUIRE(out[0].tokens[1].surface == "stay");
  bool has_hi = false, has_en = false;
  for (const auto& t : out[0].tokens) {
    if (t.lang == Lang::HI) has_hi = true;
    if (t.lang == Lang::EN) has_en = true;
  }
  REQUIRE(has_hi);
  REQUIRE(has_en);
}

TEST_CASE("generate_emt output equals original minus span plus projection") {
  auto b = alignment_bundle(
      "he cried because she left",
      "(S (NP (PRP he)) (VP (VBD cried) (SBAR (IN because) (S (NP (PRP "
      "she)) (VP (VBD left))))))",
      "वह रोया क्योंकि वह चली", {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}});
  EmtConfig cfg;
  cfg.clause_tags = {"SBAR"};  // force a single candidate
  auto out = generate_emt(b, cfg, EmtStrategy::ALIGNMENT, 1);
  REQUIRE(out.size() == 1);
  // SBAR spans [2,5); projection is [2,5); expected: en[0,2) + hi[2,5).
  std::vector<std::string> expected{"he", "cried", "क्योंकि", "वह", "चली"};
  REQUIRE(out[0].size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    REQUIRE(out[0].tokens[i].surface == expected[i]);
  REQUIRE(out[0].tokens[2].lang == Lang::HI);
}

TEST_CASE("generate_emt throws NoSwitchPoint when nothing matches") {
  ParseBundle b;
  b.en = make_sentence("e0", "oh !");
  b.tree = parse_bracketed("(FRAG (INTJ (UH oh)) (. !))");
  b.clause_translations[{0, 1}] = "ओह";
  EmtConfig cfg;
  REQUIRE_THROWS_AS(generate_emt(b, cfg, EmtStrategy::TRANSLATION, 1),
                    NoSwitchPointError);
}

TEST_CASE("generate_emt validates bundle against strategy") {
  ParseBundle b;
  b.en = make_sentence("e0", "he ran");
  b.tree = parse_bracketed("(S (NP (PRP he)) (VP (VBD ran)))");
  EmtConfig cfg;
  REQUIRE_THROWS_AS(generate_emt(b, cfg, EmtStrategy::ALIGNMENT, 1),
                    ConfigError);
  REQUIRE_THROWS_AS(generate_emt(b, cfg, EmtStrategy::TRANSLATION, 1),
                    ConfigError);

  // Tree span must match the sentence.
  ParseBundle wrong;
  wrong.en = make_sentence("e1", "he ran fast");
  wrong.tree = parse_bracketed("(S (NP (PRP he)) (VP (VBD ran)))");
  wrong.clause_translations[{0, 1}] = "वह";
  REQUIRE_THROWS_AS(generate_emt(wrong, cfg, EmtStrategy::TRANSLATION, 1),
                    ConfigError);
}

TEST_CASE("generate_emt candidates without projection are skipped") {
  // Alignment links only the first token; clause spans have no link.
  auto b = alignment_bundle(
      "we stay if it rains",
      "(S (NP (PRP we)) (VP (VBP stay) (SBAR (IN if) (S (NP (PRP it)) (VP "
      "(VBZ rains))))))",
      "हम रहना", {{0, 0}});
  EmtConfig cfg;
  auto out = generate_emt(b, cfg, EmtStrategy::ALIGNMENT, 2);
  REQUIRE(out.empty());
}

TEST_CASE("generate_emt switched spans never overlap") {
  auto b = alignment_bundle(
      "i knew he said that she left",
      "(S (NP (PRP i)) (VP (VBD knew) (S (NP (PRP he)) (VP (VBD said) (SBAR "
      "(IN that) (S (NP (PRP she)) (VP (VBD left))))))))",
      "मैं जानता वह बोला कि वह गई",
      {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}});
  EmtConfig cfg;
  cfg.max_switches = 3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    auto out = generate_emt(b, cfg, EmtStrategy::ALIGNMENT, 4);
    for (const auto& v : out) {
      // With identity alignment every variant keeps sentence length; HI
      // runs correspond to chosen spans, which must not overlap (their
      // union length equals the sum of individual lengths by construction
      // of the splice list).
      REQUIRE(v.size() == b.en.size());
    }
  }
}

TEST_CASE("bundled EMT fixtures are mutually consistent") {
  auto en = load_corpus("demo/fixtures/en.jsonl");
  auto hi = load_corpus("demo/fixtures/hi.jsonl");
  auto parses = load_parse_file("demo/fixtures/en.ptb");
  auto aligns = load_pharaoh("demo/fixtures/align.pharaoh");
  auto trans = load_clause_translations("demo/fixtures/trans.jsonl");
  REQUIRE(en.size() == parses.size());
  REQUIRE(en.size() == hi.size());
  REQUIRE(en.size() == aligns.size());
  REQUIRE(en.size() == trans.size());

  EmtConfig cfg;
  for (std::size_t i = 0; i < en.size(); ++i) {
    // Parse leaves enumerate the sentence tokens exactly.
    REQUIRE(leaf_count(parses[i]) == en.sentences[i].size());
    // Alignment indices stay in range on both sides.
    for (auto [e, h] : aligns[i].links) {
      REQUIRE(e < en.sentences[i].size());
      REQUIRE(h < hi.sentences[i].size());
    }
    // Every fixture sentence carries a clause switch point, and both
    // strategies produce mixed-language output from it.
    ParseBundle bundle;
    bundle.en = en.sentences[i];
    bundle.tree = parses[i];
    bundle.hi = hi.sentences[i];
    bundle.align = aligns[i];
    bundle.clause_translations = trans[i];
    cfg.seed = i;
    auto by_align = generate_emt(bundle, cfg, EmtStrategy::ALIGNMENT, 1);
    auto by_trans = generate_emt(bundle, cfg, EmtStrategy::TRANSLATION, 2);
    REQUIRE(by_align.size() + by_trans.size() > 0);
  }
}

TEST_CASE("pharaoh and parse file loaders") {
  auto dir = std::filesystem::temp_directory_path();
  auto ppath = dir / "csforge_t.ptb";
  auto apath = dir / "csforge_t.pharaoh";
  atomic_write(ppath.string(), "(S (NP (PRP he)) (VP (VBD ran)))\n(S (NP (PRP she)) (VP (VBD left)))\n");
  auto parses = load_parse_file(ppath.string());
  REQUIRE(parses.size() == 2);
  REQUIRE(parses[1].hi == 2);

  atomic_write(apath.string(), "0-0 1-1\n0-1 1-0\n");
  auto aligns = load_pharaoh(apath.string());
  REQUIRE(aligns.size() == 2);
  REQUIRE(aligns[1].links[0] == std::make_pair<std::size_t, std::size_t>(0, 1));

  atomic_write(apath.string(), "0-0 banana\n");
  REQUIRE_THROWS_AS(load_pharaoh(apath.string()), IoError);
  std::filesystem::remove(ppath);
  std::filesystem::remove(apath);
}
