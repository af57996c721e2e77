#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "csforge/io.hpp"
#include "csforge/lexgen.hpp"

using namespace csforge;

namespace {

Lexicon toy_lexicon() {
  Lexicon lex;
  lex.entries["मैं"] = {"i"};
  lex.entries["घर"] = {"home", "house"};
  lex.entries["गया"] = {"went"};
  return lex;
}

}  // namespace

TEST_CASE("calibrate_switch_prob is the EN token fraction") {
  Corpus c;
  TaggedSentence s;
  s.id = "s0";
  s.tokens = {{"ह0", Lang::HI}, {"ह1", Lang::HI}, {"e2", Lang::EN}, {"ह3", Lang::HI}};
  c.sentences.push_back(s);
  REQUIRE(calibrate_switch_prob(c) == Catch::Approx(0.25).margin(1e-12));

  Corpus hi_only;
  hi_only.sentences.push_back(make_sentence("h", "मैं घर गया"));
  REQUIRE(calibrate_switch_prob(hi_only) == 0.0);

  Corpus none;
  TaggedSentence other;
  other.id = "o";
  other.tokens = {{"42", Lang::OTHER}};
  none.sentences.push_back(other);
  REQUIRE_THROWS_AS(calibrate_switch_prob(none), UndefinedError);
}

TEST_CASE("calibrate cross-checked against brute-force token count") {
  Rng rng(99);
  Corpus c;
  std::size_t en = 0, hi = 0;
  for (int i = 0; i < 50; ++i) {
    TaggedSentence s;
    s.id = "s" + std::to_string(i);
    const std::size_t len = 3 + rng.next_below(10);
    for (std::size_t k = 0; k < len; ++k) {
      if (rng.bernoulli(0.3)) {
        s.tokens.push_back({"w", Lang::EN});
        ++en;
      } else {
        s.tokens.push_back({"ह", Lang::HI});
        ++hi;
      }
    }
    c.sentences.push_back(s);
  }
  REQUIRE(calibrate_switch_prob(c) ==
          Catch::Approx(double(en) / double(en + hi)).margin(1e-12));
}

TEST_CASE("generate_lex p=0 keeps every token") {
  auto s = make_sentence("s0", "मैं घर गया");
  auto out = generate_lex(s, toy_lexicon(), {.p_switch = 0.0, .seed = 3,
                                             .variants_per_sentence = 4});
  REQUIRE(out.size() == 4);
  for (const auto& v : out) {
    REQUIRE(v.source == Source::LEX);
    REQUIRE(v.tokens == s.tokens);
  }
}

TEST_CASE("generate_lex p=1 with full coverage replaces all HI tokens") {
  Lexicon lex;
  lex.entries["मैं"] = {"i"};
  lex.entries["घर"] = {"home"};
  lex.entries["गया"] = {"went"};
  auto s = make_sentence("s0", "मैं घर गया");
  auto out = generate_lex(s, lex, {.p_switch = 1.0, .seed = 3,
                                   .variants_per_sentence = 1});
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].text() == "i home went");
  for (const auto& t : out[0].tokens) REQUIRE(t.lang == Lang::EN);
}

TEST_CASE("generate_lex never touches NE, OTHER, EN or uncovered tokens") {
  TaggedSentence s;
  s.id = "s0";
  s.tokens = {{"मैं", Lang::HI},   {"<NE>", Lang::NE}, {"ok", Lang::EN},
              {"42", Lang::OTHER}, {"अनजान", Lang::HI}};
  auto out = generate_lex(s, toy_lexicon(), {.p_switch = 1.0, .seed = 1,
                                             .variants_per_sentence = 1});
  REQUIRE(out[0].tokens[0].surface == "i");
  REQUIRE(out[0].tokens[1].surface == "<NE>");
  REQUIRE(out[0].tokens[2].surface == "ok");
  REQUIRE(out[0].tokens[3].surface == "42");
  // No lexicon entry: passes through even at p=1.
  REQUIRE(out[0].tokens[4].surface == "अनजान");
  REQUIRE(out[0].tokens[4].lang == Lang::HI);
  REQUIRE(out[0].size() == s.size());
}

TEST_CASE("generate_lex is deterministic per (seed, id, variant)") {
  auto s = make_sentence("s7", "मैं घर गया मैं घर गया");
  LexConfig cfg{.p_switch = 0.5, .seed = 13, .variants_per_sentence = 3};
  auto a = generate_lex(s, toy_lexicon(), cfg);
  auto b = generate_lex(s, toy_lexicon(), cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);

  // Different sentence id shifts the stream.
  auto s2 = s;
  s2.id = "other";
  auto c = generate_lex(s2, toy_lexicon(), cfg);
  bool all_equal = true;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].tokens != c[i].tokens) all_equal = false;
  // With six switchable tokens over three variants a collision of every
  // variant is vanishingly unlikely.
  REQUIRE_FALSE(all_equal);
}

TEST_CASE("generate_lex empirical replacement rate converges to p") {
  Lexicon lex;
  lex.entries["शब्द"] = {"word"};
  Corpus c;
  const std::size_t n_sent = 1000;
  const std::size_t len = 12;
  for (std::size_t i = 0; i < n_sent; ++i) {
    TaggedSentence s;
    s.id = "s" + std::to_string(i);
    for (std::size_t k = 0; k < len; ++k) s.tokens.push_back({"शब्द", Lang::HI});
    c.sentences.push_back(s);
  }
  LexConfig cfg{.p_switch = 0.5, .seed = 13, .variants_per_sentence = 1};
  auto out = generate_lex_corpus(c, lex, cfg);

  // Counting oracle: every covered token was HI, count the EN survivors.
  std::size_t replaced = 0, covered = 0;
  for (const auto& s : out.sentences) {
    REQUIRE(s.size() == len);
    for (const auto& t : s.tokens) {
      ++covered;
      if (t.lang == Lang::EN) {
        REQUIRE(t.surface == "word");
        ++replaced;
      }
    }
  }
  REQUIRE(covered == n_sent * len);
  double rate = double(replaced) / double(covered);
  REQUIRE(rate > 0.48);
  REQUIRE(rate < 0.52);
}

TEST_CASE("replaced positions are a subset of covered HI positions") {
  auto lex = toy_lexicon();
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    TaggedSentence s;
    s.id = "t" + std::to_string(trial);
    std::vector<std::string> pool{"मैं", "घर", "गया", "और", "ok", "<NE>"};
    for (int k = 0; k < 8; ++k) {
      auto surf = pool[rng.next_below(pool.size())];
      s.tokens.push_back({surf, tag_language(surf)});
    }
    auto out = generate_lex(s, lex, {.p_switch = 0.7,
                                     .seed = std::uint64_t(trial),
                                     .variants_per_sentence = 2});
    for (const auto& v : out) {
      REQUIRE(v.size() == s.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v.tokens[i] == s.tokens[i]) continue;
        // Changed: must have been covered HI, now EN with a listed candidate.
        REQUIRE(s.tokens[i].lang == Lang::HI);
        auto* cands = lex.find(s.tokens[i].surface);
        REQUIRE(cands != nullptr);
        REQUIRE(v.tokens[i].lang == Lang::EN);
        REQUIRE(std::find(cands->begin(), cands->end(),
                          v.tokens[i].surface) != cands->end());
      }
    }
  }
}

TEST_CASE("lexicon TSV loader") {
  auto path = std::filesystem::temp_directory_path() / "csforge_lex.tsv";
  atomic_write(path.string(), "मैं\ti\nघर\thome|house\n");
  auto lex = load_lexicon(path.string());
  REQUIRE(lex.entries.size() == 2);
  REQUIRE(lex.entries.at("घर") == std::vector<std::string>{"home", "house"});

  atomic_write(path.string(), "मैं\n");
  REQUIRE_THROWS_AS(load_lexicon(path.string()), IoError);
  std::filesystem::remove(path);
}
