#include <catch2/catch_amalgamated.hpp>

#include "csforge/diversity.hpp"
#include "csforge/rng.hpp"

using namespace csforge;

namespace {

TaggedSentence sent(const std::string& id, const std::vector<std::string>& toks) {
  TaggedSentence s;
  s.id = id;
  for (const auto& t : toks) s.tokens.push_back({t, Lang::EN});
  return s;
}

std::vector<std::string> word_pool() {
  std::vector<std::string> pool;
  for (int i = 0; i < 40; ++i) pool.push_back("word" + std::to_string(i));
  return pool;
}

}  // namespace

TEST_CASE("gzip_compressed_size is deterministic") {
  std::string text = "the quick brown fox jumps over the lazy dog\n";
  auto a = gzip_compressed_size(text);
  auto b = gzip_compressed_size(text);
  REQUIRE(a == b);
  REQUIRE(a > 0);
  // Repetitive input compresses below its raw size.
  std::string rep;
  for (int i = 0; i < 50; ++i) rep += text;
  REQUIRE(gzip_compressed_size(rep) < rep.size());
}

TEST_CASE("identical sentences give larger D than distinct ones") {
  auto pool = word_pool();
  Rng rng(11);

  Corpus identical;
  std::vector<std::string> fixed;
  for (int k = 0; k < 8; ++k) fixed.push_back(pool[rng.next_below(pool.size())]);
  for (int i = 0; i < 100; ++i)
    identical.sentences.push_back(sent("i" + std::to_string(i), fixed));

  Corpus distinct;
  for (int i = 0; i < 100; ++i) {
    // Same length, shuffled fresh words each time.
    std::vector<std::string> toks;
    for (int k = 0; k < 8; ++k) toks.push_back(pool[rng.next_below(pool.size())]);
    distinct.sentences.push_back(sent("d" + std::to_string(i), toks));
  }

  auto di = gzip_diversity(identical);
  auto dd = gzip_diversity(distinct);
  REQUIRE(di.d > dd.d);
  REQUIRE(di.d == static_cast<long long>(di.s1) - static_cast<long long>(di.s2));
}

TEST_CASE("single-sentence corpus has D = 0") {
  Corpus c;
  c.sentences.push_back(sent("a", {"just", "one", "sentence"}));
  auto r = gzip_diversity(c);
  REQUIRE(r.s1 == r.s2);
  REQUIRE(r.d == 0);
}

TEST_CASE("exact duplication strictly increases D") {
  auto pool = word_pool();
  Rng rng(3);
  Corpus c;
  for (int i = 0; i < 30; ++i) {
    std::vector<std::string> toks;
    for (int k = 0; k < 7; ++k) toks.push_back(pool[rng.next_below(pool.size())]);
    c.sentences.push_back(sent("s" + std::to_string(i), toks));
  }
  Corpus doubled = c;
  for (int i = 0; i < 30; ++i) {
    auto copy = c.sentences[i];
    copy.id += "_dup";
    doubled.sentences.push_back(copy);
  }
  REQUIRE(gzip_diversity(doubled).d > gzip_diversity(c).d);
}

TEST_CASE("diversity report is deterministic") {
  Corpus c;
  c.sentences.push_back(sent("a", {"alpha", "beta", "gamma"}));
  c.sentences.push_back(sent("b", {"delta", "epsilon", "zeta"}));
  auto r1 = gzip_diversity(c);
  auto r2 = gzip_diversity(c);
  REQUIRE(r1.s1 == r2.s1);
  REQUIRE(r1.s2 == r2.s2);
  REQUIRE(r1.d == r2.d);
}

