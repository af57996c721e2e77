#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "csforge/bleu.hpp"
#include "csforge/curriculum.hpp"
#include "csforge/diversity.hpp"
#include "csforge/emtgen.hpp"
#include "csforge/io.hpp"
#include "csforge/lexgen.hpp"
#include "csforge/metrics.hpp"
#include "csforge/ngram_lm.hpp"
#include "csforge/tcs.hpp"
#include "csforge/util.hpp"

// Operation layer shared by the CLI subcommands and the pipeline runner:
// one JSON argument object in, one JSON result out. Every file an op
// writes is listed under "outputs" so the pipeline can digest them.
namespace csforge::ops {

using json = nlohmann::json;

inline json lex_gen(const json& args) {
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  auto lexicon = load_lexicon(args.at("lexicon").get<std::string>());
  LexConfig cfg;
  cfg.seed = args.value("seed", 0ULL);
  cfg.variants_per_sentence = args.value("variants", 1ULL);
  if (args.contains("calibrate")) {
    auto ref = load_corpus(args.at("calibrate").get<std::string>());
    cfg.p_switch = calibrate_switch_prob(ref);
  } else {
    cfg.p_switch = args.at("p").get<double>();
  }
  auto out = generate_lex_corpus(corpus, lexicon, cfg);
  const std::string out_path = args.at("out").get<std::string>();
  save_corpus(out, out_path);
  json r;
  r["op"] = "lex-gen";
  r["p_switch"] = cfg.p_switch;
  r["n_input"] = corpus.size();
  r["n_output"] = out.size();
  r["outputs"] = {out_path};
  return r;
}

inline json emt_gen(const json& args) {
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  auto parses = load_parse_file(args.at("parses").get<std::string>());
  if (parses.size() != corpus.size())
    throw SizeMismatchError("emt-gen: " + std::to_string(corpus.size()) +
                            " sentences vs " + std::to_string(parses.size()) +
                            " parses");
  const std::string strategy_name = args.value("strategy", "alignment");
  const EmtStrategy strategy = strategy_name == "translation"
                                   ? EmtStrategy::TRANSLATION
                                   : EmtStrategy::ALIGNMENT;

  std::vector<TaggedSentence> hi_sentences;
  std::vector<Alignment> alignments;
  std::vector<std::map<SpanKey, std::string>> translations;
  if (strategy == EmtStrategy::ALIGNMENT) {
    auto hi = load_corpus(args.at("hi").get<std::string>());
    alignments = load_pharaoh(args.at("align").get<std::string>());
    if (hi.size() != corpus.size() || alignments.size() != corpus.size())
      throw SizeMismatchError("emt-gen: hi/align line counts disagree with corpus");
    hi_sentences = std::move(hi.sentences);
  } else {
    translations =
        load_clause_translations(args.at("translations").get<std::string>());
    if (translations.size() != corpus.size())
      throw SizeMismatchError("emt-gen: translations line count disagrees with corpus");
  }

  EmtConfig cfg;
  cfg.seed = args.value("seed", 0ULL);
  cfg.max_switches = args.value("max_switches", 1ULL);
  const std::size_t variants = args.value("variants", 1ULL);

  Corpus out;
  out.name = corpus.name + ".emt";
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ParseBundle bundle;
    bundle.en = corpus.sentences[i];
    bundle.tree = parses[i];
    if (strategy == EmtStrategy::ALIGNMENT) {
      bundle.hi = hi_sentences[i];
      bundle.align = alignments[i];
    } else {
      bundle.clause_translations = translations[i];
    }
    try {
      for (auto& v : generate_emt(bundle, cfg, strategy, variants))
        out.sentences.push_back(std::move(v));
    } catch (const NoSwitchPointError&) {
      ++dropped;  // sentence has no clause/phrase to switch; skip it
    }
  }
  const std::string out_path = args.at("out").get<std::string>();
  save_corpus(out, out_path);
  json r;
  r["op"] = "emt-gen";
  r["strategy"] = strategy_name;
  r["n_input"] = corpus.size();
  r["n_output"] = out.size();
  r["n_dropped_no_switch_point"] = dropped;
  r["outputs"] = {out_path};
  return r;
}

inline json metrics_op(const json& args) {
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  MetricReport rep;
  if (args.contains("ne")) {
    auto ne = load_ne_list(args.at("ne").get<std::string>());
    rep = report(corpus, ne);
  } else {
    rep = report(corpus);
  }
  json r = report_to_json(rep);
  r["op"] = "metrics";
  json outputs = json::array();
  if (args.contains("out")) {
    const std::string out_path = args.at("out").get<std::string>();
    atomic_write(out_path, report_to_json(rep).dump(2) + "\n");
    outputs.push_back(out_path);
  }
  if (args.contains("hist_csv")) {
    const std::string csv_path = args.at("hist_csv").get<std::string>();
    atomic_write(csv_path, histograms_to_csv(rep));
    outputs.push_back(csv_path);
  }
  r["outputs"] = std::move(outputs);
  return r;
}

inline json bleu_op(const json& args) {
  auto cand = load_corpus(args.at("cand").get<std::string>());
  std::vector<Corpus> refs;
  for (const auto& p : args.at("refs"))
    refs.push_back(load_corpus(p.get<std::string>()));
  auto bs = corpus_bleu(cand, refs);
  json r;
  r["op"] = "bleu";
  r["score"] = bs.score;
  r["precisions"] = bs.precisions;
  r["brevity_penalty"] = bs.brevity_penalty;
  r["candidate_length"] = bs.candidate_length;
  r["reference_length"] = bs.reference_length;
  json outputs = json::array();
  if (args.contains("out")) {
    const std::string out_path = args.at("out").get<std::string>();
    atomic_write(out_path, r.dump(2) + "\n");
    outputs.push_back(out_path);
  }
  r["outputs"] = std::move(outputs);
  return r;
}

inline json self_bleu_op(const json& args) {
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  const std::size_t sample = args.value("sample", 1000ULL);
  const std::uint64_t seed = args.value("seed", 7ULL);
  json r;
  r["op"] = "self-bleu";
  r["self_bleu"] = self_bleu(corpus, sample, seed);
  r["sample"] = std::min<std::size_t>(sample, corpus.size());
  r["outputs"] = json::array();
  return r;
}

inline json diversity_op(const json& args) {
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  auto d = gzip_diversity(corpus);
  json r;
  r["op"] = "diversity";
  r["s1"] = d.s1;
  r["s2"] = d.s2;
  r["d"] = d.d;
  json outputs = json::array();
  if (args.contains("out")) {
    const std::string out_path = args.at("out").get<std::string>();
    atomic_write(out_path, r.dump(2) + "\n");
    outputs.push_back(out_path);
  }
  r["outputs"] = std::move(outputs);
  return r;
}

inline json lm_train(const json& args) {
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  const std::size_t order = args.value("order", 3ULL);
  const double discount = args.value("discount", 0.75);
  const std::size_t min_count = args.value("min_count", 1ULL);
  auto lm = NgramLm::train(corpus, order, discount, min_count);
  const std::string out_path = args.at("out").get<std::string>();
  lm.save(out_path);
  json r;
  r["op"] = "lm-train";
  r["order"] = order;
  r["vocab_size"] = lm.vocab_size();
  r["outputs"] = {out_path};
  return r;
}

inline json lm_ppl(const json& args) {
  auto lm = NgramLm::load(args.at("lm").get<std::string>());
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  json r;
  r["op"] = "lm-ppl";
  r["perplexity"] = lm.perplexity(corpus);
  r["order"] = lm.order();
  r["outputs"] = json::array();
  return r;
}

inline json tcs_train(const json& args) {
  auto cfg = load_curriculum(args.at("config").get<std::string>());
  const std::uint64_t seed = args.value("seed", 7ULL);
  const std::string out_dir = args.value("out", "");
  auto reg = CorpusRegistry::load(cfg);
  auto result = run_curriculum(cfg, reg, seed, out_dir);
  json r;
  r["op"] = "tcs-train";
  json stages = json::array();
  json outputs = json::array();
  for (const auto& log : result.logs) {
    json s;
    s["stage"] = log.name;
    s["best_metric"] = log.best_metric;
    s["best_epoch"] = log.best_epoch;
    s["final_loss"] =
        log.epoch_losses.empty() ? 0.0 : log.epoch_losses.back();
    stages.push_back(std::move(s));
    if (!out_dir.empty()) outputs.push_back(out_dir + "/" + log.name + ".ckpt");
  }
  if (!out_dir.empty()) outputs.push_back(out_dir + "/curriculum_log.json");
  r["stages"] = std::move(stages);
  r["outputs"] = std::move(outputs);
  return r;
}

inline json tcs_translate(const json& args) {
  auto model = TcsModel::load(args.at("ckpt").get<std::string>());
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  const std::string dir_name = args.value("direction", "src2tgt");
  const Direction dir =
      dir_name == "tgt2src" ? Direction::TGT2SRC : Direction::SRC2TGT;
  const std::size_t max_len =
      args.value("max_len", model.config().max_len);
  Corpus out;
  out.name = corpus.name + ".tcs";
  for (const auto& s : corpus.sentences)
    out.sentences.push_back(model.translate(s, dir, max_len));
  const std::string out_path = args.at("out").get<std::string>();
  save_corpus(out, out_path);
  json r;
  r["op"] = "tcs-translate";
  r["direction"] = dir_name;
  r["n_sentences"] = out.size();
  r["outputs"] = {out_path};
  return r;
}

inline json split_op(const json& args) {
  auto corpus = load_corpus(args.at("corpus").get<std::string>());
  const double train = args.value("train", 0.8);
  const double valid = args.value("valid", 0.1);
  const double test = args.value("test", 0.1);
  const std::uint64_t seed = args.value("seed", 7ULL);
  auto parts = split_corpus(corpus, train, valid, test, seed);
  const std::string prefix = args.at("out_prefix").get<std::string>();
  const std::vector<std::string> suffixes{".train.jsonl", ".valid.jsonl",
                                          ".test.jsonl"};
  json outputs = json::array();
  for (int i = 0; i < 3; ++i) {
    save_corpus(parts[i], prefix + suffixes[i]);
    outputs.push_back(prefix + suffixes[i]);
  }
  json r;
  r["op"] = "split";
  r["sizes"] = {parts[0].size(), parts[1].size(), parts[2].size()};
  r["outputs"] = std::move(outputs);
  return r;
}

inline json run_op(const std::string& op, const json& args) {
  if (op == "lex-gen") return lex_gen(args);
  if (op == "emt-gen") return emt_gen(args);
  if (op == "metrics") return metrics_op(args);
  if (op == "bleu") return bleu_op(args);
  if (op == "self-bleu") return self_bleu_op(args);
  if (op == "diversity") return diversity_op(args);
  if (op == "lm-train") return lm_train(args);
  if (op == "lm-ppl") return lm_ppl(args);
  if (op == "tcs-train") return tcs_train(args);
  if (op == "tcs-translate") return tcs_translate(args);
  if (op == "split") return split_op(args);
  throw ConfigError("unknown op: " + op);
}

}  // namespace csforge::ops
