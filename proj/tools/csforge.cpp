#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "csforge/ops.hpp"
#include "csforge/pipeline.hpp"

using csforge::ops::json;

namespace {

// Report printing, --format json|csv|text.
void print_report(const json& r, const std::string& format) {
  if (format == "json") {
    std::cout << r.dump(2) << "\n";
    return;
  }
  if (format == "csv") {
    std::cout << "key,value\n";
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (it.value().is_structured()) continue;
      std::cout << it.key() << "," << it.value().dump() << "\n";
    }
    return;
  }
  for (auto it = r.begin(); it != r.end(); ++it) {
    if (it.value().is_structured() && it.key() != "precisions") continue;
    std::cout << it.key() << ": " << it.value().dump() << "\n";
  }
}

struct CommonFlags {
  std::uint64_t seed = 7;
  std::string format = "text";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Deterministic RNG seed");
  cmd->add_option("--format", flags.format, "Report format: json|csv|text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csforge: synthetic code-switched text generation, a desk-"
               "scale shared/private translation model, and corpus metrics"};
  app.require_subcommand(1);

  // lex-gen
  auto* lex = app.add_subcommand(
      "lex-gen", "Lexicon-based random replacement of Hindi tokens");
  std::string lex_corpus, lex_lexicon, lex_out, lex_calibrate;
  double lex_p = 0.25;
  std::size_t lex_variants = 1;
  CommonFlags lex_flags;
  lex->add_option("--corpus", lex_corpus, "Input corpus (JSONL)")->required();
  lex->add_option("--lexicon", lex_lexicon, "Hindi->English TSV")->required();
  lex->add_option("--p", lex_p, "Replacement probability");
  lex->add_option("--calibrate", lex_calibrate,
                  "Reference CS corpus; sets p to its EN token fraction");
  lex->add_option("--variants", lex_variants, "Variants per sentence");
  lex->add_option("--out", lex_out, "Output corpus (JSONL)")->required();
  add_common(lex, lex_flags);

  // emt-gen
  auto* emt = app.add_subcommand(
      "emt-gen", "Constituency clause substitution (EMT)");
  std::string emt_corpus, emt_parses, emt_strategy = "alignment";
  std::string emt_hi, emt_align, emt_translations, emt_out;
  std::size_t emt_max_switches = 1, emt_variants = 1;
  CommonFlags emt_flags;
  emt->add_option("--corpus", emt_corpus, "English corpus (JSONL)")->required();
  emt->add_option("--parses", emt_parses, "Bracketed parses, one per line")
      ->required();
  emt->add_option("--strategy", emt_strategy, "alignment|translation")
      ->check(CLI::IsMember({"alignment", "translation"}));
  emt->add_option("--hi", emt_hi, "Hindi corpus (alignment strategy)");
  emt->add_option("--align", emt_align, "Pharaoh alignments (alignment strategy)");
  emt->add_option("--translations", emt_translations,
                  "Clause translations JSONL (translation strategy)");
  emt->add_option("--max-switches", emt_max_switches, "Max clauses per variant");
  emt->add_option("--variants", emt_variants, "Variants per sentence");
  emt->add_option("--out", emt_out, "Output corpus (JSONL)")->required();
  add_common(emt, emt_flags);

  // metrics
  auto* met = app.add_subcommand("metrics", "Corpus mixing statistics");
  std::string met_corpus, met_ne, met_out, met_hist;
  CommonFlags met_flags;
  met->add_option("--corpus", met_corpus, "Corpus (JSONL)")->required();
  met->add_option("--ne", met_ne, "NE list, one surface per line");
  met->add_option("--out", met_out, "Write the report JSON here");
  met->add_option("--hist-csv", met_hist, "Write histograms as CSV here");
  add_common(met, met_flags);

  // bleu
  auto* bleu = app.add_subcommand("bleu", "Corpus BLEU");
  std::string bleu_cand, bleu_out;
  std::vector<std::string> bleu_refs;
  CommonFlags bleu_flags;
  bleu->add_option("--cand", bleu_cand, "Candidate corpus (JSONL)")->required();
  bleu->add_option("--refs", bleu_refs,
                   "Reference corpora, aligned by line (repeatable)")
      ->required();
  bleu->add_option("--out", bleu_out, "Write the score JSON here");
  add_common(bleu, bleu_flags);

  // self-bleu
  auto* sbleu = app.add_subcommand("self-bleu", "Self-BLEU diversity");
  std::string sbleu_corpus;
  std::size_t sbleu_sample = 1000;
  CommonFlags sbleu_flags;
  sbleu->add_option("--corpus", sbleu_corpus, "Corpus (JSONL)")->required();
  sbleu->add_option("--sample", sbleu_sample, "Sentences to sample");
  add_common(sbleu, sbleu_flags);

  // diversity
  auto* div = app.add_subcommand("diversity", "Gzip diversity score D = S1 - S2");
  std::string div_corpus, div_out;
  CommonFlags div_flags;
  div->add_option("--corpus", div_corpus, "Corpus (JSONL)")->required();
  div->add_option("--out", div_out, "Write the report JSON here");
  add_common(div, div_flags);

  // lm-train
  auto* lmt = app.add_subcommand(
      "lm-train", "Train the Kneser-Ney n-gram perplexity harness");
  std::string lmt_corpus, lmt_out;
  std::size_t lmt_order = 3, lmt_min_count = 1;
  double lmt_discount = 0.75;
  CommonFlags lmt_flags;
  lmt->add_option("--corpus", lmt_corpus, "Training corpus (JSONL)")->required();
  lmt->add_option("--order", lmt_order, "N-gram order, 1-5");
  lmt->add_option("--discount", lmt_discount, "Absolute discount in (0,1)");
  lmt->add_option("--min-count", lmt_min_count, "Vocabulary count cutoff");
  lmt->add_option("--out", lmt_out, "Output model file")->required();
  add_common(lmt, lmt_flags);

  // lm-ppl
  auto* lmp = app.add_subcommand("lm-ppl", "Perplexity of a corpus under a model");
  std::string lmp_lm, lmp_corpus;
  CommonFlags lmp_flags;
  lmp->add_option("--lm", lmp_lm, "Model file from lm-train")->required();
  lmp->add_option("--corpus", lmp_corpus, "Corpus (JSONL)")->required();
  add_common(lmp, lmp_flags);

  // tcs-train
  auto* tct = app.add_subcommand("tcs-train", "Run a training curriculum");
  std::string tct_config, tct_out;
  CommonFlags tct_flags;
  tct->add_option("--config", tct_config, "Curriculum JSON")->required();
  tct->add_option("--out", tct_out, "Directory for checkpoints and logs");
  add_common(tct, tct_flags);

  // tcs-translate
  auto* tcx = app.add_subcommand("tcs-translate", "Greedy decoding with a checkpoint");
  std::string tcx_ckpt, tcx_corpus, tcx_out, tcx_direction = "src2tgt";
  std::size_t tcx_max_len = 0;
  CommonFlags tcx_flags;
  tcx->add_option("--ckpt", tcx_ckpt, "Checkpoint file")->required();
  tcx->add_option("--corpus", tcx_corpus, "Input corpus (JSONL)")->required();
  tcx->add_option("--direction", tcx_direction, "src2tgt|tgt2src")
      ->check(CLI::IsMember({"src2tgt", "tgt2src"}));
  tcx->add_option("--max-len", tcx_max_len, "Decoding length cap");
  tcx->add_option("--out", tcx_out, "Output corpus (JSONL)")->required();
  add_common(tcx, tcx_flags);

  // split
  auto* spl = app.add_subcommand("split", "Deterministic train/valid/test split");
  std::string spl_corpus, spl_prefix;
  double spl_train = 0.8, spl_valid = 0.1, spl_test = 0.1;
  CommonFlags spl_flags;
  spl->add_option("--corpus", spl_corpus, "Corpus (JSONL)")->required();
  spl->add_option("--train", spl_train, "Train fraction");
  spl->add_option("--valid", spl_valid, "Valid fraction");
  spl->add_option("--test", spl_test, "Test fraction");
  spl->add_option("--out-prefix", spl_prefix, "Prefix for the three outputs")
      ->required();
  add_common(spl, spl_flags);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run a multi-step pipeline config");
  std::string pipe_config, pipe_manifest;
  CommonFlags pipe_flags;
  pipe->add_option("--config", pipe_config, "Pipeline JSON")->required();
  pipe->add_option("--manifest", pipe_manifest,
                   "Where to write the run manifest (default: <out_dir>/manifest.json)");
  add_common(pipe, pipe_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    json args;
    if (lex->parsed()) {
      args = {{"corpus", lex_corpus}, {"lexicon", lex_lexicon},
              {"variants", lex_variants}, {"seed", lex_flags.seed},
              {"out", lex_out}};
      if (!lex_calibrate.empty())
        args["calibrate"] = lex_calibrate;
      else
        args["p"] = lex_p;
      print_report(csforge::ops::lex_gen(args), lex_flags.format);
    } else if (emt->parsed()) {
      args = {{"corpus", emt_corpus},       {"parses", emt_parses},
              {"strategy", emt_strategy},   {"max_switches", emt_max_switches},
              {"variants", emt_variants},   {"seed", emt_flags.seed},
              {"out", emt_out}};
      if (!emt_hi.empty()) args["hi"] = emt_hi;
      if (!emt_align.empty()) args["align"] = emt_align;
      if (!emt_translations.empty()) args["translations"] = emt_translations;
      print_report(csforge::ops::emt_gen(args), emt_flags.format);
    } else if (met->parsed()) {
      args = {{"corpus", met_corpus}};
      if (!met_ne.empty()) args["ne"] = met_ne;
      if (!met_out.empty()) args["out"] = met_out;
      if (!met_hist.empty()) args["hist_csv"] = met_hist;
      print_report(csforge::ops::metrics_op(args), met_flags.format);
    } else if (bleu->parsed()) {
      args = {{"cand", bleu_cand}, {"refs", bleu_refs}};
      if (!bleu_out.empty()) args["out"] = bleu_out;
      print_report(csforge::ops::bleu_op(args), bleu_flags.format);
    } else if (sbleu->parsed()) {
      args = {{"corpus", sbleu_corpus},
              {"sample", sbleu_sample},
              {"seed", sbleu_flags.seed}};
      print_report(csforge::ops::self_bleu_op(args), sbleu_flags.format);
    } else if (div->parsed()) {
      args = {{"corpus", div_corpus}};
      if (!div_out.empty()) args["out"] = div_out;
      print_report(csforge::ops::diversity_op(args), div_flags.format);
    } else if (lmt->parsed()) {
      args = {{"corpus", lmt_corpus},     {"order", lmt_order},
              {"discount", lmt_discount}, {"min_count", lmt_min_count},
              {"out", lmt_out}};
      print_report(csforge::ops::lm_train(args), lmt_flags.format);
    } else if (lmp->parsed()) {
      args = {{"lm", lmp_lm}, {"corpus", lmp_corpus}};
      print_report(csforge::ops::lm_ppl(args), lmp_flags.format);
    } else if (tct->parsed()) {
      args = {{"config", tct_config}, {"seed", tct_flags.seed}};
      if (!tct_out.empty()) args["out"] = tct_out;
      print_report(csforge::ops::tcs_train(args), tct_flags.format);
    } else if (tcx->parsed()) {
      args = {{"ckpt", tcx_ckpt},
              {"corpus", tcx_corpus},
              {"direction", tcx_direction},
              {"seed", tcx_flags.seed},
              {"out", tcx_out}};
      if (tcx_max_len > 0) args["max_len"] = tcx_max_len;
      print_report(csforge::ops::tcs_translate(args), tcx_flags.format);
    } else if (spl->parsed()) {
      args = {{"corpus", spl_corpus}, {"train", spl_train},
              {"valid", spl_valid},   {"test", spl_test},
              {"seed", spl_flags.seed}, {"out_prefix", spl_prefix}};
      print_report(csforge::ops::split_op(args), spl_flags.format);
    } else if (pipe->parsed()) {
      auto cfg = csforge::load_pipeline(pipe_config);
      std::string manifest = pipe_manifest;
      if (manifest.empty())
        manifest = cfg.out_dir.empty() ? "manifest.json"
                                       : cfg.out_dir + "/manifest.json";
      auto result = csforge::run_pipeline(cfg, manifest);
      std::cout << "manifest: " << manifest << "\n";
      for (const auto& step : result.manifest["steps"])
        std::cout << step["name"].get<std::string>() << ": "
                  << step["status"].get<std::string>() << "\n";
      if (!result.ok) {
        for (const auto& step : result.manifest["steps"])
          if (step.contains("error"))
            std::cerr << step["error"].get<std::string>() << "\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
