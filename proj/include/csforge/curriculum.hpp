#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "csforge/bleu.hpp"
#include "csforge/io.hpp"
#include "csforge/tcs.hpp"
#include "csforge/tcs_train.hpp"

namespace csforge {

enum class StageMode { SUPERVISED, UNSUPERVISED };

inline StageMode stage_mode_from_string(const std::string& s) {
  if (s == "supervised" || s == "S") return StageMode::SUPERVISED;
  if (s == "unsupervised" || s == "U") return StageMode::UNSUPERVISED;
  throw ConfigError("unknown stage mode: " + s);
}

// One entry of a training curriculum. Supervised stages optimize
// L_DAE + L_CE on parallel data, unsupervised stages L_DAE + L_BT on
// non-parallel corpora for the two sides.
struct StageConfig {
  std::string name;
  StageMode mode = StageMode::SUPERVISED;
  std::vector<std::string> parallel;
  std::vector<std::string> src_mono;
  std::vector<std::string> tgt_mono;
  std::string valid;  // name of a parallel corpus; empty = track by loss
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double lr = 1e-4;
  std::string init_from;
  LossWeights weights;
};

struct CurriculumConfig {
  TcsConfig model;
  NoiseConfig noise;
  std::map<std::string, std::string> mono_paths;
  std::map<std::string, std::string> parallel_paths;
  std::vector<StageConfig> stages;
};

inline CurriculumConfig parse_curriculum(const nlohmann::json& j) {
  CurriculumConfig cfg;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.value("preset", "") == "paper") cfg.model = TcsConfig::paper_preset();
    cfg.model.d_model = m.value("d_model", cfg.model.d_model);
    cfg.model.n_heads = m.value("n_heads", cfg.model.n_heads);
    cfg.model.d_ff = m.value("d_ff", cfg.model.d_ff);
    cfg.model.max_len = m.value("max_len", cfg.model.max_len);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    cfg.noise.p_drop = n.value("p_drop", cfg.noise.p_drop);
    cfg.noise.shuffle_window = n.value("shuffle_window", cfg.noise.shuffle_window);
    cfg.noise.seed = n.value("seed", cfg.noise.seed);
  }
  const nlohmann::json corpora = j.value("corpora", nlohmann::json::object());
  for (const auto& [name, entry] : corpora.items()) {
    const std::string type = entry.at("type").get<std::string>();
    const std::string path = entry.at("path").get<std::string>();
    if (type == "mono")
      cfg.mono_paths[name] = path;
    else if (type == "parallel")
      cfg.parallel_paths[name] = path;
    else
      throw ConfigError("corpus " + name + ": unknown type " + type);
  }
  for (const auto& s : j.value("stages", nlohmann::json::array())) {
    StageConfig sc;
    sc.name = s.at("name").get<std::string>();
    sc.mode = stage_mode_from_string(s.at("mode").get<std::string>());
    if (s.contains("parallel"))
      sc.parallel = s.at("parallel").get<std::vector<std::string>>();
    if (s.contains("src_mono"))
      sc.src_mono = s.at("src_mono").get<std::vector<std::string>>();
    if (s.contains("tgt_mono"))
      sc.tgt_mono = s.at("tgt_mono").get<std::vector<std::string>>();
    sc.valid = s.value("valid", "");
    sc.epochs = s.value("epochs", sc.epochs);
    sc.batch_size = s.value("batch_size", sc.batch_size);
    sc.lr = s.value("lr", sc.lr);
    sc.init_from = s.value("init_from", "");
    sc.weights.dae = s.value("w_dae", 1.0);
    sc.weights.bt = s.value("w_bt", 1.0);
    sc.weights.ce = s.value("w_ce", 1.0);
    cfg.stages.push_back(std::move(sc));
  }
  return cfg;
}

inline CurriculumConfig load_curriculum(const std::string& path) {
  try {
    return parse_curriculum(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Corpora resolved from disk. Everything a curriculum references is
// loaded (and thus validated) before any stage starts training.
struct CorpusRegistry {
  std::map<std::string, Corpus> mono;
  std::map<std::string, ParallelCorpus> parallel;

  static CorpusRegistry load(const CurriculumConfig& cfg) {
    CorpusRegistry reg;
    for (const auto& [name, path] : cfg.mono_paths)
      reg.mono.emplace(name, load_corpus(path));
    for (const auto& [name, path] : cfg.parallel_paths)
      reg.parallel.emplace(name, load_parallel(path));
    return reg;
  }

  const Corpus& get_mono(const std::string& name) const {
    auto it = mono.find(name);
    if (it == mono.end()) throw ConfigError("unknown mono corpus: " + name);
    return it->second;
  }

  const ParallelCorpus& get_parallel(const std::string& name) const {
    auto it = parallel.find(name);
    if (it == parallel.end())
      throw ConfigError("unknown parallel corpus: " + name);
    return it->second;
  }
};

struct StageLog {
  std::string name;
  std::vector<double> epoch_losses;
  std::vector<double> epoch_metrics;
  double best_metric = 0.0;
  std::size_t best_epoch = 0;
};

struct CurriculumResult {
  std::shared_ptr<TcsModel> model;  // best model of the last stage
  std::vector<StageLog> logs;
};

namespace detail {

inline void validate_curriculum(const CurriculumConfig& cfg,
                                const CorpusRegistry& reg) {
  std::set<std::string> seen;
  for (const auto& st : cfg.stages) {
    if (!seen.insert(st.name).second)
      throw ConfigError("duplicate stage name: " + st.name);
    if (!st.init_from.empty() && !seen.count(st.init_from))
      throw ConfigError("stage " + st.name + ": init_from '" + st.init_from +
                        "' is not an earlier stage");
    if (st.mode == StageMode::SUPERVISED) {
      if (st.parallel.empty())
        throw ConfigError("supervised stage " + st.name +
                          " needs parallel data");
      for (const auto& n : st.parallel) reg.get_parallel(n);
    } else {
      if (st.src_mono.empty() || st.tgt_mono.empty())
        throw ConfigError("unsupervised stage " + st.name +
                          " needs src and tgt monolingual corpora");
      for (const auto& n : st.src_mono) reg.get_mono(n);
      for (const auto& n : st.tgt_mono) reg.get_mono(n);
    }
    if (!st.valid.empty()) reg.get_parallel(st.valid);
    if (st.epochs == 0 || st.batch_size == 0)
      throw ConfigError("stage " + st.name + ": epochs and batch_size must be positive");
  }
  if (cfg.stages.empty()) throw ConfigError("curriculum has no stages");
}

// Vocabulary from the union of every referenced corpus, as the paper's
// appendix builds it from the combined train sets.
inline Vocab build_vocab(const CorpusRegistry& reg) {
  std::vector<std::string> words;
  for (const auto& [name, c] : reg.mono)
    for (const auto& s : c.sentences)
      for (const auto& t : s.tokens) words.push_back(t.surface);
  for (const auto& [name, pc] : reg.parallel)
    for (const auto& [src, tgt] : pc.pairs) {
      for (const auto& t : src.tokens) words.push_back(t.surface);
      for (const auto& t : tgt.tokens) words.push_back(t.surface);
    }
  return Vocab::from_words(std::move(words));
}

// Validation metric: supervised stages by (src -> tgt) BLEU, unsupervised
// stages by target-side round-trip reconstruction BLEU.
inline double stage_metric(TcsModel& model, const ParallelCorpus& valid,
                           StageMode mode) {
  Corpus cand, refs;
  const std::size_t max_len = model.config().max_len;
  std::size_t n = 0;
  for (const auto& [src, tgt] : valid.pairs) {
    const std::string id = "v" + std::to_string(n++);
    if (mode == StageMode::SUPERVISED) {
      auto out = model.translate(src, Direction::SRC2TGT, max_len);
      out.id = id;
      cand.sentences.push_back(std::move(out));
      auto ref = tgt;
      ref.id = id;
      refs.sentences.push_back(std::move(ref));
    } else {
      auto to_src = model.translate(tgt, Direction::TGT2SRC, max_len);
      auto back = model.translate(to_src, Direction::SRC2TGT, max_len);
      back.id = id;
      cand.sentences.push_back(std::move(back));
      auto ref = tgt;
      ref.id = id;
      refs.sentences.push_back(std::move(ref));
    }
  }
  return corpus_bleu(cand, std::vector<Corpus>{refs}).score;
}

}  // namespace detail

// Executes the stages in order. Each stage starts from its init_from
// stage's best parameters (fresh seeded init otherwise), trains with its
// own optimizer, and keeps the epoch snapshot that maximizes the stage
// metric. Logs and best checkpoints land in out_dir when it is nonempty.
inline CurriculumResult run_curriculum(const CurriculumConfig& cfg,
                                       const CorpusRegistry& reg,
                                       std::uint64_t seed,
                                       const std::string& out_dir = "") {
  detail::validate_curriculum(cfg, reg);
  Vocab vocab = detail::build_vocab(reg);

  CurriculumResult result;
  std::map<std::string, std::vector<Matrix>> best_snapshots;
  auto model = std::make_shared<TcsModel>(cfg.model, vocab, seed);

  for (std::size_t si = 0; si < cfg.stages.size(); ++si) {
    const StageConfig& st = cfg.stages[si];
    // Starting point: chained stage or a fresh seeded init.
    if (!st.init_from.empty()) {
      model = std::make_shared<TcsModel>(cfg.model, vocab, seed);
      model->restore(best_snapshots.at(st.init_from));
    } else {
      model = std::make_shared<TcsModel>(cfg.model, vocab,
                                         mix_u64(seed, si));
    }

    NoiseConfig noise = cfg.noise;
    noise.seed = mix_u64(noise.seed, mix_u64(seed, si));
    TcsTrainer trainer(*model, st.lr, noise, st.weights);
    Rng order_rng(mix_u64(seed, fnv1a(st.name)));

    StageLog log;
    log.name = st.name;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<Matrix> best_params = model->snapshot();

    for (std::size_t epoch = 0; epoch < st.epochs; ++epoch) {
      double epoch_loss = 0.0;
      std::size_t n_steps = 0;

      if (st.mode == StageMode::SUPERVISED) {
        std::vector<std::pair<TaggedSentence, TaggedSentence>> pairs;
        for (const auto& name : st.parallel) {
          const auto& pc = reg.get_parallel(name);
          pairs.insert(pairs.end(), pc.pairs.begin(), pc.pairs.end());
        }
        order_rng.shuffle(pairs);
        for (std::size_t at = 0; at < pairs.size(); at += st.batch_size) {
          const std::size_t len = std::min(st.batch_size, pairs.size() - at);
          std::span<const std::pair<TaggedSentence, TaggedSentence>> batch(
              pairs.data() + at, len);
          epoch_loss += trainer.supervised_step(batch).total;
          ++n_steps;
        }
      } else {
        std::vector<TaggedSentence> src, tgt;
        for (const auto& name : st.src_mono) {
          const auto& c = reg.get_mono(name);
          src.insert(src.end(), c.sentences.begin(), c.sentences.end());
        }
        for (const auto& name : st.tgt_mono) {
          const auto& c = reg.get_mono(name);
          tgt.insert(tgt.end(), c.sentences.begin(), c.sentences.end());
        }
        order_rng.shuffle(src);
        order_rng.shuffle(tgt);
        const std::size_t n_batches =
            (std::max(src.size(), tgt.size()) + st.batch_size - 1) /
            st.batch_size;
        for (std::size_t b = 0; b < n_batches; ++b) {
          auto slice = [&](const std::vector<TaggedSentence>& v) {
            const std::size_t start = (b * st.batch_size) % v.size();
            const std::size_t len = std::min(st.batch_size, v.size() - start);
            return std::span<const TaggedSentence>(v.data() + start, len);
          };
          epoch_loss += trainer.unsupervised_step(slice(src), slice(tgt)).total;
          ++n_steps;
        }
      }

      epoch_loss /= static_cast<double>(std::max<std::size_t>(1, n_steps));
      log.epoch_losses.push_back(epoch_loss);

      double metric;
      if (!st.valid.empty())
        metric = detail::stage_metric(*model, reg.get_parallel(st.valid),
                                      st.mode);
      else
        metric = -epoch_loss;  // no validation set: lowest loss wins
      log.epoch_metrics.push_back(metric);
      if (metric > best) {
        best = metric;
        best_params = model->snapshot();
        log.best_epoch = epoch;
      }
    }

    log.best_metric = best;
    model->restore(best_params);
    best_snapshots[st.name] = std::move(best_params);
    result.logs.push_back(std::move(log));

    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      model->save(out_dir + "/" + st.name + ".ckpt");
    }
  }

  if (!out_dir.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& log : result.logs) {
      nlohmann::json e;
      e["stage"] = log.name;
      e["epoch_losses"] = log.epoch_losses;
      e["epoch_metrics"] = log.epoch_metrics;
      e["best_metric"] = log.best_metric;
      e["best_epoch"] = log.best_epoch;
      j.push_back(std::move(e));
    }
    atomic_write(out_dir + "/curriculum_log.json", j.dump(2) + "\n");
  }

  result.model = model;
  return result;
}

// Fig-3-style ablation: rerun a one-stage supervised curriculum with the
// first N parallel pairs for each N in counts, reporting validation BLEU.
inline std::vector<std::pair<std::size_t, double>> parallel_ablation_sweep(
    const CurriculumConfig& cfg, const CorpusRegistry& reg,
    const std::string& stage_name, const std::vector<std::size_t>& counts,
    std::uint64_t seed) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t n : counts) {
    CorpusRegistry sliced = reg;
    const StageConfig* stage = nullptr;
    for (const auto& st : cfg.stages)
      if (st.name == stage_name) stage = &st;
    if (!stage) throw ConfigError("unknown stage: " + stage_name);
    for (const auto& name : stage->parallel) {
      auto& pc = sliced.parallel.at(name);
      if (pc.pairs.size() > n) pc.pairs.resize(n);
    }
    auto result = run_curriculum(cfg, sliced, seed);
    double metric = 0.0;
    for (const auto& log : result.logs)
      if (log.name == stage_name) metric = log.best_metric;
    out.emplace_back(n, metric);
  }
  return out;
}

}  // namespace csforge
