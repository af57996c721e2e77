#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csforge/tcs.hpp"

namespace csforge {

// One teacher-forced translation task inside a loss graph.
struct SeqTask {
  std::vector<std::size_t> src;
  std::vector<std::size_t> tgt;
  Side enc_side;
  Side dec_side;
};

// Tasks whose NLLs are pooled into a single token-averaged term. The full
// loss is the weighted sum of group terms, e.g. L_DAE(src) + L_DAE(tgt) +
// L_CE(src->tgt) + L_CE(tgt->src) for a supervised step.
struct TaskGroup {
  std::vector<SeqTask> tasks;
  double weight = 1.0;
};

// Forward-only loss evaluation; no gradients, no update. This is the
// function the finite-difference checks probe.
inline double task_loss(TcsModel& model, std::span<const TaskGroup> groups) {
  Tape tape;
  ParamBinder bind(tape, /*frozen=*/true);
  double total = 0.0;
  for (const auto& g : groups) {
    double nll = 0.0;
    std::size_t tokens = 0;
    for (const auto& t : g.tasks) {
      auto sl = model.seq2seq_nll(tape, bind, t.src, t.tgt, t.enc_side,
                                  t.dec_side);
      nll += sl.nll_sum->value(0, 0);
      tokens += sl.n_tokens;
    }
    if (tokens > 0) total += g.weight * nll / static_cast<double>(tokens);
  }
  return total;
}

// Builds the loss graph, back-propagates, and hands out the parameter
// gradients without touching parameter values.
inline double task_loss_grads(TcsModel& model,
                              std::span<const TaskGroup> groups,
                              std::unordered_map<Param*, Matrix>& grads_out) {
  Tape tape;
  ParamBinder bind(tape);
  NodePtr total;
  for (const auto& g : groups) {
    NodePtr group_sum;
    std::size_t tokens = 0;
    for (const auto& t : g.tasks) {
      auto sl = model.seq2seq_nll(tape, bind, t.src, t.tgt, t.enc_side,
                                  t.dec_side);
      group_sum = group_sum ? nn::add(tape, group_sum, sl.nll_sum)
                            : sl.nll_sum;
      tokens += sl.n_tokens;
    }
    if (!group_sum || tokens == 0) continue;
    NodePtr term = nn::scale(tape, group_sum,
                             g.weight / static_cast<double>(tokens));
    total = total ? nn::add(tape, total, term) : term;
  }
  if (!total) throw ConfigError("task_loss_grads: no tasks");
  tape.backward(total);
  for (Param* p : bind.bound_params()) grads_out[p] = bind.grad_of(*p);
  return total->value(0, 0);
}

// Per-loss weights; unit weights by default on every active loss.
struct LossWeights {
  double dae = 1.0;
  double bt = 1.0;
  double ce = 1.0;
};

struct StepLosses {
  double dae = 0.0;
  double bt = 0.0;
  double ce = 0.0;
  double total = 0.0;
};

// Drives optimizer steps over a TcsModel. Supervised steps optimize
// L_DAE + L_CE, unsupervised steps L_DAE + L_BT; the single-objective
// entry points exist on their own as well.
class TcsTrainer {
public:
  TcsTrainer(TcsModel& model, double lr, NoiseConfig noise,
             LossWeights weights = {})
      : model_(model), opt_(lr), noise_(noise), weights_(weights) {}

  nn::Adam& optimizer() { return opt_; }
  void set_learning_rate(double lr) { opt_.set_learning_rate(lr); }

  // L_DAE on one side: reconstruct each clean sentence from its noised
  // version through that side's own encoder/decoder path.
  double dae_step(std::span<const TaggedSentence> batch, Side side) {
    auto groups = dae_groups(batch, side);
    return apply(groups).total;
  }

  // L_CE: teacher-forced NLL in both directions through the shared layers.
  double ce_step(std::span<const std::pair<TaggedSentence, TaggedSentence>> pairs) {
    auto groups = ce_groups(pairs);
    return apply(groups).total;
  }

  // L_BT: translate the opposite batch with the current frozen model to
  // form pseudo-sources, then one supervised step on the pseudo-pairs in
  // both directions. Pseudo-pairs are regenerated on every call.
  double bt_step(std::span<const TaggedSentence> src_batch,
                 std::span<const TaggedSentence> tgt_batch) {
    auto groups = bt_groups(src_batch, tgt_batch);
    return apply(groups).total;
  }

  // Joint objective for supervised curriculum phases: L_DAE + L_CE.
  StepLosses supervised_step(
      std::span<const std::pair<TaggedSentence, TaggedSentence>> pairs) {
    std::vector<TaggedSentence> src, tgt;
    for (const auto& [s, t] : pairs) {
      src.push_back(s);
      tgt.push_back(t);
    }
    std::vector<TaskGroup> groups;
    append(groups, dae_groups(src, Side::SRC));
    append(groups, dae_groups(tgt, Side::TGT));
    const std::size_t n_dae = groups.size();
    append(groups, ce_groups(pairs));
    return apply_split(groups, n_dae, /*bt=*/false);
  }

  // Joint objective for unsupervised curriculum phases: L_DAE + L_BT.
  StepLosses unsupervised_step(std::span<const TaggedSentence> src_batch,
                               std::span<const TaggedSentence> tgt_batch) {
    std::vector<TaskGroup> groups;
    append(groups, dae_groups(src_batch, Side::SRC));
    append(groups, dae_groups(tgt_batch, Side::TGT));
    const std::size_t n_dae = groups.size();
    append(groups, bt_groups(src_batch, tgt_batch));
    return apply_split(groups, n_dae, /*bt=*/true);
  }

  // ---- Group builders (public so tests can freeze inputs and probe) ----

  std::vector<TaskGroup> dae_groups(std::span<const TaggedSentence> batch,
                                    Side side) {
    NoiseConfig cfg = noise_;
    cfg.seed = mix_u64(noise_.seed, round_++);
    TaskGroup g;
    g.weight = weights_.dae;
    for (const auto& s : batch) {
      auto noised = noise(s, cfg);
      SeqTask t;
      t.src = model_.vocab().encode(noised, model_.config().max_len);
      t.tgt = model_.vocab().encode(s, model_.config().max_len);
      if (t.src.empty() || t.tgt.empty()) continue;
      t.enc_side = side;
      t.dec_side = side;
      g.tasks.push_back(std::move(t));
    }
    std::vector<TaskGroup> out;
    if (!g.tasks.empty()) out.push_back(std::move(g));
    return out;
  }

  std::vector<TaskGroup> ce_groups(
      std::span<const std::pair<TaggedSentence, TaggedSentence>> pairs) {
    TaskGroup s2t, t2s;
    s2t.weight = t2s.weight = weights_.ce;
    for (const auto& [src, tgt] : pairs) {
      auto src_ids = model_.vocab().encode(src, model_.config().max_len);
      auto tgt_ids = model_.vocab().encode(tgt, model_.config().max_len);
      if (src_ids.empty() || tgt_ids.empty()) continue;
      s2t.tasks.push_back({src_ids, tgt_ids, Side::SRC, Side::TGT});
      t2s.tasks.push_back({tgt_ids, src_ids, Side::TGT, Side::SRC});
    }
    std::vector<TaskGroup> out;
    if (!s2t.tasks.empty()) out.push_back(std::move(s2t));
    if (!t2s.tasks.empty()) out.push_back(std::move(t2s));
    return out;
  }

  std::vector<TaskGroup> bt_groups(std::span<const TaggedSentence> src_batch,
                                   std::span<const TaggedSentence> tgt_batch) {
    const auto max_len = model_.config().max_len;
    TaskGroup to_tgt, to_src;
    to_tgt.weight = to_src.weight = weights_.bt;
    // Pseudo-source for each target sentence via the frozen model.
    for (const auto& t : tgt_batch) {
      auto tgt_ids = model_.vocab().encode(t, max_len);
      if (tgt_ids.empty()) continue;
      auto pseudo = model_.greedy_decode(tgt_ids, Side::TGT, Side::SRC,
                                         tgt_ids.size() + 3);
      ++model_.stats().bt_decodes;
      if (pseudo.empty()) pseudo.push_back(Vocab::kUnkId);
      to_tgt.tasks.push_back({pseudo, tgt_ids, Side::SRC, Side::TGT});
    }
    for (const auto& s : src_batch) {
      auto src_ids = model_.vocab().encode(s, max_len);
      if (src_ids.empty()) continue;
      auto pseudo = model_.greedy_decode(src_ids, Side::SRC, Side::TGT,
                                         src_ids.size() + 3);
      ++model_.stats().bt_decodes;
      if (pseudo.empty()) pseudo.push_back(Vocab::kUnkId);
      to_src.tasks.push_back({pseudo, src_ids, Side::TGT, Side::SRC});
    }
    std::vector<TaskGroup> out;
    if (!to_tgt.tasks.empty()) out.push_back(std::move(to_tgt));
    if (!to_src.tasks.empty()) out.push_back(std::move(to_src));
    return out;
  }

  // One optimizer step over prepared groups; returns the total loss.
  StepLosses apply(std::span<const TaskGroup> groups) {
    return apply_split(groups, groups.size(), false);
  }

private:
  static void append(std::vector<TaskGroup>& into, std::vector<TaskGroup> from) {
    for (auto& g : from) into.push_back(std::move(g));
  }

  // Groups [0, n_first) are reported as DAE, the rest as BT or CE.
  StepLosses apply_split(std::span<const TaskGroup> groups,
                         std::size_t n_first, bool bt) {
    StepLosses out;
    if (groups.empty()) return out;
    Tape tape;
    ParamBinder bind(tape);
    NodePtr total;
    std::size_t gi = 0;
    for (const auto& g : groups) {
      NodePtr group_sum;
      std::size_t tokens = 0;
      for (const auto& t : g.tasks) {
        auto sl = model_.seq2seq_nll(tape, bind, t.src, t.tgt, t.enc_side,
                                     t.dec_side);
        group_sum =
            group_sum ? nn::add(tape, group_sum, sl.nll_sum) : sl.nll_sum;
        tokens += sl.n_tokens;
      }
      if (group_sum && tokens > 0) {
        NodePtr term = nn::scale(tape, group_sum,
                                 g.weight / static_cast<double>(tokens));
        const double val = term->value(0, 0);
        if (gi < n_first)
          out.dae += val;
        else if (bt)
          out.bt += val;
        else
          out.ce += val;
        total = total ? nn::add(tape, total, term) : term;
      }
      ++gi;
    }
    if (!total) return out;
    tape.backward(total);
    opt_.step(bind);
    out.total = total->value(0, 0);
    return out;
  }

  TcsModel& model_;
  nn::Adam opt_;
  NoiseConfig noise_;
  LossWeights weights_;
  std::uint64_t round_ = 0;
};

}  // namespace csforge
