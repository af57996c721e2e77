#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <set>

#include "csforge/tcs.hpp"
#include "csforge/tcs_train.hpp"

using namespace csforge;

namespace {

TaggedSentence sent(const std::string& id, const std::vector<std::string>& toks) {
  TaggedSentence s;
  s.id = id;
  for (const auto& t : toks) s.tokens.push_back({t, tag_language(t)});
  return s;
}

Vocab toy_vocab() {
  std::vector<std::string> words;
  for (int i = 0; i < 8; ++i) {
    words.push_back("h" + std::to_string(i));
    words.push_back("e" + std::to_string(i));
  }
  return Vocab::from_words(words);
}

TcsConfig tiny_config() {
  TcsConfig cfg;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.d_ff = 16;
  cfg.max_len = 16;
  return cfg;
}

// Central finite differences over every parameter entry of the model.
void full_gradient_check(TcsModel& model,
                         const std::vector<TaskGroup>& groups,
                         const std::set<std::string>& active_partitions) {
  std::unordered_map<Param*, Matrix> grads;
  task_loss_grads(model, groups, grads);

  const double h = 1e-6;
  std::size_t checked = 0;
  model.for_each_param([&](Param& p) {
    const bool active = active_partitions.count(p.partition) > 0;
    if (!active) {
      // Inactive partitions must not appear in the gradient map at all.
      REQUIRE(grads.find(&p) == grads.end());
      return;
    }
    REQUIRE(grads.count(&p) == 1);
    const Matrix& g = grads[&p];
    for (Eigen::Index i = 0; i < p.value.rows(); ++i)
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        const double orig = p.value(i, j);
        p.value(i, j) = orig + h;
        const double lp = task_loss(model, groups);
        p.value(i, j) = orig - h;
        const double lm = task_loss(model, groups);
        p.value(i, j) = orig;
        const double fd = (lp - lm) / (2.0 * h);
        const double an = g(i, j);
        const double denom = std::max(std::abs(fd), std::abs(an));
        ++checked;
        INFO(p.name << "(" << i << "," << j << "): analytic " << an
                    << " vs fd " << fd);
        if (denom < 1e-5) {
          // Below the measurable scale the finite difference itself is
          // dominated by cancellation noise; bound the gap absolutely,
          // still an order above the ~4e-10 noise floor.
          REQUIRE(std::abs(fd - an) < 1e-9);
        } else {
          REQUIRE(std::abs(fd - an) / denom < 1e-4);
        }
      }
  });
  REQUIRE(checked > 0);
}

}  // namespace

TEST_CASE("noise identity when p_drop and window are zero") {
  auto s = sent("n0", {"h0", "h1", "h2", "h3"});
  NoiseConfig cfg{0.0, 0, 42};
  REQUIRE(noise(s, cfg).tokens == s.tokens);
}

TEST_CASE("noise displacement never exceeds the window") {
  for (std::size_t window : {1u, 2u, 3u, 5u}) {
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
      std::vector<std::string> toks;
      for (int i = 0; i < 12; ++i) toks.push_back("t" + std::to_string(i));
      auto s = sent("d" + std::to_string(seed), toks);
      NoiseConfig cfg{0.0, window, seed};
      auto out = noise(s, cfg);
      REQUIRE(out.tokens.size() == toks.size());
      for (std::size_t new_idx = 0; new_idx < out.tokens.size(); ++new_idx) {
        const auto& surf = out.tokens[new_idx].surface;
        const auto old_idx = static_cast<std::size_t>(
            std::stoi(surf.substr(1)));
        const auto diff = new_idx > old_idx ? new_idx - old_idx
                                            : old_idx - new_idx;
        INFO("window " << window << " seed " << seed);
        REQUIRE(diff <= window);
      }
    }
  }
}

TEST_CASE("noise drop rate is calibrated") {
  std::size_t in_tokens = 0, out_tokens = 0;
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> toks;
    for (int k = 0; k < 50; ++k) toks.push_back("t" + std::to_string(k));
    auto s = sent("m" + std::to_string(i), toks);
    NoiseConfig cfg{0.1, 3, static_cast<std::uint64_t>(i)};
    auto out = noise(s, cfg);
    in_tokens += s.size();
    out_tokens += out.size();
  }
  REQUIRE(in_tokens == 100000);
  const double drop_rate = 1.0 - double(out_tokens) / double(in_tokens);
  REQUIRE(drop_rate > 0.09);
  REQUIRE(drop_rate < 0.11);
}

TEST_CASE("noise keeps one survivor when everything would drop") {
  auto s = sent("k0", {"a", "b", "c"});
  NoiseConfig cfg{0.999999, 2, 5};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    auto out = noise(s, cfg);
    REQUIRE(out.size() >= 1);
  }
}

TEST_CASE("noise is deterministic given the seed") {
  auto s = sent("det", {"a", "b", "c", "d", "e", "f"});
  NoiseConfig cfg{0.3, 2, 99};
  REQUIRE(noise(s, cfg).tokens == noise(s, cfg).tokens);
}

TEST_CASE("output distributions are normalized") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 7);
  Tape tape;
  ParamBinder bind(tape, true);
  std::vector<std::size_t> src{vocab.id("h0"), vocab.id("h1"), vocab.id("h2")};
  auto memory = model.encode(tape, bind, src, Side::SRC);
  std::vector<std::size_t> tgt_in{Vocab::kBosId, vocab.id("e0"), vocab.id("e1")};
  auto logits = model.decode_logits(tape, bind, memory, tgt_in, Side::TGT);
  auto probs = nn::softmax_rows(tape, logits);
  for (Eigen::Index r = 0; r < probs->value.rows(); ++r)
    REQUIRE(probs->value.row(r).sum() == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("DAE loss gradients match finite differences (both sides)") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 11);
  TcsTrainer trainer(model, 1e-3, NoiseConfig{0.2, 2, 31});

  std::vector<TaggedSentence> batch{
      sent("g0", {"h0", "h1", "h2", "h3", "h4"}),
      sent("g1", {"h2", "h0", "h5"}),
  };
  auto src_groups = trainer.dae_groups(batch, Side::SRC);
  REQUIRE(src_groups.size() == 1);
  full_gradient_check(model, src_groups,
                      {"embed", "enc_p0", "enc_sh", "dec_sh", "dec_p0"});

  std::vector<TaggedSentence> tgt_batch{
      sent("g2", {"e0", "e1", "e2", "e3"}),
      sent("g3", {"e3", "e4"}),
  };
  auto tgt_groups = trainer.dae_groups(tgt_batch, Side::TGT);
  full_gradient_check(model, tgt_groups,
                      {"embed", "enc_p1", "enc_sh", "dec_sh", "dec_p1"});
}

TEST_CASE("CE loss gradients match finite differences") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 13);
  TcsTrainer trainer(model, 1e-3, NoiseConfig{0.0, 0, 1});
  std::vector<std::pair<TaggedSentence, TaggedSentence>> pairs{
      {sent("p0", {"h0", "h1", "h2"}), sent("p0t", {"e0", "e1", "e2"})},
      {sent("p1", {"h3", "h4"}), sent("p1t", {"e3", "e4"})},
  };
  auto groups = trainer.ce_groups(pairs);
  REQUIRE(groups.size() == 2);
  full_gradient_check(model, groups,
                      {"embed", "enc_p0", "enc_p1", "enc_sh", "dec_sh",
                       "dec_p0", "dec_p1"});
}

TEST_CASE("BT supervised-step gradients match finite differences") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 17);
  TcsTrainer trainer(model, 1e-3, NoiseConfig{0.0, 0, 1});
  std::vector<TaggedSentence> src{sent("b0", {"h0", "h1", "h2"})};
  std::vector<TaggedSentence> tgt{sent("b1", {"e0", "e1", "e2"})};
  // Pseudo-pairs frozen inside the returned groups; the check probes the
  // supervised step on them.
  auto groups = trainer.bt_groups(src, tgt);
  REQUIRE(groups.size() == 2);
  full_gradient_check(model, groups,
                      {"embed", "enc_p0", "enc_p1", "enc_sh", "dec_sh",
                       "dec_p0", "dec_p1"});
}

TEST_CASE("SRC-side DAE step leaves p1 partitions bitwise unchanged") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 19);
  auto parts = model.partitions();
  REQUIRE(parts.size() == 7);

  auto partition_bytes = [&](const std::string& name) {
    std::string bytes;
    for (Param* p : parts.at(name))
      bytes.append(reinterpret_cast<const char*>(p->value.data()),
                   sizeof(double) * p->value.size());
    return bytes;
  };

  std::map<std::string, std::string> before;
  for (const auto& [name, ps] : parts) before[name] = partition_bytes(name);

  TcsTrainer trainer(model, 1e-3, NoiseConfig{0.1, 2, 7});
  std::vector<TaggedSentence> batch{sent("i0", {"h0", "h1", "h2", "h3"})};
  trainer.dae_step(batch, Side::SRC);

  for (const std::string untouched : {"enc_p1", "dec_p1"})
    REQUIRE(partition_bytes(untouched) == before[untouched]);
  for (const std::string touched :
       {"embed", "enc_p0", "enc_sh", "dec_sh", "dec_p0"})
    REQUIRE(partition_bytes(touched) != before[touched]);

  // Symmetric: a TGT-side step must not move p0 layers.
  std::map<std::string, std::string> mid;
  for (const auto& [name, ps] : parts) mid[name] = partition_bytes(name);
  std::vector<TaggedSentence> tgt_batch{sent("i1", {"e0", "e1", "e2", "e3"})};
  trainer.dae_step(tgt_batch, Side::TGT);
  for (const std::string untouched : {"enc_p0", "dec_p0"})
    REQUIRE(partition_bytes(untouched) == mid[untouched]);
  for (const std::string touched :
       {"embed", "enc_p1", "enc_sh", "dec_sh", "dec_p1"})
    REQUIRE(partition_bytes(touched) != mid[touched]);
}

TEST_CASE("every parameter belongs to exactly one partition") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 23);
  const std::set<std::string> expected{"embed",  "enc_p0", "enc_p1", "enc_sh",
                                       "dec_sh", "dec_p0", "dec_p1"};
  std::set<std::string> seen_names;
  model.for_each_param([&](Param& p) {
    REQUIRE(expected.count(p.partition) == 1);
    REQUIRE(seen_names.insert(p.name).second);
  });
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
  auto vocab = toy_vocab();
  std::vector<std::pair<TaggedSentence, TaggedSentence>> pairs{
      {sent("p0", {"h0", "h1", "h2"}), sent("p0t", {"e0", "e1", "e2"})},
      {sent("p1", {"h3", "h4", "h5"}), sent("p1t", {"e3", "e4", "e5"})},
  };
  auto run = [&]() {
    TcsModel model(tiny_config(), vocab, 29);
    TcsTrainer trainer(model, 1e-3, NoiseConfig{0.1, 2, 3});
    std::vector<double> losses;
    for (int step = 0; step < 5; ++step)
      losses.push_back(trainer.supervised_step(pairs).total);
    return losses;
  };
  auto a = run();
  auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(std::memcmp(&a[i], &b[i], sizeof(double)) == 0);
  }
}

TEST_CASE("losses are finite and positive at random init") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 31);
  TcsTrainer trainer(model, 1e-3, NoiseConfig{0.1, 2, 3});
  std::vector<TaggedSentence> batch{sent("f0", {"h0", "h1", "h2"})};
  const double dae = trainer.dae_step(batch, Side::SRC);
  REQUIRE(std::isfinite(dae));
  REQUIRE(dae > 0.0);

  std::vector<TaggedSentence> tgt{sent("f1", {"e0", "e1"})};
  const double bt = trainer.bt_step(batch, tgt);
  REQUIRE(std::isfinite(bt));
  REQUIRE(bt > 0.0);
}

TEST_CASE("ce_step overfits a copy task") {
  auto vocab = toy_vocab();
  TcsConfig cfg = tiny_config();
  cfg.d_model = 16;
  cfg.d_ff = 32;
  TcsModel model(cfg, vocab, 37);
  TcsTrainer trainer(model, 3e-3, NoiseConfig{0.0, 0, 1});
  std::vector<std::pair<TaggedSentence, TaggedSentence>> pairs{
      {sent("c0", {"h0", "h1", "h2", "h3"}), sent("c0t", {"h0", "h1", "h2", "h3"})},
  };
  double loss = 1e9;
  for (int step = 0; step < 400 && loss > 0.01; ++step)
    loss = trainer.ce_step(pairs) / 2.0;  // two directions summed
  REQUIRE(loss < 0.01);
}

TEST_CASE("bt_step regenerates pseudo-pairs every step") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 41);
  TcsTrainer trainer(model, 1e-3, NoiseConfig{0.0, 0, 1});
  std::vector<TaggedSentence> src{sent("r0", {"h0", "h1"}),
                                  sent("r1", {"h2", "h3"})};
  std::vector<TaggedSentence> tgt{sent("r2", {"e0", "e1"})};
  REQUIRE(model.stats().bt_decodes == 0);
  trainer.bt_step(src, tgt);
  REQUIRE(model.stats().bt_decodes == 3);
  trainer.bt_step(src, tgt);
  REQUIRE(model.stats().bt_decodes == 6);
}

TEST_CASE("translate respects max_len and retags output") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 43);
  auto s = sent("t0", {"h0", "h1", "h2"});
  auto out = model.translate(s, Direction::SRC2TGT, 5);
  REQUIRE(out.size() >= 1);
  REQUIRE(out.size() <= 5);
  REQUIRE(out.source == Source::TCS);
  for (const auto& t : out.tokens)
    REQUIRE(t.lang == tag_language(t.surface));
}

TEST_CASE("checkpoint round-trip preserves parameters and behavior") {
  auto vocab = toy_vocab();
  TcsModel model(tiny_config(), vocab, 47);
  // Move off the init point so the file carries trained state.
  TcsTrainer trainer(model, 1e-3, NoiseConfig{0.1, 2, 3});
  std::vector<TaggedSentence> batch{sent("s0", {"h0", "h1", "h2"})};
  trainer.dae_step(batch, Side::SRC);

  auto path = std::filesystem::temp_directory_path() / "csforge_tcs.ckpt";
  model.save(path.string());
  auto back = TcsModel::load(path.string());

  REQUIRE(back.config().d_model == model.config().d_model);
  REQUIRE(back.vocab().size() == model.vocab().size());

  std::vector<Param*> orig_params, back_params;
  model.for_each_param([&](Param& p) { orig_params.push_back(&p); });
  back.for_each_param([&](Param& p) { back_params.push_back(&p); });
  REQUIRE(orig_params.size() == back_params.size());
  for (std::size_t i = 0; i < orig_params.size(); ++i) {
    REQUIRE(orig_params[i]->name == back_params[i]->name);
    REQUIRE(orig_params[i]->partition == back_params[i]->partition);
    REQUIRE(orig_params[i]->value == back_params[i]->value);
  }

  auto s = sent("t0", {"h0", "h1", "h2", "h3"});
  REQUIRE(model.translate(s, Direction::SRC2TGT, 8).tokens ==
          back.translate(s, Direction::SRC2TGT, 8).tokens);
  std::filesystem::remove(path);

  REQUIRE_THROWS_AS(TcsModel::load("/nonexistent/x.ckpt"), IoError);
}

TEST_CASE("vocab maps unknown surfaces to unk") {
  auto vocab = toy_vocab();
  REQUIRE(vocab.id("h0") != Vocab::kUnkId);
  REQUIRE(vocab.id("never-seen") == Vocab::kUnkId);
  auto s = sent("v0", {"h0", "zzz"});
  auto ids = vocab.encode(s, 10);
  REQUIRE(ids.size() == 2);
  REQUIRE(ids[1] == Vocab::kUnkId);
}
