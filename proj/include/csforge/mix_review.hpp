#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "csforge/error.hpp"
#include "csforge/rng.hpp"

namespace csforge {

// Mix-review: pretraining batches decay exponentially across epochs while
// the finetuning batches stay constant.
struct MixReviewSchedule {
  double decay = 0.9;
  std::size_t pretrain_size = 0;
  std::size_t finetune_size = 0;

  void validate() const {
    if (!(decay > 0.0 && decay <= 1.0))
      throw ConfigError("mix-review decay must lie in (0,1]");
  }
};

// Fraction of pretraining batches still in play at the given epoch:
// decay^epoch, so 1 at epoch 0. Computed by iterated multiplication, one
// factor per elapsed epoch.
inline double mix_review_fraction(const MixReviewSchedule& sched,
                                  std::size_t epoch) {
  sched.validate();
  double f = 1.0;
  for (std::size_t i = 0; i < epoch; ++i) f *= sched.decay;
  return f;
}

struct MixReviewBatches {
  std::vector<std::size_t> pretrain;
  std::vector<std::size_t> finetune;
};

// All finetune batch indices plus a seeded without-replacement sample of
// ceil(fraction * pretrain_size) pretraining batch indices. Ceiling keeps
// a nonzero pretraining presence until the fraction itself hits zero.
inline MixReviewBatches mix_review_batches(const MixReviewSchedule& sched,
                                           std::size_t epoch,
                                           std::uint64_t seed) {
  const double fraction = mix_review_fraction(sched, epoch);
  // Guarded ceiling: 0.9^3 * 1000 must give 729, not 730, despite the
  // product landing an ulp above the integer.
  const double raw = fraction * static_cast<double>(sched.pretrain_size);
  const auto n_pre =
      static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9)));
  MixReviewBatches out;
  Rng rng(mix_u64(seed, epoch));
  out.pretrain = rng.sample_indices(sched.pretrain_size, n_pre);
  out.finetune.resize(sched.finetune_size);
  for (std::size_t i = 0; i < sched.finetune_size; ++i) out.finetune[i] = i;
  return out;
}

}  // namespace csforge
