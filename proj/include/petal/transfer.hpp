#pragma once

#include "petal/learner.hpp"

namespace petal {

// Shared parameters learned across all source users, plus each source user's
// own preference logits (kept for inspection, never handed to targets).
struct SourceModel {
    PolicyParams params;
    TrainTrace trace;
};

// Trains one shared {M, W, w_p} over every source user's dialogues, with a
// separate preference bundle per user. Dialogues are interleaved round-robin
// across users so no single user dominates the tail of an epoch.
SourceModel train_source_model(const Corpus& source, const PolicyParams& init,
                               const TrainConfig& config, const ChoiceIndex& choices);

// Copies the shared source parameters into a fresh target policy (source-user
// logits stay behind; target users start uniform), then adapts everything on
// the target corpus.
PolicyParams transfer_to_target(const Corpus& target, const SourceModel& source,
                                const TrainConfig& config, const ChoiceIndex& choices,
                                TrainTrace* trace_out = nullptr);

}  // namespace petal
