#pragma once

#include <functional>
#include <vector>

#include "kai0/env.hpp"
#include "kai0/episode.hpp"
#include "kai0/rng.hpp"

namespace kai0 {

/// Chunk-emitting policy under rollout. The callable sees the true env state
/// and must do its own observation building (noise, stage masking).
using ChunkPolicy = std::function<ActionChunk(const EnvState&, Rng&)>;

/// Closed-loop scripted-expert rollouts. Only successful episodes are kept;
/// each slot retries with a fresh seed up to 10 times before the whole
/// generation fails. One Rng stream per slot, so generation is
/// order-independent.
std::vector<Episode> generate_expert_dataset(const EnvConfig& cfg,
                                             int n_episodes, Rng& rng,
                                             double noise_sigma = 0.005);

enum class FailureKind { kOvershoot, kWrongBasin, kStalledOffset };

/// Designed failure state for the given kind: the stage is drawn uniformly,
/// the position lies in the kind's failure region for that stage.
EnvState sample_failure_state(FailureKind kind, const EnvConfig& cfg,
                              Rng& rng);

/// Recovery demonstrations started directly in designed failure states
/// (no policy rollout needed). Kinds are sampled uniformly per episode.
std::vector<Episode> heuristic_dagger_dataset(
    const EnvConfig& cfg, int n_episodes,
    const std::vector<FailureKind>& kinds, Rng& rng,
    double noise_sigma = 0.005);

struct DaggerOptions {
  int chunk_len = 50;
  int stall_window = 500;         // ticks; default 10 chunks' worth
  double expert_noise_sigma = 0.005;
};

/// Rolls the policy closed-loop (full chunks, zero latency); when the stage
/// stagnates and displacement over the stall window stays below
/// goal_radius/2, splices in an expert recovery from the current state.
/// Episodes with a correction carry dagger provenance; untouched rollouts
/// keep rollout provenance.
std::vector<Episode> dagger_dataset(const ChunkPolicy& policy,
                                    const EnvConfig& cfg, int n_episodes,
                                    const DaggerOptions& opt, Rng& rng);

/// Expert rollout from an explicit initial state (used by the dagger
/// variants); returns the recorded episode and whether it completed.
struct RolloutResult {
  Episode episode;
  bool success = false;
};
RolloutResult expert_rollout(const EnvState& s0, const EnvConfig& cfg,
                             Rng& rng, double noise_sigma,
                             Provenance provenance);

}  // namespace kai0
