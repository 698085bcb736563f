#pragma once

#include "kai0/episode.hpp"
#include "kai0/rng.hpp"

namespace kai0 {

/// Horizontal flip: negates the x component of states, actions, and the
/// waypoints in the episode's env params. Pure; output provenance is
/// augmented. Involution up to provenance.
Episode augment_mirror(const Episode& e);

struct FrameskipResult {
  Episode episode;
  int clipped_merges = 0;  // merged actions that exceeded 2x the clip
};

/// Speed-variation synthesis: each interior step is independently dropped
/// with probability skip_prob; a dropped step's action is folded into the
/// surviving preceding action as a displacement sum (clipped at twice the
/// per-axis limit, counted in clipped_merges). Timestamps are re-indexed
/// consecutively and stage labels recomputed by replaying the capture rule
/// over the surviving states.
FrameskipResult augment_frameskip(const Episode& e, double skip_prob,
                                  Rng& rng);

}  // namespace kai0
