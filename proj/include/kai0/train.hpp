#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kai0/episode.hpp"
#include "kai0/mlp.hpp"

namespace kai0 {

struct TrainConfig {
  int steps = 8000;
  int batch = 128;
  double lr = 2.5e-4;
  int cosine_decay_steps = 1000;
  double lr_floor = 0.1;  // fraction of lr held after the decay window
  double grad_clip = 1.0;
  double negative_weight = 0.1;  // λ applied to I=0 samples
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainResult {
  ParameterVector params;
  std::vector<std::pair<int, double>> curve;  // (step, batch loss) per 100
};

/// Adam with cosine lr decay to a floor and global-norm gradient clipping.
/// Batches are drawn with replacement from a stream derived from cfg.seed;
/// training is bit-reproducible for a fixed seed. Aborts if the loss goes
/// non-finite. weights may be empty (all ones).
TrainResult train(const Mlp& init, const std::vector<Sample>& dataset,
                  const std::vector<double>& weights, const TrainConfig& cfg);

/// Learning rate at a given step under the config's schedule.
double lr_at(const TrainConfig& cfg, int step);

/// Observation contract shared by training and simulation: agent position
/// followed by a stage slot of width S (one-hot when stage_aware, zeros when
/// stage-blind).
std::vector<double> make_policy_obs(const std::vector<double>& position,
                                    int stage_label, int stage_count,
                                    bool stage_aware);

/// Policy network shape for the observation contract above.
MlpLayout policy_layout(int stage_count, int chunk_len, int action_dim,
                        bool stage_aware,
                        const std::vector<int>& hidden = {64, 64});

/// True if the layout's tag says the checkpoint expects one-hot stage input.
bool layout_is_stage_aware(const MlpLayout& layout);

/// Behavior-cloning dataset: one sample per episode step; the target is the
/// next chunk_len executed actions, flattened, zero-padded past the end.
struct BcDataset {
  std::vector<Sample> samples;
  std::vector<std::pair<std::size_t, std::size_t>> origin;  // (episode, step)
  int action_dim = 0;
};
BcDataset build_bc_dataset(const std::vector<Episode>& episodes, int chunk_len,
                           bool stage_aware);

/// Reshapes a flat network output into an action chunk.
ActionChunk chunk_from_output(const std::vector<double>& out, int action_dim,
                              std::int64_t produced_at_tick);

/// Maps binary optimality indicators to BC sample weights {λ, 1}.
std::vector<double> weights_from_indicators(const std::vector<int>& indicators,
                                            double negative_weight);

}  // namespace kai0
