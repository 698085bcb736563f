#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "kai0/episode.hpp"
#include "kai0/rng.hpp"

namespace kai0 {

using Vec2 = std::array<double, 2>;

inline double dist(const Vec2& a, const Vec2& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

/// Multi-stage planar reaching task. The agent must visit S waypoints in
/// order; stage g is complete once the agent passes within goal_radius of
/// waypoint g. The default waypoint set is a self-crossing loop, so the same
/// position occurs in more than one stage and position alone does not
/// identify task progress.
struct EnvConfig {
  int stage_count = 4;
  std::vector<Vec2> waypoints;
  double goal_radius = 0.05;
  int horizon = 600;
  double dt = 1.0;
  double action_clip = 0.05;
  double obs_noise_sigma = 0.0;
  std::uint64_t xi_seed = 0;

  /// Four corners visited in a bowtie order; stages 1 and 3 both cross the
  /// origin.
  static EnvConfig default_loop();
};

void validate(const EnvConfig& cfg);
nlohmann::json to_json(const EnvConfig& cfg);
EnvConfig env_config_from_json(const nlohmann::json& j);

struct EnvState {
  Vec2 p{0.0, 0.0};
  int stage = 0;  // in [0, S]; stage == S means the task is complete
  std::int64_t tick = 0;
};

inline bool complete(const EnvState& s, const EnvConfig& cfg) {
  return s.stage >= cfg.stage_count;
}

/// Initial state: position uniform in [-1,1]^2, stage 0, tick 0.
EnvState reset(const EnvConfig& cfg, Rng& rng);

/// One Euler step: per-axis clip of the action, position clamp to
/// [-1.2, 1.2]^2, waypoint capture advances the stage by exactly one.
EnvState step(const EnvState& s, const std::vector<double>& action,
              const EnvConfig& cfg);

/// Per-axis clip to the configured speed limit.
std::vector<double> clip_action(const std::vector<double>& a,
                                const EnvConfig& cfg);

/// Scripted expert: a proportional controller toward the current waypoint.
/// All chunk_len actions are computed from the given state, each perturbed by
/// independent zero-mean Gaussian noise of std noise_sigma per component.
ActionChunk expert_policy(const EnvState& s, const EnvConfig& cfg, Rng& rng,
                          double noise_sigma, int chunk_len = 50);

/// Single proportional-controller action from the given state.
std::vector<double> expert_action(const EnvState& s, const EnvConfig& cfg,
                                  Rng& rng, double noise_sigma);

/// Stage label recorded per state: min(g, S-1), so the terminal capture
/// state belongs to the last stage's segment.
inline int record_stage(int g, const EnvConfig& cfg) {
  return g < cfg.stage_count ? g : cfg.stage_count - 1;
}

}  // namespace kai0
