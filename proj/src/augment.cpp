#include "kai0/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kai0/env.hpp"

namespace kai0 {

Episode augment_mirror(const Episode& e) {
  validate(e);
  Episode out = e;
  out.provenance = Provenance::kAugmented;
  for (auto& s : out.states) s[0] = -s[0];
  for (auto& a : out.actions) a[0] = -a[0];
  if (!out.env_params.is_null()) {
    EnvConfig cfg = env_config_from_json(out.env_params);
    for (auto& w : cfg.waypoints) w[0] = -w[0];
    out.env_params = to_json(cfg);
  }
  return out;
}

FrameskipResult augment_frameskip(const Episode& e, double skip_prob,
                                  Rng& rng) {
  validate(e);
  if (skip_prob < 0.0 || skip_prob > 0.5)
    throw std::invalid_argument("frameskip: skip_prob must be in [0, 0.5]");
  const std::size_t steps = e.actions.size();
  if (steps < 3)
    throw std::invalid_argument("frameskip: episode shorter than 3 steps");

  const EnvConfig cfg = env_config_from_json(e.env_params);
  const double merge_clip = 2.0 * cfg.action_clip;

  FrameskipResult result;
  Episode& out = result.episode;
  out.stage_count = e.stage_count;
  out.provenance = Provenance::kAugmented;
  out.env_params = e.env_params;

  out.states.push_back(e.states[0]);
  std::vector<double> pending = e.actions[0];
  auto flush = [&](const std::vector<double>& next_state) {
    bool clipped = false;
    std::vector<double> a = pending;
    for (auto& v : a) {
      if (std::abs(v) > merge_clip) clipped = true;
      v = std::clamp(v, -merge_clip, merge_clip);
    }
    if (clipped) ++result.clipped_merges;
    out.actions.push_back(std::move(a));
    out.states.push_back(next_state);
  };

  for (std::size_t t = 1; t < steps; ++t) {
    const bool interior = t + 1 < steps;  // first and last steps always kept
    if (interior && rng.uniform() < skip_prob) {
      for (std::size_t d = 0; d < pending.size(); ++d)
        pending[d] += e.actions[t][d];
      continue;
    }
    flush(e.states[t]);
    pending = e.actions[t];
  }
  flush(e.states[steps]);

  // Re-index time and replay the capture rule for fresh stage labels.
  out.timestamps.resize(out.states.size());
  for (std::size_t i = 0; i < out.timestamps.size(); ++i)
    out.timestamps[i] = static_cast<std::int64_t>(i);

  int g = e.stage_labels.front();
  out.stage_labels.resize(out.states.size());
  out.stage_labels[0] = record_stage(g, cfg);
  for (std::size_t i = 1; i < out.states.size(); ++i) {
    const Vec2 p = {out.states[i][0], out.states[i][1]};
    if (g < cfg.stage_count && dist(p, cfg.waypoints[g]) < cfg.goal_radius)
      ++g;
    out.stage_labels[i] = record_stage(g, cfg);
  }
  validate(out);
  return result;
}

}  // namespace kai0
