#include "kai0/datagen.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace kai0 {

namespace {

struct Recorder {
  Episode e;

  Recorder(const EnvConfig& cfg, Provenance prov) {
    e.stage_count = cfg.stage_count;
    e.provenance = prov;
    e.env_params = to_json(cfg);
  }

  void state_point(const EnvState& s, const EnvConfig& cfg) {
    e.timestamps.push_back(s.tick);
    e.states.push_back({s.p[0], s.p[1]});
    e.stage_labels.push_back(record_stage(s.stage, cfg));
  }

  void action(const std::vector<double>& a) { e.actions.push_back(a); }
};

Vec2 unit(const Vec2& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1]);
  if (n < 1e-12) return {1.0, 0.0};
  return {v[0] / n, v[1] / n};
}

Vec2 approach_origin(int stage, const EnvConfig& cfg) {
  return stage >= 1 ? cfg.waypoints[stage - 1] : Vec2{0.0, 0.0};
}

Vec2 clamp_arena(Vec2 p) {
  p[0] = std::clamp(p[0], -1.2, 1.2);
  p[1] = std::clamp(p[1], -1.2, 1.2);
  return p;
}

}  // namespace

RolloutResult expert_rollout(const EnvState& s0, const EnvConfig& cfg,
                             Rng& rng, double noise_sigma,
                             Provenance provenance) {
  Recorder rec(cfg, provenance);
  EnvState s = s0;
  rec.state_point(s, cfg);
  while (!complete(s, cfg) && s.tick < cfg.horizon) {
    const auto a = clip_action(expert_action(s, cfg, rng, noise_sigma), cfg);
    s = step(s, a, cfg);
    rec.action(a);
    rec.state_point(s, cfg);
  }
  return {std::move(rec.e), complete(s, cfg)};
}

std::vector<Episode> generate_expert_dataset(const EnvConfig& cfg,
                                             int n_episodes, Rng& rng,
                                             double noise_sigma) {
  if (n_episodes < 1)
    throw std::invalid_argument("expert dataset: n_episodes must be >= 1");
  validate(cfg);
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(n_episodes));
  for (int slot = 0; slot < n_episodes; ++slot) {
    Rng slot_rng = rng.split(static_cast<std::uint64_t>(slot));
    bool done = false;
    for (int attempt = 0; attempt < 10 && !done; ++attempt) {
      Rng ep_rng = slot_rng.split(static_cast<std::uint64_t>(attempt));
      EnvState s0 = reset(cfg, ep_rng);
      auto r = expert_rollout(s0, cfg, ep_rng, noise_sigma,
                              Provenance::kExpert);
      if (r.success) {
        out.push_back(std::move(r.episode));
        done = true;
      }
    }
    if (!done)
      throw std::runtime_error(
          "expert dataset: expert cannot solve the environment within the "
          "horizon (10 attempts failed); configuration error");
  }
  return out;
}

EnvState sample_failure_state(FailureKind kind, const EnvConfig& cfg,
                              Rng& rng) {
  const int stage = static_cast<int>(
      rng.uniform_index(static_cast<std::uint64_t>(cfg.stage_count)));
  const Vec2& goal = cfg.waypoints[stage];
  const Vec2 prev = approach_origin(stage, cfg);
  const Vec2 dir = unit({goal[0] - prev[0], goal[1] - prev[1]});
  const double r = cfg.goal_radius;

  EnvState s;
  s.stage = stage;
  s.tick = 0;
  switch (kind) {
    case FailureKind::kOvershoot: {
      const double u = rng.uniform(2.0 * r, 4.0 * r);
      s.p = clamp_arena({goal[0] + dir[0] * u, goal[1] + dir[1] * u});
      return s;
    }
    case FailureKind::kWrongBasin: {
      if (cfg.stage_count < 2)
        throw std::invalid_argument(
            "wrong_basin failure needs at least two waypoints");
      for (int tries = 0; tries < 100; ++tries) {
        auto m = rng.uniform_index(
            static_cast<std::uint64_t>(cfg.stage_count - 1));
        const int other = static_cast<int>(m) + (static_cast<int>(m) >= stage);
        const double theta = rng.uniform(0.0, 2.0 * 3.141592653589793);
        const double u = rng.uniform(1.5 * r, 3.0 * r);
        Vec2 p = clamp_arena({cfg.waypoints[other][0] + std::cos(theta) * u,
                              cfg.waypoints[other][1] + std::sin(theta) * u});
        if (dist(p, goal) >= r) {
          s.p = p;
          return s;
        }
      }
      throw std::runtime_error("wrong_basin sampler failed to place a state");
    }
    case FailureKind::kStalledOffset: {
      const Vec2 mid = {(prev[0] + goal[0]) / 2, (prev[1] + goal[1]) / 2};
      const Vec2 perp = {-dir[1], dir[0]};
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      const double u = sign * rng.uniform(2.0 * r, 4.0 * r);
      s.p = clamp_arena({mid[0] + perp[0] * u, mid[1] + perp[1] * u});
      return s;
    }
  }
  throw std::invalid_argument("unknown failure kind");
}

std::vector<Episode> heuristic_dagger_dataset(
    const EnvConfig& cfg, int n_episodes,
    const std::vector<FailureKind>& kinds, Rng& rng, double noise_sigma) {
  if (kinds.empty())
    throw std::invalid_argument("heuristic dagger: empty failure kinds");
  if (n_episodes < 1)
    throw std::invalid_argument("heuristic dagger: n_episodes must be >= 1");
  validate(cfg);
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(n_episodes));
  for (int slot = 0; slot < n_episodes; ++slot) {
    Rng slot_rng = rng.split(static_cast<std::uint64_t>(slot));
    bool done = false;
    for (int attempt = 0; attempt < 10 && !done; ++attempt) {
      Rng ep_rng = slot_rng.split(static_cast<std::uint64_t>(attempt));
      const auto kind = kinds[ep_rng.uniform_index(kinds.size())];
      EnvState s0 = sample_failure_state(kind, cfg, ep_rng);
      auto r = expert_rollout(s0, cfg, ep_rng, noise_sigma,
                              Provenance::kHeuristicDagger);
      if (r.success) {
        out.push_back(std::move(r.episode));
        done = true;
      }
    }
    if (!done)
      throw std::runtime_error(
          "heuristic dagger: recovery rollouts keep failing");
  }
  return out;
}

std::vector<Episode> dagger_dataset(const ChunkPolicy& policy,
                                    const EnvConfig& cfg, int n_episodes,
                                    const DaggerOptions& opt, Rng& rng) {
  if (n_episodes < 1)
    throw std::invalid_argument("dagger: n_episodes must be >= 1");
  validate(cfg);
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(n_episodes));

  for (int slot = 0; slot < n_episodes; ++slot) {
    Rng ep_rng = rng.split(static_cast<std::uint64_t>(slot));
    Rng policy_rng = ep_rng.split(1);
    Rng expert_rng = ep_rng.split(2);

    EnvState s = reset(cfg, ep_rng);
    Recorder rec(cfg, Provenance::kRollout);
    rec.state_point(s, cfg);

    // Position history for stall detection.
    std::deque<Vec2> trail;
    std::int64_t last_advance_tick = 0;
    bool corrected = false;

    std::vector<std::vector<double>> buffer;
    std::size_t next = 0;

    while (!complete(s, cfg) && s.tick < cfg.horizon) {
      if (next >= buffer.size()) {
        auto chunk = policy(s, policy_rng);
        validate(chunk);
        buffer = chunk.actions;
        next = 0;
      }
      trail.push_back(s.p);
      if (static_cast<int>(trail.size()) > opt.stall_window + 1)
        trail.pop_front();

      const int before = s.stage;
      const auto a = clip_action(buffer[next++], cfg);
      s = step(s, a, cfg);
      rec.action(a);
      rec.state_point(s, cfg);
      if (s.stage > before) last_advance_tick = s.tick;

      const bool window_elapsed =
          s.tick - last_advance_tick >= opt.stall_window &&
          static_cast<int>(trail.size()) > opt.stall_window;
      if (window_elapsed && dist(s.p, trail.front()) < cfg.goal_radius / 2) {
        // Stalled: hand over to the expert from the current state.
        corrected = true;
        while (!complete(s, cfg) && s.tick < cfg.horizon) {
          const auto ea = clip_action(
              expert_action(s, cfg, expert_rng, opt.expert_noise_sigma), cfg);
          s = step(s, ea, cfg);
          rec.action(ea);
          rec.state_point(s, cfg);
        }
        break;
      }
    }
    rec.e.provenance = corrected ? Provenance::kDagger : Provenance::kRollout;
    out.push_back(std::move(rec.e));
  }
  return out;
}

}  // namespace kai0
