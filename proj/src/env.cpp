#include "kai0/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kai0 {

EnvConfig EnvConfig::default_loop() {
  EnvConfig cfg;
  cfg.stage_count = 4;
  cfg.waypoints = {{0.6, 0.6}, {-0.6, -0.6}, {-0.6, 0.6}, {0.6, -0.6}};
  return cfg;
}

void validate(const EnvConfig& cfg) {
  if (cfg.stage_count < 1)
    throw std::invalid_argument("EnvConfig: stage_count must be >= 1");
  if (static_cast<int>(cfg.waypoints.size()) != cfg.stage_count)
    throw std::invalid_argument("EnvConfig: need one waypoint per stage");
  if (cfg.goal_radius <= 0)
    throw std::invalid_argument("EnvConfig: goal_radius must be > 0");
  if (cfg.horizon < 1) throw std::invalid_argument("EnvConfig: horizon < 1");
  if (cfg.action_clip <= 0)
    throw std::invalid_argument("EnvConfig: action_clip must be > 0");
  if (cfg.obs_noise_sigma < 0)
    throw std::invalid_argument("EnvConfig: obs_noise_sigma < 0");
  for (std::size_t i = 0; i < cfg.waypoints.size(); ++i) {
    const auto& w = cfg.waypoints[i];
    if (w[0] < -1 || w[0] > 1 || w[1] < -1 || w[1] > 1)
      throw std::invalid_argument("EnvConfig: waypoint outside [-1,1]^2");
    for (std::size_t j = i + 1; j < cfg.waypoints.size(); ++j)
      if (dist(w, cfg.waypoints[j]) == 0.0)
        throw std::invalid_argument("EnvConfig: duplicate waypoints");
    if (i + 1 < cfg.waypoints.size() &&
        dist(w, cfg.waypoints[i + 1]) <= 2 * cfg.goal_radius)
      throw std::invalid_argument(
          "EnvConfig: consecutive waypoints closer than 2 * goal_radius");
  }
}

nlohmann::json to_json(const EnvConfig& cfg) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& p : cfg.waypoints) w.push_back({p[0], p[1]});
  return {
      {"stage_count", cfg.stage_count},
      {"waypoints", w},
      {"goal_radius", cfg.goal_radius},
      {"horizon", cfg.horizon},
      {"dt", cfg.dt},
      {"action_clip", cfg.action_clip},
      {"obs_noise_sigma", cfg.obs_noise_sigma},
      {"xi_seed", cfg.xi_seed},
  };
}

EnvConfig env_config_from_json(const nlohmann::json& j) {
  EnvConfig cfg;
  cfg.stage_count = j.at("stage_count").get<int>();
  cfg.waypoints.clear();
  for (const auto& p : j.at("waypoints"))
    cfg.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  cfg.goal_radius = j.at("goal_radius").get<double>();
  cfg.horizon = j.at("horizon").get<int>();
  cfg.dt = j.at("dt").get<double>();
  cfg.action_clip = j.at("action_clip").get<double>();
  cfg.obs_noise_sigma = j.at("obs_noise_sigma").get<double>();
  cfg.xi_seed = j.at("xi_seed").get<std::uint64_t>();
  validate(cfg);
  return cfg;
}

EnvState reset(const EnvConfig& cfg, Rng& rng) {
  validate(cfg);
  EnvState s;
  s.p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  s.stage = 0;
  s.tick = 0;
  return s;
}

std::vector<double> clip_action(const std::vector<double>& a,
                                const EnvConfig& cfg) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = std::clamp(a[i], -cfg.action_clip, cfg.action_clip);
  return out;
}

EnvState step(const EnvState& s, const std::vector<double>& action,
              const EnvConfig& cfg) {
  if (action.size() != 2)
    throw std::invalid_argument("env step: action must have dimension 2");
  for (double v : action)
    if (!std::isfinite(v))
      throw std::invalid_argument("env step: non-finite action");

  EnvState next = s;
  const auto a = clip_action(action, cfg);
  next.p[0] = std::clamp(s.p[0] + a[0] * cfg.dt, -1.2, 1.2);
  next.p[1] = std::clamp(s.p[1] + a[1] * cfg.dt, -1.2, 1.2);
  if (s.stage < cfg.stage_count &&
      dist(next.p, cfg.waypoints[s.stage]) < cfg.goal_radius)
    next.stage = s.stage + 1;
  next.tick = s.tick + 1;
  return next;
}

std::vector<double> expert_action(const EnvState& s, const EnvConfig& cfg,
                                  Rng& rng, double noise_sigma) {
  if (complete(s, cfg))
    throw std::invalid_argument("expert: task already complete");
  const auto& w = cfg.waypoints[s.stage];
  std::vector<double> a = {w[0] - s.p[0], w[1] - s.p[1]};
  a = clip_action(a, cfg);
  if (noise_sigma > 0) {
    a[0] += rng.gaussian(0.0, noise_sigma);
    a[1] += rng.gaussian(0.0, noise_sigma);
  }
  return a;
}

ActionChunk expert_policy(const EnvState& s, const EnvConfig& cfg, Rng& rng,
                          double noise_sigma, int chunk_len) {
  if (chunk_len < 1) throw std::invalid_argument("expert: chunk_len < 1");
  ActionChunk chunk;
  chunk.produced_at_tick = s.tick;
  chunk.actions.reserve(static_cast<std::size_t>(chunk_len));
  for (int i = 0; i < chunk_len; ++i)
    chunk.actions.push_back(expert_action(s, cfg, rng, noise_sigma));
  return chunk;
}

}  // namespace kai0
