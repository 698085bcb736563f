#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kai0 {

/// A horizon-K sequence of action vectors emitted by one policy inference.
/// produced_at_tick is the simulation tick of the observation the chunk was
/// computed from.
struct ActionChunk {
  std::vector<std::vector<double>> actions;
  std::int64_t produced_at_tick = 0;

  std::size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }
};

constexpr std::size_t kMaxChunkLength = 1000;

/// Throws unless 1 <= length <= kMaxChunkLength and all entries are finite.
void validate(const ActionChunk& c);

enum class Provenance {
  kExpert,
  kDagger,
  kHeuristicDagger,
  kAugmented,
  kRollout,
};

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// One recorded trajectory. states/timestamps/stage_labels are per state
/// (length T+1), actions per step (length T). Stage labels live in
/// [0, stage_count) and are non-decreasing; timestamps strictly increase.
/// env_params is an opaque payload round-tripped verbatim; the env module
/// knows how to interpret it.
struct Episode {
  int stage_count = 1;
  Provenance provenance = Provenance::kExpert;
  nlohmann::json env_params;
  std::vector<std::int64_t> timestamps;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> actions;
  std::vector<int> stage_labels;

  std::size_t step_count() const { return actions.size(); }
};

void validate(const Episode& e);

/// Content identity, stable across serialization round trips.
std::uint64_t episode_checksum(const Episode& e);

/// JSONL: one header line {env_params, S, provenance}, then one line per
/// state {t, state, action, stage}; the terminal state carries action null.
/// Multiple episodes concatenate in one file.
void save_episodes(const std::vector<Episode>& episodes,
                   const std::filesystem::path& path);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

void save_episode(const Episode& e, const std::filesystem::path& path);
Episode load_episode(const std::filesystem::path& path);

}  // namespace kai0
