#include "kai0/episode.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kai0 {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) {
  return fnv1a(h, &v, sizeof(v));
}

std::uint64_t fnv1a_f64(std::uint64_t h, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(v));
  return fnv1a_u64(h, bits);
}

}  // namespace

void validate(const ActionChunk& c) {
  require(!c.actions.empty(), "ActionChunk: empty");
  require(c.actions.size() <= kMaxChunkLength, "ActionChunk: too long");
  for (const auto& a : c.actions)
    for (double v : a)
      require(std::isfinite(v), "ActionChunk: non-finite entry");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kExpert: return "expert";
    case Provenance::kDagger: return "dagger";
    case Provenance::kHeuristicDagger: return "heuristic_dagger";
    case Provenance::kAugmented: return "augmented";
    case Provenance::kRollout: return "rollout";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "expert") return Provenance::kExpert;
  if (s == "dagger") return Provenance::kDagger;
  if (s == "heuristic_dagger") return Provenance::kHeuristicDagger;
  if (s == "augmented") return Provenance::kAugmented;
  if (s == "rollout") return Provenance::kRollout;
  throw std::invalid_argument("unknown provenance: " + std::string(s));
}

void validate(const Episode& e) {
  require(e.stage_count >= 1, "Episode: stage_count < 1");
  require(e.states.size() == e.actions.size() + 1,
          "Episode: |states| != |actions| + 1");
  require(e.stage_labels.size() == e.states.size(),
          "Episode: stage label per state required");
  require(e.timestamps.size() == e.states.size(),
          "Episode: timestamp per state required");
  for (std::size_t i = 0; i < e.states.size(); ++i) {
    const int g = e.stage_labels[i];
    require(g >= 0 && g < e.stage_count, "Episode: stage label out of range");
    if (i > 0) {
      require(e.stage_labels[i] >= e.stage_labels[i - 1],
              "Episode: non-monotone stages");
      require(e.timestamps[i] > e.timestamps[i - 1],
              "Episode: non-monotone timestamps");
    }
    for (double v : e.states[i])
      require(std::isfinite(v), "Episode: non-finite state entry");
  }
  for (const auto& a : e.actions)
    for (double v : a)
      require(std::isfinite(v), "Episode: non-finite action entry");
}

std::uint64_t episode_checksum(const Episode& e) {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv1a_u64(h, static_cast<std::uint64_t>(e.stage_count));
  h = fnv1a_u64(h, static_cast<std::uint64_t>(e.provenance));
  for (std::size_t i = 0; i < e.states.size(); ++i) {
    h = fnv1a_u64(h, static_cast<std::uint64_t>(e.timestamps[i]));
    h = fnv1a_u64(h, static_cast<std::uint64_t>(e.stage_labels[i]));
    for (double v : e.states[i]) h = fnv1a_f64(h, v);
    if (i < e.actions.size())
      for (double v : e.actions[i]) h = fnv1a_f64(h, v);
  }
  return h;
}

namespace {

void write_episode(std::ostream& out, const Episode& e) {
  validate(e);
  nlohmann::json header = {
      {"env_params", e.env_params},
      {"S", e.stage_count},
      {"provenance", std::string(to_string(e.provenance))},
  };
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < e.states.size(); ++i) {
    nlohmann::json step = {
        {"t", e.timestamps[i]},
        {"state", e.states[i]},
        {"stage", e.stage_labels[i]},
    };
    if (i < e.actions.size())
      step["action"] = e.actions[i];
    else
      step["action"] = nullptr;
    out << step.dump() << '\n';
  }
}

nlohmann::json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw std::runtime_error("episode file: malformed line " +
                             std::to_string(lineno));
  }
}

}  // namespace

void save_episodes(const std::vector<Episode>& episodes,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("episode file: cannot open " +
                                     path.string() + " for writing");
  for (const auto& e : episodes) write_episode(out, e);
}

void save_episode(const Episode& e, const std::filesystem::path& path) {
  save_episodes({e}, path);
}

std::vector<Episode> load_episodes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("episode file: cannot open " +
                                    path.string());
  std::vector<Episode> episodes;
  Episode cur;
  bool open = false;
  std::string line;
  std::size_t lineno = 0;

  auto finish = [&] {
    if (!open) return;
    if (!cur.states.empty() && cur.actions.size() == cur.states.size())
      throw std::runtime_error("episode file: missing terminal state line");
    validate(cur);
    episodes.push_back(std::move(cur));
    cur = Episode{};
    open = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = parse_line(line, lineno);
    if (j.contains("provenance")) {
      finish();
      cur.env_params = j.at("env_params");
      cur.stage_count = j.at("S").get<int>();
      cur.provenance =
          provenance_from_string(j.at("provenance").get<std::string>());
      open = true;
      continue;
    }
    if (!open)
      throw std::runtime_error("episode file: step before header at line " +
                               std::to_string(lineno));
    if (!j.contains("t") || !j.contains("state") || !j.contains("stage") ||
        !j.contains("action"))
      throw std::runtime_error("episode file: malformed line " +
                               std::to_string(lineno));
    cur.timestamps.push_back(j.at("t").get<std::int64_t>());
    cur.states.push_back(j.at("state").get<std::vector<double>>());
    cur.stage_labels.push_back(j.at("stage").get<int>());
    if (!j.at("action").is_null())
      cur.actions.push_back(j.at("action").get<std::vector<double>>());
  }
  finish();
  return episodes;
}

Episode load_episode(const std::filesystem::path& path) {
  auto all = load_episodes(path);
  if (all.size() != 1)
    throw std::runtime_error("episode file: expected exactly one episode in " +
                             path.string());
  return std::move(all.front());
}

}  // namespace kai0
