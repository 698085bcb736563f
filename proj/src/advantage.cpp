#include "kai0/advantage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kai0 {

std::vector<StageSegment> stage_segments(const Episode& e) {
  std::vector<StageSegment> segs;
  if (e.states.empty()) return segs;
  StageSegment cur{e.stage_labels[0], 0, 0};
  for (std::size_t i = 1; i < e.stage_labels.size(); ++i) {
    if (e.stage_labels[i] == cur.stage) {
      cur.last = i;
    } else {
      segs.push_back(cur);
      cur = StageSegment{e.stage_labels[i], i, i};
    }
  }
  segs.push_back(cur);
  return segs;
}

std::vector<AdvantageSample> sample_pairs(const std::vector<Episode>& dataset,
                                          int n_pairs, bool staged, Rng& rng) {
  if (dataset.empty())
    throw std::invalid_argument("sample_pairs: empty dataset");
  for (const auto& e : dataset)
    if (e.states.size() < 2)
      throw std::invalid_argument("sample_pairs: episode shorter than 2 states");

  std::vector<AdvantageSample> out;
  out.reserve(static_cast<std::size_t>(n_pairs));
  int guard = 0;
  const int max_attempts = n_pairs * 100 + 1000;
  while (static_cast<int>(out.size()) < n_pairs) {
    if (++guard > max_attempts)
      throw std::runtime_error(
          "sample_pairs: no stage segment long enough to draw pairs");
    const auto& e = dataset[rng.uniform_index(dataset.size())];
    const std::size_t T = e.step_count();

    if (!staged) {
      const std::size_t t = rng.uniform_index(T);
      const std::size_t delta = 1 + rng.uniform_index(T - t);
      AdvantageSample s;
      s.s = e.states[t];
      s.s_prime = e.states[t + delta];
      s.staged = false;
      s.target = static_cast<double>(delta) / static_cast<double>(T);
      s.delta = static_cast<int>(delta);
      out.push_back(std::move(s));
      continue;
    }

    auto segs = stage_segments(e);
    std::erase_if(segs, [](const StageSegment& s) { return s.span() < 1; });
    if (segs.empty()) continue;  // stage segments too short in this episode
    const auto& seg = segs[rng.uniform_index(segs.size())];
    const std::size_t t = seg.first + rng.uniform_index(seg.span());
    const std::size_t delta = 1 + rng.uniform_index(seg.last - t);
    AdvantageSample s;
    s.s = e.states[t];
    s.s_prime = e.states[t + delta];
    s.staged = true;
    s.g = StageLabel{seg.stage, e.stage_count}.scalar();
    s.target = static_cast<double>(delta) / static_cast<double>(seg.span());
    s.delta = static_cast<int>(delta);
    out.push_back(std::move(s));
  }
  return out;
}

MlpLayout advantage_layout(int state_dim, bool staged,
                           const std::vector<int>& hidden) {
  MlpLayout layout;
  layout.dims.push_back(2 * state_dim + (staged ? 1 : 0));
  for (int h : hidden) layout.dims.push_back(h);
  layout.dims.push_back(1);
  layout.tag = staged ? "adv=direct_stage" : "adv=direct";
  return layout;
}

namespace {

std::vector<double> pair_input(const std::vector<double>& s,
                               const std::vector<double>& s_prime,
                               std::optional<double> g) {
  std::vector<double> x;
  x.reserve(s.size() + s_prime.size() + (g ? 1 : 0));
  x.insert(x.end(), s.begin(), s.end());
  x.insert(x.end(), s_prime.begin(), s_prime.end());
  if (g) x.push_back(*g);
  return x;
}

}  // namespace

Mlp train_advantage(const std::vector<AdvantageSample>& samples,
                    const TrainConfig& cfg, const std::vector<int>& hidden) {
  if (samples.empty())
    throw std::invalid_argument("train_advantage: empty sample set");
  const bool staged = samples.front().staged;
  const int state_dim = static_cast<int>(samples.front().s.size());
  std::vector<Sample> ds;
  ds.reserve(samples.size());
  for (const auto& p : samples) {
    if (p.staged != staged)
      throw std::invalid_argument("train_advantage: mixed staged flags");
    Sample s;
    s.input = pair_input(p.s, p.s_prime,
                         staged ? std::optional<double>(p.g) : std::nullopt);
    s.target = {p.target};
    ds.push_back(std::move(s));
  }
  const MlpLayout layout = advantage_layout(state_dim, staged, hidden);
  Rng init_rng(cfg.seed);
  auto trained = train(Mlp::init(layout, init_rng), ds, {}, cfg);
  return Mlp(layout, std::move(trained.params));
}

double advantage_of(const Mlp& net, const std::vector<double>& s,
                    const std::vector<double>& s_prime,
                    std::optional<double> g) {
  return net.forward(pair_input(s, s_prime, g))[0];
}

double ValueBaseline::value(const std::vector<double>& s) const {
  return v_net.forward(s)[0];
}

double ValueBaseline::advantage(const std::vector<double>& s,
                                const std::vector<double>& s_future) const {
  return value(s_future) - value(s);
}

ValueBaseline baseline_value_difference(const std::vector<Episode>& dataset,
                                        int horizon, const TrainConfig& cfg,
                                        const std::vector<int>& hidden) {
  if (dataset.empty())
    throw std::invalid_argument("value baseline: empty dataset");
  if (horizon < 1) throw std::invalid_argument("value baseline: horizon < 1");
  bool any_long = false;
  for (const auto& e : dataset)
    any_long |= e.step_count() > static_cast<std::size_t>(horizon);
  if (!any_long)
    throw std::invalid_argument(
        "value baseline: every episode is shorter than the horizon");

  std::vector<Sample> ds;
  for (const auto& e : dataset) {
    const double T = static_cast<double>(e.step_count());
    if (T < 1) continue;
    for (std::size_t i = 0; i < e.states.size(); ++i) {
      Sample s;
      s.input = e.states[i];
      s.target = {static_cast<double>(i) / T};
      ds.push_back(std::move(s));
    }
  }
  const int state_dim = static_cast<int>(dataset.front().states[0].size());
  MlpLayout layout;
  layout.dims.push_back(state_dim);
  for (int h : hidden) layout.dims.push_back(h);
  layout.dims.push_back(1);
  layout.tag = "adv=value";
  Rng init_rng(cfg.seed);
  auto trained = train(Mlp::init(layout, init_rng), ds, {}, cfg);
  return ValueBaseline{Mlp(layout, std::move(trained.params)), horizon};
}

std::vector<int> binarize(const std::vector<double>& advantages,
                          double epsilon_fraction) {
  for (double a : advantages)
    if (!std::isfinite(a))
      throw std::invalid_argument("binarize: non-finite advantage");
  if (epsilon_fraction < 0 || epsilon_fraction > 1)
    throw std::invalid_argument("binarize: epsilon_fraction out of [0,1]");
  const std::size_t n = advantages.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return advantages[a] > advantages[b];
                   });
  const auto positives = static_cast<std::size_t>(
      std::floor(epsilon_fraction * static_cast<double>(n)));
  std::vector<int> indicator(n, 0);
  for (std::size_t i = 0; i < positives; ++i) indicator[order[i]] = 1;
  return indicator;
}

std::vector<int> binarize_by_value(const std::vector<double>& advantages,
                                   double epsilon) {
  std::vector<int> indicator(advantages.size());
  for (std::size_t i = 0; i < advantages.size(); ++i) {
    if (!std::isfinite(advantages[i]))
      throw std::invalid_argument("binarize: non-finite advantage");
    indicator[i] = advantages[i] > epsilon ? 1 : 0;
  }
  return indicator;
}

StabilityMetrics stability_metrics(const std::vector<double>& series,
                                   double tau_smooth) {
  if (series.size() < 2)
    throw std::invalid_argument("stability metrics: series shorter than 2");
  StabilityMetrics m;
  std::size_t smooth = 0;
  for (std::size_t t = 1; t < series.size(); ++t) {
    const double d = series[t] - series[t - 1];
    m.mstd += d * d;
    if (std::abs(d) < tau_smooth) ++smooth;
  }
  const double n = static_cast<double>(series.size() - 1);
  m.mstd /= n;
  m.sfr = static_cast<double>(smooth) / n;
  return m;
}

std::vector<double> per_frame_advantage_direct(const Mlp& net,
                                               const Episode& e, bool staged) {
  std::vector<double> out;
  out.reserve(e.step_count());
  for (std::size_t t = 0; t < e.step_count(); ++t) {
    std::optional<double> g;
    if (staged)
      g = StageLabel{e.stage_labels[t], e.stage_count}.scalar();
    out.push_back(advantage_of(net, e.states[t], e.states[t + 1], g));
  }
  return out;
}

std::vector<double> per_frame_advantage_value_diff(const ValueBaseline& vb,
                                                   const Episode& e) {
  std::vector<double> out;
  const std::size_t T = e.step_count();
  out.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t window =
        std::min<std::size_t>(static_cast<std::size_t>(vb.horizon), T - t);
    out.push_back(vb.advantage(e.states[t], e.states[t + window]));
  }
  return out;
}

std::vector<double> cumulative_value_trace(
    const std::vector<double>& per_frame) {
  if (per_frame.empty())
    throw std::invalid_argument("cumulative trace: empty series");
  std::vector<double> out(per_frame.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    acc += per_frame[i];
    out[i] = acc;
  }
  return out;
}

}  // namespace kai0
