#pragma once

#include <optional>
#include <vector>

#include "kai0/episode.hpp"
#include "kai0/mlp.hpp"
#include "kai0/rng.hpp"
#include "kai0/train.hpp"

namespace kai0 {

/// Stage index plus its normalized scalar g = index / S.
struct StageLabel {
  int index = 0;
  int stage_count = 1;
  double scalar() const {
    return static_cast<double>(index) / stage_count;
  }
};

/// One progress-regression pair. Non-staged targets span the whole episode;
/// staged targets are normalized within one stage segment and carry g.
struct AdvantageSample {
  std::vector<double> s;
  std::vector<double> s_prime;
  bool staged = false;
  double g = 0.0;      // valid when staged
  double target = 0.0; // in [-1, 1]
  int delta = 1;       // time span between the two states
};

/// Maximal runs of equal stage label over state indices.
struct StageSegment {
  int stage = 0;
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  std::size_t span() const { return last - first; }
};
std::vector<StageSegment> stage_segments(const Episode& e);

/// Draws pairs (t, t+delta) from the dataset. Non-staged: t uniform, delta
/// uniform in [1, T-t], target (t'-t)/T. Staged: both endpoints inside one
/// stage segment, target (t'-t)/span; segments shorter than two states are
/// skipped.
std::vector<AdvantageSample> sample_pairs(const std::vector<Episode>& dataset,
                                          int n_pairs, bool staged, Rng& rng);

/// Network shape for the direct estimator: input concat(s, s' [, g]),
/// scalar output.
MlpLayout advantage_layout(int state_dim, bool staged,
                           const std::vector<int>& hidden = {64, 64});

/// Squared-error regression of the pair targets via the shared trainer.
Mlp train_advantage(const std::vector<AdvantageSample>& samples,
                    const TrainConfig& cfg,
                    const std::vector<int>& hidden = {64, 64});

/// Direct estimator applied to one pair.
double advantage_of(const Mlp& net, const std::vector<double>& s,
                    const std::vector<double>& s_prime,
                    std::optional<double> g);

/// Value-difference baseline: V(s) regresses global progress t/T; the
/// advantage at step t is V(s_{t+min(horizon, T-t)}) - V(s_t).
struct ValueBaseline {
  Mlp v_net;
  int horizon = 50;

  double value(const std::vector<double>& s) const;
  double advantage(const std::vector<double>& s,
                   const std::vector<double>& s_future) const;
};
ValueBaseline baseline_value_difference(const std::vector<Episode>& dataset,
                                        int horizon, const TrainConfig& cfg,
                                        const std::vector<int>& hidden = {64,
                                                                          64});

/// Rank-based binary optimality indicator: the top epsilon_fraction by
/// advantage (ties to the lower sample index) get I=1.
std::vector<int> binarize(const std::vector<double>& advantages,
                          double epsilon_fraction = 0.3);

/// Literal threshold variant: I = 1[A > epsilon].
std::vector<int> binarize_by_value(const std::vector<double>& advantages,
                                   double epsilon);

struct StabilityMetrics {
  double mstd = 0.0;  // mean squared first difference
  double sfr = 0.0;   // fraction of |first difference| < tau
};
StabilityMetrics stability_metrics(const std::vector<double>& series,
                                   double tau_smooth = 0.05);

/// Per-frame advantage series over an episode (delta = 1 throughout).
std::vector<double> per_frame_advantage_direct(const Mlp& net,
                                               const Episode& e, bool staged);
std::vector<double> per_frame_advantage_value_diff(const ValueBaseline& vb,
                                                   const Episode& e);

/// Running sum of a per-frame advantage series.
std::vector<double> cumulative_value_trace(const std::vector<double>& per_frame);

}  // namespace kai0
