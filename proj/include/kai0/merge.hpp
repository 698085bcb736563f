#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "kai0/episode.hpp"
#include "kai0/params.hpp"
#include "kai0/rng.hpp"
#include "kai0/train.hpp"

namespace kai0 {

/// Convex-combination weights over a checkpoint set.
struct MergeCoefficients {
  std::vector<double> alphas;
};

/// Throws unless alphas has the expected arity, every entry is >= 0, and the
/// sum is 1 within 1e-9.
void validate_simplex(const MergeCoefficients& c, std::size_t n);

struct CheckpointSet {
  std::vector<ParameterVector> checkpoints;
  std::vector<std::string> labels;
  std::optional<std::vector<double>> cached_losses;

  std::size_t size() const { return checkpoints.size(); }
};

void validate(const CheckpointSet& cs);

/// theta_merged = sum_i alpha_i * theta_i. Inputs unmodified.
ParameterVector merge(const CheckpointSet& cs, const MergeCoefficients& c);

using LossFn = std::function<double(const ParameterVector&)>;
/// Loss plus gradient w.r.t. the (flat) parameters.
using LossGradFn =
    std::function<std::pair<double, std::vector<double>>(const ParameterVector&)>;

/// alpha_i = 1/n.
MergeCoefficients strategy_average(const CheckpointSet& cs);

/// alpha_i proportional to (L_i + eps)^(-p) over per-checkpoint losses.
MergeCoefficients strategy_inverse_loss(const CheckpointSet& cs,
                                        const LossFn& val_loss, double p = 1.0,
                                        double epsilon = 1e-8);

struct GradientStrategyOptions {
  int iters = 200;
  double step = 0.5;
  bool adaptive = true;  // Adam-style per-coordinate moments (0.9, 0.999)
};

/// Softmax-parameterized coefficients alpha = softmax(w), w initialized at 0
/// (uniform); descends the merged validation loss through the chain rule
/// dL/dalpha_i = <dL/dtheta, theta_i> composed with the softmax Jacobian.
/// Returns the best-seen iterate.
MergeCoefficients strategy_gradient(const CheckpointSet& cs,
                                    const LossGradFn& val_loss_grad,
                                    const GradientStrategyOptions& opt = {});

/// Greedy soup: candidates ordered by ascending individual loss; starting
/// from the best, a candidate joins the multiset iff uniform averaging over
/// the enlarged multiset strictly reduces the loss. Each candidate is offered
/// twice (one re-offer pass). alpha_i = count_i / |multiset|.
MergeCoefficients strategy_greedy(const CheckpointSet& cs,
                                  const LossFn& val_loss);

enum class MergeStrategy {
  kAverage,
  kInverseLoss,
  kGradient,
  kGreedy,
};
std::string_view to_string(MergeStrategy s);
MergeStrategy merge_strategy_from_string(std::string_view s);

enum class ValSplit { kInDomain, kOod };
std::string_view to_string(ValSplit s);
ValSplit val_split_from_string(std::string_view s);

/// Index-based split: in-domain validation holds out a fraction of the
/// expert episodes (never trained on); the OOD validation set is the dagger /
/// heuristic-dagger recovery pool, also never trained on. Throws if the sets
/// overlap.
struct ValidationSplits {
  std::vector<std::size_t> train_expert;   // indices into the expert set
  std::vector<std::size_t> in_domain_val;  // indices into the expert set
  std::vector<std::size_t> ood_val;        // indices into the dagger set
};
ValidationSplits build_validation_splits(
    const std::vector<Episode>& expert_set,
    const std::vector<Episode>& dagger_set, Rng& rng,
    double holdout_fraction = 0.1);

/// Uniform random partition of episode indices into n disjoint subsets.
std::vector<std::vector<std::size_t>> partition_indices(std::size_t count,
                                                        std::size_t n,
                                                        Rng& rng);

struct ModelArithmeticConfig {
  MergeStrategy strategy = MergeStrategy::kGreedy;
  ValSplit split = ValSplit::kOod;
  int chunk_len = 50;
  bool stage_aware = false;
  std::vector<int> hidden = {64, 64};
  TrainConfig train;
  double inverse_loss_p = 1.0;
  double inverse_loss_eps = 1e-8;
  GradientStrategyOptions gradient;
};

struct ModelArithmeticReport {
  std::string strategy;
  std::string split;
  std::vector<double> alphas;
  std::vector<double> per_checkpoint_loss;
  double merged_loss = 0.0;
  std::size_t single_best_index = 0;
  double single_best_loss = 0.0;
  double full_data_loss = 0.0;

  nlohmann::json to_json() const;
};

struct ModelArithmeticResult {
  ParameterVector merged;
  std::vector<ParameterVector> checkpoints;
  ParameterVector single_best;
  ParameterVector full_data;
  ModelArithmeticReport report;
};

/// Trains one policy per disjoint subset, computes coefficients per the
/// configured strategy on the chosen validation split, and reports the
/// merged policy alongside single-best and full-data baselines.
ModelArithmeticResult run_model_arithmetic(
    const std::vector<std::vector<Episode>>& subsets,
    const std::vector<Episode>& in_domain_val,
    const std::vector<Episode>& ood_val, const ModelArithmeticConfig& cfg);

}  // namespace kai0
