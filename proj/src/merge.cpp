#include "kai0/merge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kai0 {

void validate_simplex(const MergeCoefficients& c, std::size_t n) {
  if (c.alphas.size() != n)
    throw std::invalid_argument("merge coefficients: arity mismatch");
  double sum = 0.0;
  for (double a : c.alphas) {
    if (!(a >= 0.0))
      throw std::invalid_argument("merge coefficients: negative entry");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("merge coefficients: sum != 1");
}

void validate(const CheckpointSet& cs) {
  if (cs.checkpoints.empty())
    throw std::invalid_argument("checkpoint set: empty");
  for (const auto& c : cs.checkpoints)
    require_combinable(cs.checkpoints.front(), c);
}

ParameterVector merge(const CheckpointSet& cs, const MergeCoefficients& c) {
  validate(cs);
  validate_simplex(c, cs.size());
  ParameterVector out;
  out.layout_id = cs.checkpoints.front().layout_id;
  out.values.assign(cs.checkpoints.front().values.size(), 0.0);
  for (std::size_t i = 0; i < cs.size(); ++i)
    out = param_axpy(out, c.alphas[i], cs.checkpoints[i]);
  return out;
}

MergeCoefficients strategy_average(const CheckpointSet& cs) {
  validate(cs);
  const double n = static_cast<double>(cs.size());
  return {std::vector<double>(cs.size(), 1.0 / n)};
}

namespace {

std::vector<double> per_checkpoint_losses(const CheckpointSet& cs,
                                          const LossFn& val_loss) {
  if (cs.cached_losses) {
    if (cs.cached_losses->size() != cs.size())
      throw std::invalid_argument("checkpoint set: cached loss arity");
    return *cs.cached_losses;
  }
  std::vector<double> losses(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i)
    losses[i] = val_loss(cs.checkpoints[i]);
  return losses;
}

std::vector<double> softmax(const std::vector<double>& w) {
  const double mx = *std::max_element(w.begin(), w.end());
  std::vector<double> a(w.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    a[i] = std::exp(w[i] - mx);
    sum += a[i];
  }
  for (auto& v : a) v /= sum;
  return a;
}

// Renormalizes away floating-point drift so downstream simplex checks hold.
MergeCoefficients snap_to_simplex(std::vector<double> a) {
  double sum = 0.0;
  for (auto& v : a) {
    v = std::max(v, 0.0);
    sum += v;
  }
  for (auto& v : a) v /= sum;
  return {std::move(a)};
}

}  // namespace

MergeCoefficients strategy_inverse_loss(const CheckpointSet& cs,
                                        const LossFn& val_loss, double p,
                                        double epsilon) {
  validate(cs);
  if (p <= 0 || epsilon <= 0)
    throw std::invalid_argument("inverse loss: p and epsilon must be > 0");
  const auto losses = per_checkpoint_losses(cs, val_loss);
  std::vector<double> a(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i)
    a[i] = std::pow(losses[i] + epsilon, -p);
  return snap_to_simplex(std::move(a));
}

MergeCoefficients strategy_gradient(const CheckpointSet& cs,
                                    const LossGradFn& val_loss_grad,
                                    const GradientStrategyOptions& opt) {
  validate(cs);
  if (opt.iters < 1) throw std::invalid_argument("gradient strategy: iters < 1");
  const std::size_t n = cs.size();
  std::vector<double> w(n, 0.0), m(n, 0.0), v(n, 0.0);
  std::vector<double> best_alpha;
  double best_loss = std::numeric_limits<double>::infinity();

  for (int it = 0; it < opt.iters; ++it) {
    const auto alpha = softmax(w);
    const auto merged = merge(cs, snap_to_simplex(alpha));
    auto [loss, grad_theta] = val_loss_grad(merged);
    if (!std::isfinite(loss))
      throw std::runtime_error("gradient strategy: non-finite loss at iter " +
                               std::to_string(it));
    if (loss < best_loss) {
      best_loss = loss;
      best_alpha = alpha;
    }

    // dL/dalpha_i = <dL/dtheta, theta_i>
    std::vector<double> ga(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ti = cs.checkpoints[i].values;
      double acc = 0.0;
      for (std::size_t j = 0; j < ti.size(); ++j) acc += grad_theta[j] * ti[j];
      ga[i] = acc;
    }
    // Softmax Jacobian: dL/dw_i = alpha_i * (ga_i - sum_j alpha_j ga_j).
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += alpha[i] * ga[i];
    std::vector<double> gw(n);
    for (std::size_t i = 0; i < n; ++i) gw[i] = alpha[i] * (ga[i] - mean);

    if (opt.adaptive) {
      const double bc1 = 1.0 - std::pow(0.9, it + 1);
      const double bc2 = 1.0 - std::pow(0.999, it + 1);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = 0.9 * m[i] + 0.1 * gw[i];
        v[i] = 0.999 * v[i] + 0.001 * gw[i] * gw[i];
        w[i] -= opt.step * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) w[i] -= opt.step * gw[i];
    }
  }
  // Evaluate the final iterate too.
  {
    const auto alpha = softmax(w);
    const auto merged = merge(cs, snap_to_simplex(alpha));
    const double loss = val_loss_grad(merged).first;
    if (loss < best_loss) best_alpha = alpha;
  }
  return snap_to_simplex(std::move(best_alpha));
}

MergeCoefficients strategy_greedy(const CheckpointSet& cs,
                                  const LossFn& val_loss) {
  validate(cs);
  const std::size_t n = cs.size();
  const auto losses = per_checkpoint_losses(cs, val_loss);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return losses[a] < losses[b];
  });

  std::vector<int> count(n, 0);
  count[order.front()] = 1;
  int total = 1;
  double best_loss = losses[order.front()];

  auto soup_loss = [&](std::size_t candidate) {
    CheckpointSet trial;
    trial.checkpoints.reserve(static_cast<std::size_t>(total) + 1);
    std::vector<double> alphas;
    for (std::size_t i = 0; i < n; ++i) {
      int c = count[i] + (i == candidate ? 1 : 0);
      for (int k = 0; k < c; ++k) trial.checkpoints.push_back(cs.checkpoints[i]);
    }
    alphas.assign(trial.checkpoints.size(),
                  1.0 / static_cast<double>(trial.checkpoints.size()));
    return val_loss(merge(trial, {alphas}));
  };

  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t idx : order) {
      const double trial = soup_loss(idx);
      if (trial < best_loss) {
        best_loss = trial;
        ++count[idx];
        ++total;
      }
    }
  }

  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i)
    a[i] = static_cast<double>(count[i]) / total;
  return snap_to_simplex(std::move(a));
}

std::string_view to_string(MergeStrategy s) {
  switch (s) {
    case MergeStrategy::kAverage: return "average";
    case MergeStrategy::kInverseLoss: return "inverse_loss";
    case MergeStrategy::kGradient: return "gradient";
    case MergeStrategy::kGreedy: return "greedy";
  }
  return "unknown";
}

MergeStrategy merge_strategy_from_string(std::string_view s) {
  if (s == "average") return MergeStrategy::kAverage;
  if (s == "inverse_loss") return MergeStrategy::kInverseLoss;
  if (s == "gradient") return MergeStrategy::kGradient;
  if (s == "greedy") return MergeStrategy::kGreedy;
  throw std::invalid_argument("unknown merge strategy: " + std::string(s));
}

std::string_view to_string(ValSplit s) {
  return s == ValSplit::kInDomain ? "in_domain" : "ood";
}

ValSplit val_split_from_string(std::string_view s) {
  if (s == "in_domain" || s == "in") return ValSplit::kInDomain;
  if (s == "ood") return ValSplit::kOod;
  throw std::invalid_argument("unknown validation split: " + std::string(s));
}

ValidationSplits build_validation_splits(
    const std::vector<Episode>& expert_set,
    const std::vector<Episode>& dagger_set, Rng& rng,
    double holdout_fraction) {
  if (expert_set.empty() || dagger_set.empty())
    throw std::invalid_argument("validation splits: both sets must be nonempty");
  if (holdout_fraction <= 0 || holdout_fraction >= 1)
    throw std::invalid_argument("validation splits: bad holdout fraction");

  std::vector<std::size_t> idx(expert_set.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Fisher-Yates with the module's Rng keeps the split seed-stable.
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.uniform_index(i)]);

  const std::size_t held =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::floor(holdout_fraction *
                                              static_cast<double>(idx.size()))));
  ValidationSplits out;
  out.in_domain_val.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(held));
  out.train_expert.assign(idx.begin() + static_cast<std::ptrdiff_t>(held), idx.end());
  out.ood_val.resize(dagger_set.size());
  std::iota(out.ood_val.begin(), out.ood_val.end(), 0);

  std::sort(out.in_domain_val.begin(), out.in_domain_val.end());
  std::sort(out.train_expert.begin(), out.train_expert.end());
  for (std::size_t i : out.in_domain_val)
    if (std::binary_search(out.train_expert.begin(), out.train_expert.end(), i))
      throw std::runtime_error("validation splits: overlap detected");
  return out;
}

std::vector<std::vector<std::size_t>> partition_indices(std::size_t count,
                                                        std::size_t n,
                                                        Rng& rng) {
  if (n < 1 || n > count)
    throw std::invalid_argument("partition: need 1 <= n <= count");
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  std::vector<std::vector<std::size_t>> subsets(n);
  for (std::size_t i = 0; i < count; ++i)
    subsets[i % n].push_back(idx[i]);
  for (auto& s : subsets) std::sort(s.begin(), s.end());
  return subsets;
}

nlohmann::json ModelArithmeticReport::to_json() const {
  return {
      {"strategy", strategy},
      {"split", split},
      {"alphas", alphas},
      {"per_ckpt_loss", per_checkpoint_loss},
      {"merged_loss", merged_loss},
      {"baselines",
       {{"single_best", {{"index", single_best_index}, {"loss", single_best_loss}}},
        {"full_data", {{"loss", full_data_loss}}}}},
  };
}

ModelArithmeticResult run_model_arithmetic(
    const std::vector<std::vector<Episode>>& subsets,
    const std::vector<Episode>& in_domain_val,
    const std::vector<Episode>& ood_val, const ModelArithmeticConfig& cfg) {
  if (subsets.size() < 2)
    throw std::invalid_argument("model arithmetic: need n >= 2 subsets");

  // Resolve env shape from the data.
  const Episode& probe = [&]() -> const Episode& {
    for (const auto& s : subsets)
      if (!s.empty()) return s.front();
    throw std::invalid_argument("model arithmetic: all subsets empty");
  }();
  const int stage_count = probe.stage_count;
  const int action_dim = static_cast<int>(probe.actions.at(0).size());
  const MlpLayout layout = policy_layout(stage_count, cfg.chunk_len,
                                         action_dim, cfg.stage_aware,
                                         cfg.hidden);

  // One policy per subset, independent seeds.
  ModelArithmeticResult result;
  std::vector<Episode> union_set;
  Rng seed_rng(cfg.train.seed);
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (subsets[i].empty())
      throw std::invalid_argument("model arithmetic: empty subset");
    auto ds = build_bc_dataset(subsets[i], cfg.chunk_len, cfg.stage_aware);
    TrainConfig tc = cfg.train;
    tc.seed = seed_rng.split(i + 1).key();
    Rng init_rng(tc.seed);
    auto trained = train(Mlp::init(layout, init_rng), ds.samples, {}, tc);
    result.checkpoints.push_back(std::move(trained.params));
    union_set.insert(union_set.end(), subsets[i].begin(), subsets[i].end());
  }

  const auto& val_eps =
      cfg.split == ValSplit::kInDomain ? in_domain_val : ood_val;
  if (val_eps.empty())
    throw std::invalid_argument("model arithmetic: empty validation split");
  auto val_ds = build_bc_dataset(val_eps, cfg.chunk_len, cfg.stage_aware);
  LossFn val_loss = [&](const ParameterVector& p) {
    return validation_loss(p, layout, val_ds.samples);
  };
  LossGradFn val_loss_grad = [&](const ParameterVector& p) {
    std::vector<double> g;
    double l = validation_loss_and_grad(p, layout, val_ds.samples, g);
    return std::make_pair(l, std::move(g));
  };

  CheckpointSet cs;
  cs.checkpoints = result.checkpoints;
  for (std::size_t i = 0; i < subsets.size(); ++i)
    cs.labels.push_back("subset_" + std::to_string(i));

  ModelArithmeticReport& rep = result.report;
  rep.strategy = std::string(to_string(cfg.strategy));
  rep.split = std::string(to_string(cfg.split));
  for (const auto& ckpt : cs.checkpoints)
    rep.per_checkpoint_loss.push_back(val_loss(ckpt));
  cs.cached_losses = rep.per_checkpoint_loss;

  MergeCoefficients coeffs;
  switch (cfg.strategy) {
    case MergeStrategy::kAverage:
      coeffs = strategy_average(cs);
      break;
    case MergeStrategy::kInverseLoss:
      coeffs = strategy_inverse_loss(cs, val_loss, cfg.inverse_loss_p,
                                     cfg.inverse_loss_eps);
      break;
    case MergeStrategy::kGradient:
      coeffs = strategy_gradient(cs, val_loss_grad, cfg.gradient);
      break;
    case MergeStrategy::kGreedy:
      coeffs = strategy_greedy(cs, val_loss);
      break;
  }
  rep.alphas = coeffs.alphas;
  result.merged = merge(cs, coeffs);
  rep.merged_loss = val_loss(result.merged);

  // Baselines: single best (argmin individual loss, ties to lower index)
  // and a policy trained on the union of all subsets.
  rep.single_best_index = 0;
  for (std::size_t i = 1; i < rep.per_checkpoint_loss.size(); ++i)
    if (rep.per_checkpoint_loss[i] <
        rep.per_checkpoint_loss[rep.single_best_index])
      rep.single_best_index = i;
  rep.single_best_loss = rep.per_checkpoint_loss[rep.single_best_index];
  result.single_best = result.checkpoints[rep.single_best_index];

  {
    auto ds = build_bc_dataset(union_set, cfg.chunk_len, cfg.stage_aware);
    TrainConfig tc = cfg.train;
    tc.seed = seed_rng.split(0xF0DAULL).key();
    Rng init_rng(tc.seed);
    auto trained = train(Mlp::init(layout, init_rng), ds.samples, {}, tc);
    result.full_data = std::move(trained.params);
    rep.full_data_loss = val_loss(result.full_data);
  }
  return result;
}

}  // namespace kai0
