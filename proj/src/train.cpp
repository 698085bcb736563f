#include "kai0/train.hpp"

#include <cmath>
#include <stdexcept>

#include "kai0/rng.hpp"

namespace kai0 {

double lr_at(const TrainConfig& cfg, int step) {
  const double floor = cfg.lr * cfg.lr_floor;
  const int d = std::max(cfg.cosine_decay_steps, 1);
  if (step >= d) return floor;
  const double c = 0.5 * (1.0 + std::cos(3.141592653589793 *
                                         static_cast<double>(step) / d));
  return floor + (cfg.lr - floor) * c;
}

TrainResult train(const Mlp& init, const std::vector<Sample>& dataset,
                  const std::vector<double>& weights, const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (!weights.empty() && weights.size() != dataset.size())
    throw std::invalid_argument("train: weight count mismatch");
  if (cfg.steps < 1 || cfg.batch < 1 || cfg.lr <= 0)
    throw std::invalid_argument("train: invalid config");
  if (!weights.empty()) {
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (wsum <= 0.0)
      throw std::invalid_argument("train: all-zero weight sum");
  }

  Mlp net = init;
  auto& params = net.mutable_params().values;
  const std::size_t n_params = params.size();
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0), grad;
  Rng rng = Rng(cfg.seed).split(0x747261696EULL);

  TrainResult result;
  const std::size_t batch_size =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.batch),
                            dataset.size());
  std::vector<Sample> batch(batch_size);
  std::vector<double> batch_w;

  for (int step = 0; step < cfg.steps; ++step) {
    batch_w.clear();
    double wsum = 0.0;
    for (std::size_t b = 0; b < batch_size; ++b) {
      const auto idx = rng.uniform_index(dataset.size());
      batch[b] = dataset[idx];
      const double w = weights.empty() ? 1.0 : weights[idx];
      batch_w.push_back(w);
      wsum += w;
    }
    if (wsum <= 0.0) continue;  // a λ=0 batch carries no signal

    const double loss = bc_loss_and_grad(net, batch, batch_w, grad);
    if (!std::isfinite(loss))
      throw std::runtime_error("train: loss diverged at step " +
                               std::to_string(step));
    if (step % 100 == 0 || step + 1 == cfg.steps)
      result.curve.emplace_back(step, loss);

    double norm_sq = 0.0;
    for (double g : grad) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    if (cfg.grad_clip > 0 && norm > cfg.grad_clip) {
      const double scale = cfg.grad_clip / norm;
      for (double& g : grad) g *= scale;
    }

    const double lr = lr_at(cfg, step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, step + 1);
    const double bc2 = 1.0 - std::pow(cfg.beta2, step + 1);
    for (std::size_t i = 0; i < n_params; ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      params[i] -= lr * mh / (std::sqrt(vh) + cfg.adam_eps);
    }
  }
  result.params = net.params();
  return result;
}

std::vector<double> make_policy_obs(const std::vector<double>& position,
                                    int stage_label, int stage_count,
                                    bool stage_aware) {
  std::vector<double> obs(position.begin(), position.end());
  obs.resize(position.size() + static_cast<std::size_t>(stage_count), 0.0);
  if (stage_aware) {
    if (stage_label < 0 || stage_label >= stage_count)
      throw std::invalid_argument("make_policy_obs: stage out of range");
    obs[position.size() + static_cast<std::size_t>(stage_label)] = 1.0;
  }
  return obs;
}

MlpLayout policy_layout(int stage_count, int chunk_len, int action_dim,
                        bool stage_aware, const std::vector<int>& hidden) {
  MlpLayout layout;
  layout.dims.push_back(2 + stage_count);
  for (int h : hidden) layout.dims.push_back(h);
  layout.dims.push_back(chunk_len * action_dim);
  layout.tag = stage_aware ? "obs=stage" : "obs=blind";
  return layout;
}

bool layout_is_stage_aware(const MlpLayout& layout) {
  return layout.tag.find("obs=stage") != std::string::npos;
}

BcDataset build_bc_dataset(const std::vector<Episode>& episodes, int chunk_len,
                           bool stage_aware) {
  if (chunk_len < 1)
    throw std::invalid_argument("build_bc_dataset: chunk_len < 1");
  BcDataset ds;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const Episode& ep = episodes[e];
    validate(ep);
    if (ep.actions.empty()) continue;
    const int dim = static_cast<int>(ep.actions[0].size());
    if (ds.action_dim == 0) ds.action_dim = dim;
    if (dim != ds.action_dim)
      throw std::invalid_argument("build_bc_dataset: mixed action dims");
    for (std::size_t t = 0; t < ep.actions.size(); ++t) {
      Sample s;
      s.input = make_policy_obs(ep.states[t], ep.stage_labels[t],
                                ep.stage_count, stage_aware);
      s.target.assign(static_cast<std::size_t>(chunk_len * dim), 0.0);
      for (int k = 0; k < chunk_len; ++k) {
        const std::size_t src = t + static_cast<std::size_t>(k);
        if (src >= ep.actions.size()) break;  // zero-pad past the end
        for (int d = 0; d < dim; ++d)
          s.target[static_cast<std::size_t>(k * dim + d)] =
              ep.actions[src][static_cast<std::size_t>(d)];
      }
      ds.samples.push_back(std::move(s));
      ds.origin.emplace_back(e, t);
    }
  }
  return ds;
}

ActionChunk chunk_from_output(const std::vector<double>& out, int action_dim,
                              std::int64_t produced_at_tick) {
  if (action_dim < 1 || out.size() % static_cast<std::size_t>(action_dim) != 0)
    throw std::invalid_argument("chunk_from_output: bad output size");
  ActionChunk chunk;
  chunk.produced_at_tick = produced_at_tick;
  const std::size_t k = out.size() / static_cast<std::size_t>(action_dim);
  chunk.actions.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    chunk.actions[i].assign(
        out.begin() + static_cast<std::ptrdiff_t>(i * action_dim),
        out.begin() + static_cast<std::ptrdiff_t>((i + 1) * action_dim));
  return chunk;
}

std::vector<double> weights_from_indicators(const std::vector<int>& indicators,
                                            double negative_weight) {
  std::vector<double> w(indicators.size());
  for (std::size_t i = 0; i < indicators.size(); ++i)
    w[i] = indicators[i] ? 1.0 : negative_weight;
  return w;
}

}  // namespace kai0
