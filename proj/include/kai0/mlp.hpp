#pragma once

#include <string>
#include <vector>

#include "kai0/params.hpp"
#include "kai0/rng.hpp"

namespace kai0 {

/// Fully-connected tanh network shape. dims = [in, hidden..., out]; the
/// output layer is linear. tag carries contract notes (observation mode,
/// estimator kind) and is baked into the layout id so checkpoints are
/// self-describing.
struct MlpLayout {
  std::vector<int> dims;
  std::string tag;

  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
  std::size_t layer_count() const { return dims.size() - 1; }
  std::size_t param_count() const;
  std::string layout_id() const;

  static MlpLayout from_layout_id(const std::string& id);
};

bool operator==(const MlpLayout& a, const MlpLayout& b);

/// One regression sample.
struct Sample {
  std::vector<double> input;
  std::vector<double> target;
};

/// MLP over flat parameters: per layer, weights (fan_in x fan_out,
/// input-major) then biases. tanh on hidden layers, linear output head.
class Mlp {
 public:
  Mlp(MlpLayout layout, ParameterVector params);

  /// Glorot-uniform weights, zero biases; deterministic per rng stream.
  static Mlp init(const MlpLayout& layout, Rng& rng);

  const MlpLayout& layout() const { return layout_; }
  const ParameterVector& params() const { return params_; }
  ParameterVector& mutable_params() { return params_; }

  std::vector<double> forward(const std::vector<double>& input) const;

 private:
  MlpLayout layout_;
  ParameterVector params_;
};

/// Weighted squared-error objective over a batch:
///   loss = sum_b w_b * ||f(x_b) - y_b||^2 / sum_b w_b
/// grad (same length as params) is produced by analytic backprop in batch
/// order. weights may be empty (all ones). Throws on an all-zero weight sum.
double bc_loss_and_grad(const Mlp& net, const std::vector<Sample>& batch,
                        const std::vector<double>& weights,
                        std::vector<double>& grad);

/// Unweighted mean squared error over the dataset. Pure.
double validation_loss(const ParameterVector& params, const MlpLayout& layout,
                       const std::vector<Sample>& dataset);

/// validation_loss plus its analytic gradient w.r.t. the parameters.
double validation_loss_and_grad(const ParameterVector& params,
                                const MlpLayout& layout,
                                const std::vector<Sample>& dataset,
                                std::vector<double>& grad);

}  // namespace kai0
