#include "kai0/mlp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kai0 {

std::size_t MlpLayout::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    n += static_cast<std::size_t>(dims[l] + 1) *
         static_cast<std::size_t>(dims[l + 1]);
  return n;
}

std::string MlpLayout::layout_id() const {
  std::ostringstream os;
  os << "mlp:";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << '-';
    os << dims[i];
  }
  os << ":tanh";
  if (!tag.empty()) os << ':' << tag;
  return os.str();
}

MlpLayout MlpLayout::from_layout_id(const std::string& id) {
  MlpLayout layout;
  std::istringstream is(id);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(is, part, ':')) parts.push_back(part);
  if (parts.size() < 3 || parts[0] != "mlp" || parts[2] != "tanh")
    throw std::invalid_argument("unrecognized layout id: " + id);
  std::istringstream ds(parts[1]);
  while (std::getline(ds, part, '-')) layout.dims.push_back(std::stoi(part));
  if (layout.dims.size() < 2)
    throw std::invalid_argument("layout id has fewer than two dims: " + id);
  if (parts.size() > 3) {
    layout.tag = parts[3];
    for (std::size_t i = 4; i < parts.size(); ++i) layout.tag += ':' + parts[i];
  }
  return layout;
}

bool operator==(const MlpLayout& a, const MlpLayout& b) {
  return a.dims == b.dims && a.tag == b.tag;
}

Mlp::Mlp(MlpLayout layout, ParameterVector params)
    : layout_(std::move(layout)), params_(std::move(params)) {
  if (params_.layout_id != layout_.layout_id())
    throw std::invalid_argument("Mlp: params layout '" + params_.layout_id +
                                "' does not match '" + layout_.layout_id() +
                                "'");
  if (params_.values.size() != layout_.param_count())
    throw std::invalid_argument("Mlp: parameter count mismatch");
}

Mlp Mlp::init(const MlpLayout& layout, Rng& rng) {
  ParameterVector p;
  p.layout_id = layout.layout_id();
  p.values.resize(layout.param_count());
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < layout.dims.size(); ++l) {
    const int fan_in = layout.dims[l];
    const int fan_out = layout.dims[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_in * fan_out; ++i)
      p.values[at++] = rng.uniform(-bound, bound);
    for (int j = 0; j < fan_out; ++j) p.values[at++] = 0.0;
  }
  return Mlp(layout, std::move(p));
}

namespace {

// Forward pass retaining post-activation values per layer.
void forward_acts(const MlpLayout& layout, const std::vector<double>& params,
                  const std::vector<double>& input,
                  std::vector<std::vector<double>>& acts) {
  acts.assign(layout.dims.size(), {});
  acts[0] = input;
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < layout.dims.size(); ++l) {
    const int fan_in = layout.dims[l];
    const int fan_out = layout.dims[l + 1];
    const bool last = (l + 2 == layout.dims.size());
    const double* w = params.data() + at;
    const double* b = w + static_cast<std::size_t>(fan_in) * fan_out;
    auto& out = acts[l + 1];
    out.assign(static_cast<std::size_t>(fan_out), 0.0);
    const auto& x = acts[l];
    for (int i = 0; i < fan_in; ++i) {
      const double xi = x[static_cast<std::size_t>(i)];
      const double* wrow = w + static_cast<std::size_t>(i) * fan_out;
      for (int j = 0; j < fan_out; ++j) out[static_cast<std::size_t>(j)] += xi * wrow[j];
    }
    for (int j = 0; j < fan_out; ++j) {
      double z = out[static_cast<std::size_t>(j)] + b[j];
      out[static_cast<std::size_t>(j)] = last ? z : std::tanh(z);
    }
    at += static_cast<std::size_t>(fan_in + 1) * fan_out;
  }
}

// Backprop one sample given dL/d(output); accumulates into grad.
void backward_acc(const MlpLayout& layout, const std::vector<double>& params,
                  const std::vector<std::vector<double>>& acts,
                  std::vector<double> delta, std::vector<double>& grad) {
  // Offsets of each layer's weight block.
  std::size_t at = params.size();
  for (std::size_t lp = layout.dims.size() - 1; lp-- > 0;) {
    const int fan_in = layout.dims[lp];
    const int fan_out = layout.dims[lp + 1];
    at -= static_cast<std::size_t>(fan_in + 1) * fan_out;
    const double* w = params.data() + at;
    double* gw = grad.data() + at;
    double* gb = gw + static_cast<std::size_t>(fan_in) * fan_out;
    const auto& x = acts[lp];

    for (int j = 0; j < fan_out; ++j) gb[j] += delta[static_cast<std::size_t>(j)];
    std::vector<double> prev(static_cast<std::size_t>(fan_in), 0.0);
    for (int i = 0; i < fan_in; ++i) {
      const double xi = x[static_cast<std::size_t>(i)];
      const double* wrow = w + static_cast<std::size_t>(i) * fan_out;
      double* grow = gw + static_cast<std::size_t>(i) * fan_out;
      double acc = 0.0;
      for (int j = 0; j < fan_out; ++j) {
        grow[j] += xi * delta[static_cast<std::size_t>(j)];
        acc += wrow[j] * delta[static_cast<std::size_t>(j)];
      }
      prev[static_cast<std::size_t>(i)] = acc;
    }
    if (lp > 0) {
      // Through the tanh of the layer below.
      for (int i = 0; i < fan_in; ++i) {
        const double h = x[static_cast<std::size_t>(i)];
        prev[static_cast<std::size_t>(i)] *= (1.0 - h * h);
      }
    }
    delta = std::move(prev);
  }
}

}  // namespace

std::vector<double> Mlp::forward(const std::vector<double>& input) const {
  if (static_cast<int>(input.size()) != layout_.in_dim())
    throw std::invalid_argument("Mlp forward: input dimension mismatch");
  std::vector<std::vector<double>> acts;
  forward_acts(layout_, params_.values, input, acts);
  return acts.back();
}

double bc_loss_and_grad(const Mlp& net, const std::vector<Sample>& batch,
                        const std::vector<double>& weights,
                        std::vector<double>& grad) {
  if (batch.empty())
    throw std::invalid_argument("bc_loss_and_grad: empty batch");
  if (!weights.empty() && weights.size() != batch.size())
    throw std::invalid_argument("bc_loss_and_grad: weight count mismatch");

  double wsum = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b)
    wsum += weights.empty() ? 1.0 : weights[b];
  if (wsum <= 0.0)
    throw std::invalid_argument("bc_loss_and_grad: all-zero weight sum");

  const auto& layout = net.layout();
  const auto& params = net.params().values;
  grad.assign(params.size(), 0.0);
  double loss = 0.0;
  std::vector<std::vector<double>> acts;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double w = weights.empty() ? 1.0 : weights[b];
    if (w == 0.0) continue;
    const auto& s = batch[b];
    if (static_cast<int>(s.input.size()) != layout.in_dim() ||
        static_cast<int>(s.target.size()) != layout.out_dim())
      throw std::invalid_argument("bc_loss_and_grad: sample dim mismatch");
    forward_acts(layout, params, s.input, acts);
    const auto& out = acts.back();
    std::vector<double> delta(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double err = out[j] - s.target[j];
      loss += w * err * err;
      delta[j] = 2.0 * w * err / wsum;
    }
    backward_acc(layout, params, acts, std::move(delta), grad);
  }
  return loss / wsum;
}

double validation_loss(const ParameterVector& params, const MlpLayout& layout,
                       const std::vector<Sample>& dataset) {
  if (dataset.empty())
    throw std::invalid_argument("validation_loss: empty dataset");
  Mlp net(layout, params);
  double loss = 0.0;
  for (const auto& s : dataset) {
    const auto out = net.forward(s.input);
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double err = out[j] - s.target[j];
      loss += err * err;
    }
  }
  return loss / static_cast<double>(dataset.size());
}

double validation_loss_and_grad(const ParameterVector& params,
                                const MlpLayout& layout,
                                const std::vector<Sample>& dataset,
                                std::vector<double>& grad) {
  Mlp net(layout, params);
  return bc_loss_and_grad(net, dataset, {}, grad);
}

}  // namespace kai0
