#include "deepr/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepr/error.hpp"

namespace deepr {

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 3) {
    throw ConfigError("network needs at least one hidden layer, got " +
                      std::to_string(layer_sizes.size()) + " layer sizes");
  }
  for (const std::size_t n : layer_sizes) {
    if (n == 0) throw ConfigError("layer sizes must be positive");
  }
}

LayerWeights LayerWeights::dense(Matrix w) {
  LayerWeights out;
  out.dense_ = true;
  out.fan_in_ = w.rows();
  out.fan_out_ = w.cols();
  out.matrix_ = std::move(w);
  return out;
}

LayerWeights LayerWeights::sparse(std::size_t fan_in, std::size_t fan_out,
                                  std::vector<SparseEntry> entries) {
  for (const auto& e : entries) {
    require(e.row < fan_in && e.col < fan_out, "LayerWeights::sparse: entry out of range");
  }
  LayerWeights out;
  out.dense_ = false;
  out.fan_in_ = fan_in;
  out.fan_out_ = fan_out;
  out.entries_ = std::move(entries);
  return out;
}

Matrix LayerWeights::apply(const Matrix& x) const {
  require(x.cols() == fan_in_, "LayerWeights::apply: input width " + std::to_string(x.cols()) +
                                   " != fan_in " + std::to_string(fan_in_));
  if (dense_) return matmul(x, matrix_);
  Matrix out(x.rows(), fan_out_);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto in = x.row(b);
    auto o = out.row(b);
    for (const auto& e : entries_) o[e.col] += in[e.row] * e.weight;
  }
  return out;
}

Matrix LayerWeights::apply_transposed(const Matrix& delta) const {
  require(delta.cols() == fan_out_, "LayerWeights::apply_transposed: width mismatch");
  if (dense_) return matmul_a_bt(delta, matrix_);
  Matrix out(delta.rows(), fan_in_);
  for (std::size_t b = 0; b < delta.rows(); ++b) {
    const auto d = delta.row(b);
    auto o = out.row(b);
    for (const auto& e : entries_) o[e.row] += d[e.col] * e.weight;
  }
  return out;
}

Matrix LayerWeights::to_dense() const {
  if (dense_) return matrix_;
  Matrix w(fan_in_, fan_out_);
  for (const auto& e : entries_) w(e.row, e.col) += e.weight;
  return w;
}

NetParams params_from(const ConnectionStore& store) {
  const auto layers = store.layers();
  std::vector<std::vector<SparseEntry>> entries(layers.size());
  for (const std::size_t k : store.active()) {
    const auto c = locate(layers, k);
    entries[c.layer].push_back({static_cast<std::uint32_t>(c.row),
                                static_cast<std::uint32_t>(c.col), store.weight(k)});
  }
  NetParams params;
  for (const auto& layer : layers) {
    params.weights.push_back(
        LayerWeights::sparse(layer.fan_in, layer.fan_out, std::move(entries[layer.index])));
  }
  params.biases = store.biases();
  return params;
}

NetParams params_from(const SoftStore& store) {
  NetParams params;
  const auto thetas = store.thetas();
  const auto signs = store.signs();
  for (const auto& layer : store.layers()) {
    std::vector<SparseEntry> entries;
    for (std::size_t local = 0; local < layer.size(); ++local) {
      const std::size_t k = layer.offset + local;
      if (thetas[k] < 0.0) continue;
      entries.push_back({static_cast<std::uint32_t>(local / layer.fan_out),
                         static_cast<std::uint32_t>(local % layer.fan_out),
                         signs[k] * thetas[k]});
    }
    params.weights.push_back(LayerWeights::sparse(layer.fan_in, layer.fan_out, std::move(entries)));
  }
  params.biases = store.biases();
  return params;
}

NetParams DenseNet::params() const {
  NetParams p;
  for (const auto& w : weights) p.weights.push_back(LayerWeights::dense(w));
  p.biases = biases;
  return p;
}

std::size_t DenseNet::nonzero_weights() const {
  std::size_t n = 0;
  for (const auto& w : weights)
    for (const double v : w.data()) n += (v != 0.0);
  return n;
}

std::size_t DenseNet::total_weights() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  return n;
}

double DenseNet::connectivity() const {
  const std::size_t total = total_weights();
  return total == 0 ? 0.0 : static_cast<double>(nonzero_weights()) / static_cast<double>(total);
}

std::vector<double> DenseNet::layer_connectivity() const {
  std::vector<double> out;
  for (const auto& w : weights) {
    const auto nz = std::count_if(w.data().begin(), w.data().end(), [](double v) { return v != 0.0; });
    out.push_back(static_cast<double>(nz) / static_cast<double>(w.size()));
  }
  return out;
}

DenseNet dense_from(const ConnectionStore& store) {
  DenseNet net;
  for (const auto& layer : store.layers()) net.weights.push_back(store.materialize_weights(layer.index));
  net.biases = store.biases();
  return net;
}

namespace {

void check_shapes(const NetworkSpec& spec, const NetParams& params) {
  const std::size_t n = spec.weight_layers();
  require(params.weights.size() == n && params.biases.size() == n,
          "network parameters do not match the layer count");
  for (std::size_t l = 0; l < n; ++l) {
    require(params.weights[l].fan_in() == spec.layer_sizes[l] &&
                params.weights[l].fan_out() == spec.layer_sizes[l + 1] &&
                params.biases[l].size() == spec.layer_sizes[l + 1],
            "layer " + std::to_string(l) + " parameters do not match the network spec");
  }
}

void softmax_rows(Matrix& z) {
  for (std::size_t b = 0; b < z.rows(); ++b) {
    auto r = z.row(b);
    const double mx = *std::max_element(r.begin(), r.end());
    double sum = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : r) v /= sum;
  }
}

void check_labels(const ForwardTrace& trace, std::span<const int> labels) {
  require(labels.size() == trace.batch_size(), "label count does not match the batch size");
  const int classes = static_cast<int>(trace.probabilities.cols());
  for (const int y : labels) require(y >= 0 && y < classes, "label out of range");
}

}  // namespace

ForwardTrace forward(const NetworkSpec& spec, const NetParams& params, const Matrix& batch) {
  check_shapes(spec, params);
  require(batch.cols() == spec.inputs(), "forward: batch has " + std::to_string(batch.cols()) +
                                             " columns, network expects " +
                                             std::to_string(spec.inputs()));
  require(all_finite(batch), "forward: non-finite input");

  ForwardTrace trace;
  const std::size_t n = spec.weight_layers();
  trace.activations.reserve(n);
  trace.pre_activations.reserve(n);
  trace.activations.push_back(batch);
  for (std::size_t l = 0; l < n; ++l) {
    Matrix z = params.weights[l].apply(trace.activations[l]);
    const auto& bias = params.biases[l];
    for (std::size_t b = 0; b < z.rows(); ++b) {
      auto r = z.row(b);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
    }
    trace.pre_activations.push_back(z);
    if (l + 1 < n) {
      for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
      trace.activations.push_back(std::move(z));
    } else {
      softmax_rows(z);
      trace.probabilities = std::move(z);
    }
  }
  return trace;
}

double cross_entropy(const ForwardTrace& trace, std::span<const int> labels) {
  check_labels(trace, labels);
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const double p = trace.probabilities(b, static_cast<std::size_t>(labels[b]));
    sum -= std::log(std::max(p, kProbabilityFloor));
  }
  return sum / static_cast<double>(labels.size());
}

std::vector<int> predictions(const ForwardTrace& trace) {
  std::vector<int> out;
  out.reserve(trace.batch_size());
  for (std::size_t b = 0; b < trace.batch_size(); ++b) {
    const auto r = trace.probabilities.row(b);
    // max_element returns the first maximum
    out.push_back(static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin()));
  }
  return out;
}

double accuracy(const ForwardTrace& trace, std::span<const int> labels) {
  check_labels(trace, labels);
  if (labels.empty()) return 0.0;
  const auto pred = predictions(trace);
  std::size_t correct = 0;
  for (std::size_t b = 0; b < labels.size(); ++b) correct += (pred[b] == labels[b]);
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::vector<Matrix> backprop_deltas(const NetworkSpec& spec, const NetParams& params,
                                    const ForwardTrace& trace, std::span<const int> labels) {
  check_shapes(spec, params);
  check_labels(trace, labels);
  const std::size_t n = spec.weight_layers();
  const std::size_t batch = trace.batch_size();
  std::vector<Matrix> deltas(n);

  Matrix top = trace.probabilities;
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    auto r = top.row(b);
    r[static_cast<std::size_t>(labels[b])] -= 1.0;
    for (double& v : r) v *= inv_b;
  }
  deltas[n - 1] = std::move(top);

  for (std::size_t l = n - 1; l > 0; --l) {
    Matrix d = params.weights[l].apply_transposed(deltas[l]);
    const auto z = trace.pre_activations[l - 1].data();
    auto dv = d.data();
    for (std::size_t i = 0; i < dv.size(); ++i) {
      if (!(z[i] > 0.0)) dv[i] = 0.0;
    }
    deltas[l - 1] = std::move(d);
  }
  return deltas;
}

namespace {

std::vector<std::vector<double>> bias_gradients(const std::vector<Matrix>& deltas) {
  std::vector<std::vector<double>> out;
  for (const auto& d : deltas) {
    std::vector<double> g(d.cols(), 0.0);
    for (std::size_t b = 0; b < d.rows(); ++b) {
      const auto r = d.row(b);
      for (std::size_t j = 0; j < r.size(); ++j) g[j] += r[j];
    }
    out.push_back(std::move(g));
  }
  return out;
}

double weight_gradient(const ForwardTrace& trace, const std::vector<Matrix>& deltas,
                       const ConnectionCoord& c) {
  const Matrix& a = trace.activations[c.layer];
  const Matrix& d = deltas[c.layer];
  double g = 0.0;
  for (std::size_t b = 0; b < a.rows(); ++b) g += a(b, c.row) * d(b, c.col);
  return g;
}

}  // namespace

GradientSet backward(const NetworkSpec& spec, const ConnectionStore& store,
                     const NetParams& params, const ForwardTrace& trace,
                     std::span<const int> labels) {
  const auto deltas = backprop_deltas(spec, params, trace, labels);
  GradientSet grads;
  const auto active = store.active();
  grads.ids.assign(active.begin(), active.end());
  grads.values.reserve(active.size());
  const auto layers = store.layers();
  for (const std::size_t k : active) {
    grads.values.push_back(store.sign(k) * weight_gradient(trace, deltas, locate(layers, k)));
  }
  grads.bias = bias_gradients(deltas);
  return grads;
}

GradientSet backward(const NetworkSpec& spec, const ConnectionStore& store,
                     const ForwardTrace& trace, std::span<const int> labels) {
  return backward(spec, store, params_from(store), trace, labels);
}

GradientSet backward(const NetworkSpec& spec, const SoftStore& store, const NetParams& params,
                     const ForwardTrace& trace, std::span<const int> labels) {
  const auto deltas = backprop_deltas(spec, params, trace, labels);
  GradientSet grads;
  const auto thetas = store.thetas();
  for (const auto& layer : store.layers()) {
    for (std::size_t local = 0; local < layer.size(); ++local) {
      const std::size_t k = layer.offset + local;
      if (thetas[k] < 0.0) continue;
      const ConnectionCoord c{layer.index, local / layer.fan_out, local % layer.fan_out};
      grads.ids.push_back(k);
      grads.values.push_back(store.sign(k) * weight_gradient(trace, deltas, c));
    }
  }
  grads.bias = bias_gradients(deltas);
  return grads;
}

DenseGradients backward_dense(const NetworkSpec& spec, const NetParams& params,
                              const ForwardTrace& trace, std::span<const int> labels) {
  const auto deltas = backprop_deltas(spec, params, trace, labels);
  DenseGradients grads;
  for (std::size_t l = 0; l < deltas.size(); ++l) {
    grads.weights.push_back(matmul_at_b(trace.activations[l], deltas[l]));
  }
  grads.bias = bias_gradients(deltas);
  return grads;
}

SmoothWeight smooth_weight_map(double theta, int sign, double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0, "smooth_weight_map: gamma must be finite and positive");
  require(sign == 1 || sign == -1, "smooth_weight_map: sign must be +1 or -1");
  const double x = gamma * theta;
  // softplus(x) = max(x, 0) + log1p(exp(-|x|)) never overflows
  const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  const double sigmoid = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return {sign * softplus / gamma, sign * sigmoid};
}

}  // namespace deepr
