#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deepr/connection_store.hpp"
#include "deepr/matrix.hpp"
#include "deepr/soft_store.hpp"

namespace deepr {

/// Feed-forward architecture: rectifier hidden layers, softmax output.
struct NetworkSpec {
  std::vector<std::size_t> layer_sizes;

  /// Throws ConfigError unless there is at least one hidden layer and all
  /// sizes are positive.
  void validate() const;

  std::size_t inputs() const { return layer_sizes.front(); }
  std::size_t classes() const { return layer_sizes.back(); }
  std::size_t weight_layers() const { return layer_sizes.size() - 1; }
  std::vector<LayerShape> shapes() const { return make_layer_shapes(layer_sizes); }

  static NetworkSpec mnist() { return {{784, 300, 100, 10}}; }
};

struct SparseEntry {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double weight = 0.0;
};

/// Weights of one layer, either as a dense fan_in x fan_out matrix or as a
/// list of non-zero entries.
class LayerWeights {
 public:
  static LayerWeights dense(Matrix w);
  static LayerWeights sparse(std::size_t fan_in, std::size_t fan_out,
                             std::vector<SparseEntry> entries);

  std::size_t fan_in() const noexcept { return fan_in_; }
  std::size_t fan_out() const noexcept { return fan_out_; }
  bool is_dense() const noexcept { return dense_; }
  const Matrix& dense_matrix() const noexcept { return matrix_; }
  std::span<const SparseEntry> entries() const noexcept { return entries_; }

  /// x (B x fan_in) times W.
  Matrix apply(const Matrix& x) const;
  /// delta (B x fan_out) times W transposed.
  Matrix apply_transposed(const Matrix& delta) const;
  Matrix to_dense() const;

 private:
  bool dense_ = true;
  std::size_t fan_in_ = 0;
  std::size_t fan_out_ = 0;
  Matrix matrix_;
  std::vector<SparseEntry> entries_;
};

struct NetParams {
  std::vector<LayerWeights> weights;
  std::vector<std::vector<double>> biases;
};

/// Sparse view of the active connections of a store.
NetParams params_from(const ConnectionStore& store);
NetParams params_from(const SoftStore& store);

/// Fully materialized network used by the dense optimizers. A layer mask,
/// when present, marks permanently removed weights with 0.
struct DenseNet {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::vector<std::vector<std::uint8_t>> masks;

  NetParams params() const;
  std::size_t nonzero_weights() const;
  std::size_t total_weights() const;
  double connectivity() const;
  std::vector<double> layer_connectivity() const;
};

DenseNet dense_from(const ConnectionStore& store);

struct ForwardTrace {
  /// activations[l] is the input of weight layer l: the batch for l = 0,
  /// rectified hidden outputs otherwise.
  std::vector<Matrix> activations;
  /// pre_activations[l] = activations[l] * W_l + b_l.
  std::vector<Matrix> pre_activations;
  Matrix probabilities;

  std::size_t batch_size() const { return probabilities.rows(); }
};

/// Per-connection gradients dE/dtheta_k, aligned with `ids`, plus dense bias
/// gradients. Dormant connections are never listed.
struct GradientSet {
  std::vector<std::size_t> ids;
  std::vector<double> values;
  std::vector<std::vector<double>> bias;
};

struct DenseGradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

/// Probabilities are clamped to at least this before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

ForwardTrace forward(const NetworkSpec& spec, const NetParams& params, const Matrix& batch);

/// Mean negative log-probability of the true labels.
double cross_entropy(const ForwardTrace& trace, std::span<const int> labels);

/// Fraction of argmax predictions equal to the labels; ties go to the lowest class.
double accuracy(const ForwardTrace& trace, std::span<const int> labels);
std::vector<int> predictions(const ForwardTrace& trace);

/// dE/dz for every layer, where E is the batch-mean cross entropy.
std::vector<Matrix> backprop_deltas(const NetworkSpec& spec, const NetParams& params,
                                    const ForwardTrace& trace, std::span<const int> labels);

/// Gradients for the active connections of `store`, in store.active() order.
GradientSet backward(const NetworkSpec& spec, const ConnectionStore& store,
                     const NetParams& params, const ForwardTrace& trace,
                     std::span<const int> labels);
GradientSet backward(const NetworkSpec& spec, const ConnectionStore& store,
                     const ForwardTrace& trace, std::span<const int> labels);

/// Gradients for connections with theta >= 0, ascending by id.
GradientSet backward(const NetworkSpec& spec, const SoftStore& store, const NetParams& params,
                     const ForwardTrace& trace, std::span<const int> labels);

DenseGradients backward_dense(const NetworkSpec& spec, const NetParams& params,
                              const ForwardTrace& trace, std::span<const int> labels);

struct SmoothWeight {
  double weight = 0.0;
  double derivative = 0.0;
};

/// Softplus relaxation of the rectified parameter-to-weight map:
/// w = s * softplus(gamma * theta) / gamma, dw/dtheta = s * sigmoid(gamma * theta).
/// Converges to w = s * max(theta, 0) as gamma grows, with error <= ln2 / gamma.
SmoothWeight smooth_weight_map(double theta, int sign, double gamma);

}  // namespace deepr
