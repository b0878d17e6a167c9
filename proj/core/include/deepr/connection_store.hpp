#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "deepr/matrix.hpp"
#include "deepr/rng.hpp"

namespace deepr {

/// One weight matrix of a feed-forward network, viewed as a contiguous
/// block of flat connection ids [offset, offset + fan_in * fan_out).
/// Connection (row, col) of the layer has id offset + row * fan_out + col.
struct LayerShape {
  std::size_t index = 0;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::size_t offset = 0;

  std::size_t size() const noexcept { return fan_in * fan_out; }
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Builds contiguous layer shapes from neuron counts, e.g. {784, 300, 100, 10}.
std::vector<LayerShape> make_layer_shapes(std::span<const std::size_t> layer_sizes);

std::size_t total_connections(std::span<const LayerShape> layers);

struct ConnectionCoord {
  std::size_t layer = 0;
  std::size_t row = 0;
  std::size_t col = 0;
};

ConnectionCoord locate(std::span<const LayerShape> layers, std::size_t id);

/// How a connection obtains its sign when (re)activated by replenish().
enum class SignPolicy {
  redraw,  ///< fresh uniform draw from {-1, +1} at every activation
  keep,    ///< the sign stored for the connection is reused
};

/// Connection-centric parameters under a hard budget of K active connections.
///
/// Every potential connection k has a parameter theta[k] and a sign
/// sign[k]. Active connections carry weight sign[k] * theta[k] with
/// theta[k] >= 0; dormant connections carry weight 0. The active set is a
/// compact index list plus a position table (which doubles as the membership
/// test), so removal is O(1) and replenishment can reject against it.
///
/// Biases are dense per layer and not part of the connection accounting.
class ConnectionStore {
 public:
  static constexpr std::uint32_t kDormant = std::numeric_limits<std::uint32_t>::max();

  ConnectionStore(std::vector<LayerShape> layers, std::size_t budget,
                  SignPolicy policy = SignPolicy::redraw);

  std::size_t potential() const noexcept { return theta_.size(); }  // M
  std::size_t budget() const noexcept { return budget_; }           // K
  std::span<const LayerShape> layers() const noexcept { return layers_; }
  SignPolicy sign_policy() const noexcept { return policy_; }

  std::size_t active_count() const noexcept { return active_.size(); }
  std::span<const std::size_t> active() const noexcept { return active_; }
  bool is_active(std::size_t k) const { return position_.at(k) != kDormant; }

  double theta(std::size_t k) const { return theta_.at(k); }
  int sign(std::size_t k) const { return sign_.at(k); }
  double weight(std::size_t k) const;

  /// Direct parameter access for optimizer steps; index must be active.
  double& theta_ref(std::size_t k) { return theta_[k]; }

  /// Activates a dormant connection with the given parameter and sign.
  void activate(std::size_t k, double theta, int sign);

  /// Removes k from the active set. Throws ContractViolation if k is dormant.
  void set_dormant(std::size_t k);

  /// Activates uniformly chosen dormant connections until exactly K are
  /// active. New parameters start at 0. Returns the number activated;
  /// `per_layer`, when given, is incremented per activation.
  std::size_t replenish(RngStream& rng, std::vector<std::size_t>* per_layer = nullptr);

  /// Dense fan_in x fan_out matrix with sign*theta on active entries, 0 elsewhere.
  Matrix materialize_weights(std::size_t layer) const;

  double connectivity_fraction() const;
  std::vector<std::size_t> layer_active_counts() const;
  std::vector<double> layer_connectivity() const;

  std::vector<std::vector<double>>& biases() noexcept { return biases_; }
  const std::vector<std::vector<double>>& biases() const noexcept { return biases_; }

  /// Signs of all M connections (dormant ones included).
  std::span<const std::int8_t> signs() const noexcept { return sign_; }
  void set_sign(std::size_t k, int sign);

  /// Equality over the observable state: shapes, budget, active list
  /// order, active parameters, all signs and biases.
  friend bool operator==(const ConnectionStore& a, const ConnectionStore& b);

 private:
  std::vector<LayerShape> layers_;
  std::size_t budget_;
  SignPolicy policy_;
  std::vector<double> theta_;
  std::vector<std::int8_t> sign_;
  std::vector<std::uint32_t> position_;
  std::vector<std::size_t> active_;
  std::vector<std::vector<double>> biases_;
};

/// Per-layer active fractions: multiplier * p0 clipped to 1.
/// Throws ConfigError unless 0 < p0 <= 1.
std::vector<double> allocate_fractions(double p0, std::span<const double> multipliers);

/// Default multipliers for the 3-matrix MNIST perceptron.
std::vector<double> mnist_default_multipliers();

/// round-half-to-even(fraction * layer size) per layer.
std::vector<std::size_t> active_counts_for(std::span<const LayerShape> layers,
                                           std::span<const double> fractions);

/// Uniformly chooses `count` distinct ids in [0, n) (Floyd's algorithm);
/// result is sorted ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    RngStream& rng);

/// Initial sparse store: per layer exactly round(fraction * size) uniformly
/// chosen active connections with theta = |N(0,1)| / sqrt(fan_in) and a
/// uniform sign. K is the sum of the per-layer counts.
ConnectionStore init_connectivity(std::vector<LayerShape> layers,
                                  std::span<const double> fractions, RngStream& rng,
                                  SignPolicy policy = SignPolicy::redraw);

}  // namespace deepr
