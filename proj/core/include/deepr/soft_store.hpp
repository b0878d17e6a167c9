#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deepr/connection_store.hpp"
#include "deepr/matrix.hpp"
#include "deepr/rng.hpp"

namespace deepr {

/// Parameter store without a connection budget: every one of the M
/// connections keeps a parameter, theta >= theta_min. Connection k is active
/// iff theta[k] >= 0, in which case its weight is sign[k] * theta[k].
class SoftStore {
 public:
  SoftStore(std::vector<LayerShape> layers, double theta_min);

  std::size_t potential() const noexcept { return theta_.size(); }
  std::span<const LayerShape> layers() const noexcept { return layers_; }
  double theta_min() const noexcept { return theta_min_; }

  bool is_active(std::size_t k) const { return theta_.at(k) >= 0.0; }
  double theta(std::size_t k) const { return theta_.at(k); }
  int sign(std::size_t k) const { return sign_.at(k); }
  double weight(std::size_t k) const;

  std::span<double> thetas() noexcept { return theta_; }
  std::span<const double> thetas() const noexcept { return theta_; }
  std::span<const std::int8_t> signs() const noexcept { return sign_; }

  /// Sets theta; values below theta_min are clipped.
  void set(std::size_t k, double theta, int sign);

  std::size_t active_count() const;
  /// Active ids in ascending order.
  std::vector<std::size_t> active_ids() const;

  Matrix materialize_weights(std::size_t layer) const;
  double connectivity_fraction() const;
  std::vector<double> layer_connectivity() const;

  std::vector<std::vector<double>>& biases() noexcept { return biases_; }
  const std::vector<std::vector<double>>& biases() const noexcept { return biases_; }

  friend bool operator==(const SoftStore&, const SoftStore&) = default;

 private:
  std::vector<LayerShape> layers_;
  double theta_min_;
  std::vector<double> theta_;
  std::vector<std::int8_t> sign_;
  std::vector<std::vector<double>> biases_;
};

/// Initial soft store: the active connections are chosen and drawn exactly
/// like init_connectivity(); dormant parameters are uniform in
/// [theta_min, 0) and every connection receives a uniform sign.
SoftStore init_soft_connectivity(std::vector<LayerShape> layers,
                                 std::span<const double> fractions, double theta_min,
                                 RngStream& rng);

}  // namespace deepr
