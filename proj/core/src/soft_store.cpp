#include "deepr/soft_store.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepr/error.hpp"

namespace deepr {

SoftStore::SoftStore(std::vector<LayerShape> layers, double theta_min)
    : layers_(std::move(layers)), theta_min_(theta_min) {
  if (!(theta_min_ < 0.0)) {
    throw ConfigError("theta_min must be negative, got " + std::to_string(theta_min_));
  }
  const std::size_t m = total_connections(layers_);
  theta_.assign(m, theta_min_);
  sign_.assign(m, 1);
  for (const auto& layer : layers_) biases_.emplace_back(layer.fan_out, 0.0);
}

double SoftStore::weight(std::size_t k) const {
  const double t = theta_.at(k);
  return t >= 0.0 ? sign_[k] * t : 0.0;
}

void SoftStore::set(std::size_t k, double theta, int sign) {
  require(k < potential(), "SoftStore::set: connection id out of range");
  require(sign == 1 || sign == -1, "SoftStore::set: sign must be +1 or -1");
  theta_[k] = std::max(theta, theta_min_);
  sign_[k] = static_cast<std::int8_t>(sign);
}

std::size_t SoftStore::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(theta_.begin(), theta_.end(), [](double t) { return t >= 0.0; }));
}

std::vector<std::size_t> SoftStore::active_ids() const {
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < theta_.size(); ++k)
    if (theta_[k] >= 0.0) ids.push_back(k);
  return ids;
}

Matrix SoftStore::materialize_weights(std::size_t layer) const {
  require(layer < layers_.size(), "materialize_weights: layer index out of range");
  const LayerShape& shape = layers_[layer];
  Matrix w(shape.fan_in, shape.fan_out);
  auto data = w.data();
  for (std::size_t local = 0; local < shape.size(); ++local) {
    const std::size_t k = shape.offset + local;
    if (theta_[k] >= 0.0) data[local] = sign_[k] * theta_[k];
  }
  return w;
}

double SoftStore::connectivity_fraction() const {
  if (theta_.empty()) return 0.0;
  return static_cast<double>(active_count()) / static_cast<double>(theta_.size());
}

std::vector<double> SoftStore::layer_connectivity() const {
  std::vector<double> out;
  for (const auto& layer : layers_) {
    const auto begin = theta_.begin() + static_cast<std::ptrdiff_t>(layer.offset);
    const auto end = begin + static_cast<std::ptrdiff_t>(layer.size());
    const auto n = std::count_if(begin, end, [](double t) { return t >= 0.0; });
    out.push_back(static_cast<double>(n) / static_cast<double>(layer.size()));
  }
  return out;
}

SoftStore init_soft_connectivity(std::vector<LayerShape> layers,
                                 std::span<const double> fractions, double theta_min,
                                 RngStream& rng) {
  const auto counts = active_counts_for(layers, fractions);
  SoftStore store(layers, theta_min);
  for (const auto& layer : layers) {
    const auto chosen = sample_without_replacement(layer.size(), counts[layer.index], rng);
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.fan_in));
    std::size_t next = 0;
    for (std::size_t local = 0; local < layer.size(); ++local) {
      const std::size_t k = layer.offset + local;
      if (next < chosen.size() && chosen[next] == local) {
        ++next;
        const double theta = std::abs(rng.normal()) * scale;
        store.set(k, theta, rng.sign());
      } else {
        // uniform01 is open at both ends, so the draw is strictly negative
        const double theta = theta_min * rng.uniform01();
        store.set(k, theta, rng.sign());
      }
    }
  }
  return store;
}

}  // namespace deepr
