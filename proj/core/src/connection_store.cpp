#include "deepr/connection_store.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "deepr/error.hpp"

namespace deepr {

std::vector<LayerShape> make_layer_shapes(std::span<const std::size_t> layer_sizes) {
  require(layer_sizes.size() >= 2, "make_layer_shapes: need at least two layer sizes");
  std::vector<LayerShape> layers;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    require(layer_sizes[l] > 0 && layer_sizes[l + 1] > 0, "make_layer_shapes: empty layer");
    layers.push_back({l, layer_sizes[l], layer_sizes[l + 1], offset});
    offset += layer_sizes[l] * layer_sizes[l + 1];
  }
  return layers;
}

std::size_t total_connections(std::span<const LayerShape> layers) {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.size();
  return total;
}

ConnectionCoord locate(std::span<const LayerShape> layers, std::size_t id) {
  for (const auto& layer : layers) {
    if (id >= layer.offset && id < layer.offset + layer.size()) {
      const std::size_t local = id - layer.offset;
      return {layer.index, local / layer.fan_out, local % layer.fan_out};
    }
  }
  throw ContractViolation("locate: connection id " + std::to_string(id) + " out of range");
}

ConnectionStore::ConnectionStore(std::vector<LayerShape> layers, std::size_t budget,
                                 SignPolicy policy)
    : layers_(std::move(layers)), budget_(budget), policy_(policy) {
  std::size_t expected_offset = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    require(layers_[l].index == l && layers_[l].offset == expected_offset,
            "ConnectionStore: layer offsets must be contiguous and ordered");
    expected_offset += layers_[l].size();
  }
  const std::size_t m = expected_offset;
  require(m < kDormant, "ConnectionStore: too many connections");
  if (budget_ > m) {
    throw ContractViolation("ConnectionStore: budget K=" + std::to_string(budget_) +
                            " exceeds M=" + std::to_string(m));
  }
  theta_.assign(m, 0.0);
  sign_.assign(m, 1);
  position_.assign(m, kDormant);
  active_.reserve(budget_);
  for (const auto& layer : layers_) biases_.emplace_back(layer.fan_out, 0.0);
}

double ConnectionStore::weight(std::size_t k) const {
  return is_active(k) ? sign_[k] * theta_[k] : 0.0;
}

void ConnectionStore::activate(std::size_t k, double theta, int sign) {
  require(k < potential(), "activate: connection id out of range");
  require(position_[k] == kDormant, "activate: connection " + std::to_string(k) + " already active");
  require(sign == 1 || sign == -1, "activate: sign must be +1 or -1");
  require(theta >= 0.0, "activate: active parameter must be non-negative");
  require(active_.size() < budget_, "activate: budget of K active connections exhausted");
  position_[k] = static_cast<std::uint32_t>(active_.size());
  active_.push_back(k);
  theta_[k] = theta;
  sign_[k] = static_cast<std::int8_t>(sign);
}

void ConnectionStore::set_dormant(std::size_t k) {
  require(k < potential(), "set_dormant: connection id out of range");
  const std::uint32_t pos = position_[k];
  if (pos == kDormant) {
    throw ContractViolation("set_dormant: connection " + std::to_string(k) + " is already dormant");
  }
  const std::size_t last = active_.back();
  active_[pos] = last;
  position_[last] = pos;
  active_.pop_back();
  position_[k] = kDormant;
}

std::size_t ConnectionStore::replenish(RngStream& rng, std::vector<std::size_t>* per_layer) {
  require(active_.size() <= budget_, "replenish: more than K connections active");
  const std::size_t m = potential();
  std::size_t activated = 0;
  while (active_.size() < budget_) {
    std::size_t candidate = rng.uniform_index(m);
    while (position_[candidate] != kDormant) candidate = rng.uniform_index(m);
    const int s = policy_ == SignPolicy::redraw ? rng.sign() : sign_[candidate];
    activate(candidate, 0.0, s);
    ++activated;
    if (per_layer != nullptr) ++(*per_layer)[locate(layers_, candidate).layer];
  }
  return activated;
}

Matrix ConnectionStore::materialize_weights(std::size_t layer) const {
  require(layer < layers_.size(), "materialize_weights: layer index out of range");
  const LayerShape& shape = layers_[layer];
  Matrix w(shape.fan_in, shape.fan_out);
  auto data = w.data();
  for (const std::size_t k : active_) {
    if (k < shape.offset || k >= shape.offset + shape.size()) continue;
    data[k - shape.offset] = sign_[k] * theta_[k];
  }
  return w;
}

double ConnectionStore::connectivity_fraction() const {
  if (potential() == 0) return 0.0;
  return static_cast<double>(active_.size()) / static_cast<double>(potential());
}

std::vector<std::size_t> ConnectionStore::layer_active_counts() const {
  std::vector<std::size_t> counts(layers_.size(), 0);
  for (const std::size_t k : active_) ++counts[locate(layers_, k).layer];
  return counts;
}

std::vector<double> ConnectionStore::layer_connectivity() const {
  const auto counts = layer_active_counts();
  std::vector<double> out(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l)
    out[l] = static_cast<double>(counts[l]) / static_cast<double>(layers_[l].size());
  return out;
}

void ConnectionStore::set_sign(std::size_t k, int sign) {
  require(sign == 1 || sign == -1, "set_sign: sign must be +1 or -1");
  require(!is_active(k), "set_sign: signs of active connections are fixed");
  sign_[k] = static_cast<std::int8_t>(sign);
}

bool operator==(const ConnectionStore& a, const ConnectionStore& b) {
  if (a.layers_ != b.layers_ || a.budget_ != b.budget_ || a.policy_ != b.policy_ ||
      a.active_ != b.active_ || a.sign_ != b.sign_ || a.biases_ != b.biases_) {
    return false;
  }
  for (const std::size_t k : a.active_) {
    if (a.theta_[k] != b.theta_[k]) return false;
  }
  return true;
}

std::vector<double> allocate_fractions(double p0, std::span<const double> multipliers) {
  if (!(p0 > 0.0 && p0 <= 1.0)) {
    throw ConfigError("connectivity p0 must lie in (0, 1], got " + std::to_string(p0));
  }
  std::vector<double> fractions;
  fractions.reserve(multipliers.size());
  for (const double m : multipliers) {
    if (!(m > 0.0)) throw ConfigError("connectivity multipliers must be positive");
    fractions.push_back(std::min(1.0, m * p0));
  }
  return fractions;
}

std::vector<double> mnist_default_multipliers() { return {0.75, 2.3, 22.8}; }

std::vector<std::size_t> active_counts_for(std::span<const LayerShape> layers,
                                           std::span<const double> fractions) {
  if (fractions.size() != layers.size()) {
    throw ConfigError("expected " + std::to_string(layers.size()) +
                      " per-layer fractions, got " + std::to_string(fractions.size()));
  }
  std::vector<std::size_t> counts;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double f = fractions[l];
    if (!(f >= 0.0 && f <= 1.0)) {
      throw ConfigError("per-layer connectivity fraction must lie in [0, 1], got " +
                        std::to_string(f));
    }
    // nearbyint under the default rounding mode rounds half to even.
    counts.push_back(static_cast<std::size_t>(
        std::nearbyint(f * static_cast<double>(layers[l].size()))));
  }
  return counts;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    RngStream& rng) {
  require(count <= n, "sample_without_replacement: count exceeds population");
  std::vector<std::size_t> chosen;
  if (count == n) {
    chosen.resize(n);
    for (std::size_t i = 0; i < n; ++i) chosen[i] = i;
    return chosen;
  }
  std::unordered_set<std::size_t> seen;
  seen.reserve(count * 2);
  chosen.reserve(count);
  for (std::size_t j = n - count; j < n; ++j) {
    const std::size_t t = rng.uniform_index(j + 1);
    const std::size_t pick = seen.contains(t) ? j : t;
    seen.insert(pick);
    chosen.push_back(pick);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

ConnectionStore init_connectivity(std::vector<LayerShape> layers,
                                  std::span<const double> fractions, RngStream& rng,
                                  SignPolicy policy) {
  const auto counts = active_counts_for(layers, fractions);
  std::size_t budget = 0;
  for (const std::size_t c : counts) budget += c;
  ConnectionStore store(layers, budget, policy);
  for (const auto& layer : layers) {
    const auto chosen = sample_without_replacement(layer.size(), counts[layer.index], rng);
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.fan_in));
    std::size_t next = 0;
    for (std::size_t local = 0; local < layer.size(); ++local) {
      const std::size_t k = layer.offset + local;
      if (next < chosen.size() && chosen[next] == local) {
        ++next;
        const double theta = std::abs(rng.normal()) * scale;
        store.activate(k, theta, rng.sign());
      } else if (policy == SignPolicy::keep) {
        store.set_sign(k, rng.sign());
      }
    }
  }
  return store;
}

}  // namespace deepr
