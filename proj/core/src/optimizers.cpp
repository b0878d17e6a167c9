#include "deepr/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepr/error.hpp"

namespace deepr {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::deep_r: return "deep_r";
    case OptimizerKind::soft_deep_r: return "soft_deep_r";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::shrinkage: return "shrinkage";
    case OptimizerKind::prune: return "prune";
  }
  return "?";
}

OptimizerKind optimizer_from_string(std::string_view name) {
  for (const auto k : {OptimizerKind::deep_r, OptimizerKind::soft_deep_r, OptimizerKind::sgd,
                       OptimizerKind::shrinkage, OptimizerKind::prune}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (expected deep_r, soft_deep_r, sgd, shrinkage or prune)");
}

std::string_view to_string(TemperatureSchedule schedule) {
  return schedule == TemperatureSchedule::constant ? "constant" : "proportional";
}

TemperatureSchedule temperature_schedule_from_string(std::string_view name) {
  if (name == "constant") return TemperatureSchedule::constant;
  if (name == "proportional") return TemperatureSchedule::proportional;
  throw ConfigError("unknown temperature schedule '" + std::string(name) + "'");
}

void HyperParams::validate(std::size_t layers) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
  if (alpha.empty() || (alpha.size() != 1 && alpha.size() != layers)) {
    throw ConfigError("alpha needs 1 or " + std::to_string(layers) + " values, got " +
                      std::to_string(alpha.size()));
  }
  for (const double a : alpha) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alpha must be >= 0");
  }
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be >= 0");
  }
  if (!(theta_min < 0.0)) throw ConfigError("theta_min must be negative");
  if (!(eta_decay > 0.0 && eta_decay <= 1.0)) throw ConfigError("eta_decay must lie in (0, 1]");
  if (batch == 0) throw ConfigError("batch must be >= 1");
}

double HyperParams::alpha_for(std::size_t layer) const {
  if (alpha.size() == 1) return alpha.front();
  require(layer < alpha.size(), "alpha_for: layer index out of range");
  return alpha[layer];
}

double eta_at(const HyperParams& hp, std::size_t iteration) {
  if (hp.eta_decay_every == 0 || hp.eta_decay == 1.0) return hp.eta;
  const auto steps = static_cast<double>(iteration / hp.eta_decay_every);
  return hp.eta * std::pow(hp.eta_decay, steps);
}

double temperature_at(const HyperParams& hp, std::size_t iteration) {
  if (hp.schedule == TemperatureSchedule::constant) return hp.temperature;
  return hp.temperature * eta_at(hp, iteration) / hp.eta;
}

double deep_r_default_temperature(double eta) { return eta / 2.0 * 1e-12; }

double soft_deep_r_default_temperature(double eta, double alpha) {
  return eta * alpha * alpha / 18.0;
}

double transfer_default_temperature(double eta, double alpha) { return eta * alpha * alpha / 2.0; }

namespace {

void check_gradient(double g, std::size_t k) {
  if (!std::isfinite(g)) {
    throw NumericalAbort("non-finite gradient " + std::to_string(g) + " for connection " +
                         std::to_string(k));
  }
}

void bias_step(std::vector<std::vector<double>>& biases,
               const std::vector<std::vector<double>>& grads, double eta) {
  require(grads.size() == biases.size(), "bias gradient layer count mismatch");
  for (std::size_t l = 0; l < biases.size(); ++l) {
    require(grads[l].size() == biases[l].size(), "bias gradient size mismatch");
    for (std::size_t j = 0; j < biases[l].size(); ++j) {
      if (!std::isfinite(grads[l][j])) {
        throw NumericalAbort("non-finite bias gradient in layer " + std::to_string(l));
      }
      biases[l][j] -= eta * grads[l][j];
    }
  }
}

std::size_t layer_of(std::span<const LayerShape> layers, std::size_t k) {
  for (const auto& layer : layers) {
    if (k < layer.offset + layer.size()) return layer.index;
  }
  throw ContractViolation("connection id " + std::to_string(k) + " out of range");
}

}  // namespace

RewireReport deep_r_step(ConnectionStore& store, const GradientSet& grads, const HyperParams& hp,
                         RngStream& noise, RngStream& rewire, std::size_t iteration) {
  const auto active = store.active();
  require(active.size() == store.budget(), "deep_r_step: exact-K does not hold on entry");
  require(grads.ids.size() == active.size() && grads.values.size() == active.size(),
          "deep_r_step: gradients do not cover the active set");
  const auto layers = store.layers();
  const double eta = eta_at(hp, iteration);
  const double scale = std::sqrt(2.0 * eta * temperature_at(hp, iteration));
  std::vector<double> nu;
  if (scale > 0.0) nu = noise.gauss(active.size());

  std::vector<std::size_t> going_dormant;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const std::size_t k = active[i];
    require(grads.ids[i] == k, "deep_r_step: gradient ids out of step with the active list");
    const double g = grads.values[i];
    check_gradient(g, k);
    double& theta = store.theta_ref(k);
    theta -= eta * g + eta * hp.alpha_for(layer_of(layers, k));
    if (scale > 0.0) theta += scale * nu[i];
    if (theta < 0.0) going_dormant.push_back(k);
  }
  for (const std::size_t k : going_dormant) store.set_dormant(k);

  RewireReport report;
  report.deactivated = going_dormant.size();
  report.new_per_layer.assign(layers.size(), 0);
  report.activated = store.replenish(rewire, &report.new_per_layer);
  bias_step(store.biases(), grads.bias, eta);
  return report;
}

RewireReport soft_deep_r_step(SoftStore& store, const GradientSet& grads, const HyperParams& hp,
                              RngStream& noise, std::size_t iteration) {
  require(grads.ids.size() == grads.values.size(), "soft_deep_r_step: malformed gradient set");
  const double eta = eta_at(hp, iteration);
  const double scale = std::sqrt(2.0 * eta * temperature_at(hp, iteration));
  const double theta_min = store.theta_min();
  auto thetas = store.thetas();
  std::vector<double> nu;
  if (scale > 0.0) nu = noise.gauss(thetas.size());

  RewireReport report;
  report.new_per_layer.assign(store.layers().size(), 0);
  std::size_t next = 0;
  for (const auto& layer : store.layers()) {
    const double alpha = hp.alpha_for(layer.index);
    for (std::size_t k = layer.offset; k < layer.offset + layer.size(); ++k) {
      double theta = thetas[k];
      const bool was_active = theta >= 0.0;
      if (was_active) {
        require(next < grads.ids.size() && grads.ids[next] == k,
                "soft_deep_r_step: missing gradient for active connection " + std::to_string(k));
        const double g = grads.values[next++];
        check_gradient(g, k);
        theta -= eta * g + eta * alpha;
      }
      if (scale > 0.0) theta += scale * nu[k];
      theta = std::max(theta, theta_min);
      thetas[k] = theta;
      const bool now_active = theta >= 0.0;
      if (was_active && !now_active) ++report.deactivated;
      if (!was_active && now_active) {
        ++report.activated;
        ++report.new_per_layer[layer.index];
      }
    }
  }
  require(next == grads.ids.size(), "soft_deep_r_step: gradients given for dormant connections");
  bias_step(store.biases(), grads.bias, eta);
  return report;
}

double soft_threshold(double x, double t) {
  const double m = std::abs(x) - t;
  if (!(m > 0.0)) return 0.0;
  return x > 0.0 ? m : -m;
}

void sgd_step(DenseNet& net, const DenseGradients& grads, double eta, double weight_decay) {
  require(grads.weights.size() == net.weights.size(), "sgd_step: layer count mismatch");
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto w = net.weights[l].data();
    const auto g = grads.weights[l].data();
    require(g.size() == w.size(), "sgd_step: gradient shape mismatch");
    const bool masked = l < net.masks.size() && !net.masks[l].empty();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (masked && net.masks[l][i] == 0) continue;
      if (!std::isfinite(g[i])) {
        throw NumericalAbort("non-finite weight gradient in layer " + std::to_string(l));
      }
      w[i] -= eta * (g[i] + weight_decay * w[i]);
    }
  }
  bias_step(net.biases, grads.bias, eta);
}

void shrinkage_step(DenseNet& net, const DenseGradients& grads, double eta,
                    std::span<const double> alpha) {
  require(alpha.size() == 1 || alpha.size() == net.weights.size(),
          "shrinkage_step: alpha needs 1 or one value per layer");
  sgd_step(net, grads, eta);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const double t = eta * (alpha.size() == 1 ? alpha[0] : alpha[l]);
    for (double& w : net.weights[l].data()) w = soft_threshold(w, t);
  }
}

}  // namespace deepr
