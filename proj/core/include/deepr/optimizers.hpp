#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "deepr/connection_store.hpp"
#include "deepr/mlp.hpp"
#include "deepr/rng.hpp"
#include "deepr/soft_store.hpp"

namespace deepr {

enum class OptimizerKind { deep_r, soft_deep_r, sgd, shrinkage, prune };

std::string_view to_string(OptimizerKind kind);
/// Throws ConfigError for unknown names.
OptimizerKind optimizer_from_string(std::string_view name);

enum class TemperatureSchedule {
  constant,      ///< T for every iteration
  proportional,  ///< T scaled with the decayed learning rate
};

std::string_view to_string(TemperatureSchedule schedule);
TemperatureSchedule temperature_schedule_from_string(std::string_view name);

struct HyperParams {
  OptimizerKind optimizer = OptimizerKind::deep_r;
  double eta = 0.05;
  /// One value for all layers, or one per weight layer.
  std::vector<double> alpha{1e-4};
  double temperature = 0.0;
  TemperatureSchedule schedule = TemperatureSchedule::constant;
  /// eta is multiplied by eta_decay every eta_decay_every iterations (0 = never).
  double eta_decay = 1.0;
  std::size_t eta_decay_every = 0;
  double theta_min = -3e-6;
  std::size_t batch = 10;
  std::size_t epochs = 10;

  /// Throws ConfigError on eta <= 0, alpha < 0, T < 0, theta_min >= 0,
  /// batch == 0 or an alpha vector whose length is neither 1 nor `layers`.
  void validate(std::size_t layers) const;
  double alpha_for(std::size_t layer) const;
};

double eta_at(const HyperParams& hp, std::size_t iteration);
double temperature_at(const HyperParams& hp, std::size_t iteration);

/// T = (eta / 2) * 1e-12, the MNIST DEEP R setting.
double deep_r_default_temperature(double eta);
/// T = eta * alpha^2 / 18, the soft-DEEP R setting.
double soft_deep_r_default_temperature(double eta, double alpha);
/// T = eta * alpha^2 / 2, the transfer-learning setting.
double transfer_default_temperature(double eta, double alpha);

struct RewireReport {
  std::size_t deactivated = 0;
  std::size_t activated = 0;
  /// Newly activated connections per weight layer.
  std::vector<std::size_t> new_per_layer;
};

/// One DEEP R iteration. Every active theta moves by
///   -eta * g - eta * alpha + sqrt(2 eta T) * nu,
/// connections whose theta became negative go dormant, and the store is
/// replenished to exactly K with uniformly chosen dormant connections.
/// Biases take a plain gradient step. One normal variate is drawn per active
/// connection (none when T == 0). Throws NumericalAbort on a non-finite gradient.
RewireReport deep_r_step(ConnectionStore& store, const GradientSet& grads, const HyperParams& hp,
                         RngStream& noise, RngStream& rewire, std::size_t iteration = 0);

/// One soft-DEEP R iteration. Connections active at entry take the DEEP R
/// update, dormant ones only the diffusion term; then every theta is clipped
/// at theta_min. One normal variate is drawn per connection (all M) when T > 0.
RewireReport soft_deep_r_step(SoftStore& store, const GradientSet& grads, const HyperParams& hp,
                              RngStream& noise, std::size_t iteration = 0);

/// relu(|x| - t) * sign(x).
double soft_threshold(double x, double t);

/// w <- w - eta * (g + weight_decay * w) on unmasked weights; biases take a
/// plain gradient step. Masked weights stay exactly 0.
void sgd_step(DenseNet& net, const DenseGradients& grads, double eta, double weight_decay = 0.0);

/// sgd_step followed by soft_threshold(w, eta * alpha_l) on every weight.
void shrinkage_step(DenseNet& net, const DenseGradients& grads, double eta,
                    std::span<const double> alpha);

}  // namespace deepr
