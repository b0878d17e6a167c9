#include "deepr/prune.hpp"

#include <cmath>
#include <string>

#include "deepr/error.hpp"

namespace deepr {

namespace {

bool unpruned(const DenseNet& net, std::size_t layer, std::size_t i) {
  return layer >= net.masks.size() || net.masks[layer].empty() || net.masks[layer][i] != 0;
}

}  // namespace

double unpruned_std(const DenseNet& net, std::size_t layer) {
  require(layer < net.weights.size(), "unpruned_std: layer index out of range");
  const auto w = net.weights[layer].data();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!unpruned(net, layer, i)) continue;
    sum += w[i];
    ++n;
  }
  if (n == 0) return 0.0;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!unpruned(net, layer, i)) continue;
    ss += (w[i] - mean) * (w[i] - mean);
  }
  return std::sqrt(ss / static_cast<double>(n));
}

std::size_t prune_phase(DenseNet& net, double q) {
  require(q >= 0.0, "prune_phase: quality must be >= 0");
  net.masks.resize(net.weights.size());
  std::size_t pruned = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto w = net.weights[l].data();
    if (net.masks[l].empty()) net.masks[l].assign(w.size(), 1);
    const double threshold = q * unpruned_std(net, l);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (net.masks[l][i] == 0) continue;
      if (std::abs(w[i]) < threshold) {
        net.masks[l][i] = 0;
        w[i] = 0.0;
        ++pruned;
      }
    }
  }
  return pruned;
}

PruneSchedule PruneSchedule::split(std::size_t epochs, double quality, double weight_decay) {
  PruneSchedule s;
  s.quality = quality;
  s.weight_decay = weight_decay;
  s.train_epochs.assign(3, epochs / 3);
  for (std::size_t i = 0; i < epochs % 3; ++i) ++s.train_epochs[i];
  return s;
}

std::size_t PruneSchedule::total_epochs() const {
  std::size_t n = 0;
  for (const std::size_t e : train_epochs) n += e;
  return n;
}

void PruneSchedule::validate() const {
  if (!(quality >= 0.0)) throw ConfigError("prune quality must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (train_epochs.size() != 3) {
    throw ConfigError("prune schedule needs 3 training phases, got " +
                      std::to_string(train_epochs.size()));
  }
}

PruneReport run_prune_schedule(DenseNet& net, const PruneSchedule& schedule,
                               const PhaseTrainer& train) {
  schedule.validate();
  PruneReport report;
  for (std::size_t phase = 0; phase < 3; ++phase) {
    train(net, schedule.train_epochs[phase], phase);
    if (phase < 2) {
      report.pruned.push_back(prune_phase(net, schedule.quality));
      report.connectivity.push_back(net.connectivity());
    }
  }
  return report;
}

}  // namespace deepr
