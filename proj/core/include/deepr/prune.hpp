#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "deepr/mlp.hpp"

namespace deepr {

/// Population standard deviation of the unpruned entries of one layer.
double unpruned_std(const DenseNet& net, std::size_t layer);

/// Permanently removes every unpruned weight with |w| < q * w_std, where
/// w_std is taken per weight matrix over its unpruned entries. Creates the
/// masks on first use. Returns the number of weights pruned by this call.
std::size_t prune_phase(DenseNet& net, double q);

/// train - prune - train - prune - train, with L2 weight decay during training.
struct PruneSchedule {
  double quality = 0.0;
  double weight_decay = 0.0;
  /// Epochs of the three training phases.
  std::vector<std::size_t> train_epochs{1, 1, 1};

  /// Splits `epochs` into three training phases as evenly as possible, the
  /// earlier phases taking the remainder.
  static PruneSchedule split(std::size_t epochs, double quality, double weight_decay);

  std::size_t total_epochs() const;
  /// Throws ConfigError unless q >= 0, decay >= 0 and there are three phases.
  void validate() const;
};

struct PruneReport {
  std::vector<std::size_t> pruned;        ///< per pruning phase
  std::vector<double> connectivity;       ///< after each pruning phase
};

/// Trains `net` for a number of epochs in a given phase (0, 1 or 2).
using PhaseTrainer = std::function<void(DenseNet& net, std::size_t epochs, std::size_t phase)>;

PruneReport run_prune_schedule(DenseNet& net, const PruneSchedule& schedule,
                               const PhaseTrainer& train);

}  // namespace deepr
