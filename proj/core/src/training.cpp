#include "deepr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>

#include "deepr/checkpoint.hpp"
#include "deepr/error.hpp"
#include "deepr/idx.hpp"
#include "deepr/optimizers.hpp"
#include "deepr/prune.hpp"
#include "deepr/soft_store.hpp"
#include "deepr/stats.hpp"

namespace deepr {

DataSplit load_data(const ExperimentConfig& cfg) {
  DataSplit d;
  if (cfg.dataset == DatasetKind::mnist) {
    const std::filesystem::path dir = cfg.mnist_dir.empty() ? default_mnist_dir() : cfg.mnist_dir;
    d.train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", Split::train);
    d.test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", Split::test);
  } else {
    SyntheticSpec spec = cfg.synthetic;
    spec.sample_seed = spec.seed;
    d.train = synthetic_task(spec);
    spec.sample_seed = ~spec.seed;
    spec.samples = cfg.synthetic_test_samples;
    d.test = synthetic_task(spec);
    d.test.split = Split::test;
  }
  d.train = d.train.head(cfg.train_subset);
  d.test = d.test.head(cfg.test_subset);
  return d;
}

double evaluate(const NetworkSpec& spec, const NetParams& params, const Dataset& data,
                std::size_t n) {
  const std::size_t total = (n == 0 || n > data.size()) ? data.size() : n;
  if (total == 0) return 0.0;
  constexpr std::size_t kChunk = 500;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < total; begin += kChunk) {
    const std::size_t end = std::min(total, begin + kChunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Dataset chunk = data.select(idx);
    const auto trace = forward(spec, params, chunk.inputs);
    const auto pred = predictions(trace);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == chunk.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

class Model {
 public:
  virtual ~Model() = default;
  virtual NetParams params() const = 0;
  /// Applies one update; returns newly activated connections per layer.
  virtual std::vector<std::size_t> step(const ForwardTrace& trace, const NetParams& params,
                                        std::span<const int> labels, std::size_t iteration) = 0;
  virtual double connectivity() const = 0;
  /// Connectivity if it is cheap to know after every iteration.
  virtual std::optional<double> tracked_connectivity() const { return std::nullopt; }
  virtual std::vector<double> layer_connectivity() const = 0;
  virtual std::vector<Matrix> dense_weights() const = 0;
  virtual bool exact_k_holds() const { return true; }
  virtual std::size_t budget() const { return 0; }
  virtual void store_into(Checkpoint& c) const = 0;
};

class SparseModel final : public Model {
 public:
  SparseModel(const NetworkSpec& spec, ConnectionStore store, const HyperParams& hp, RngSet& rng)
      : spec_(spec), store_(std::move(store)), hp_(hp), rng_(rng) {}

  NetParams params() const override { return params_from(store_); }
  std::vector<std::size_t> step(const ForwardTrace& trace, const NetParams& params,
                                std::span<const int> labels, std::size_t iteration) override {
    const auto grads = backward(spec_, store_, params, trace, labels);
    return deep_r_step(store_, grads, hp_, rng_.noise, rng_.rewire, iteration).new_per_layer;
  }
  double connectivity() const override { return store_.connectivity_fraction(); }
  std::optional<double> tracked_connectivity() const override { return connectivity(); }
  std::vector<double> layer_connectivity() const override { return store_.layer_connectivity(); }
  std::vector<Matrix> dense_weights() const override {
    std::vector<Matrix> out;
    for (const auto& l : store_.layers()) out.push_back(store_.materialize_weights(l.index));
    return out;
  }
  bool exact_k_holds() const override { return store_.active_count() == store_.budget(); }
  std::size_t budget() const override { return store_.budget(); }
  void store_into(Checkpoint& c) const override { c.sparse = store_; }

 private:
  NetworkSpec spec_;
  ConnectionStore store_;
  HyperParams hp_;
  RngSet& rng_;
};

class SoftModel final : public Model {
 public:
  SoftModel(const NetworkSpec& spec, SoftStore store, const HyperParams& hp, RngSet& rng)
      : spec_(spec), store_(std::move(store)), hp_(hp), rng_(rng), active_(store_.active_count()) {}

  NetParams params() const override { return params_from(store_); }
  std::vector<std::size_t> step(const ForwardTrace& trace, const NetParams& params,
                                std::span<const int> labels, std::size_t iteration) override {
    const auto grads = backward(spec_, store_, params, trace, labels);
    const auto report = soft_deep_r_step(store_, grads, hp_, rng_.noise, iteration);
    active_ = active_ + report.activated - report.deactivated;
    return report.new_per_layer;
  }
  double connectivity() const override {
    return static_cast<double>(active_) / static_cast<double>(store_.potential());
  }
  std::optional<double> tracked_connectivity() const override { return connectivity(); }
  std::vector<double> layer_connectivity() const override { return store_.layer_connectivity(); }
  std::vector<Matrix> dense_weights() const override {
    std::vector<Matrix> out;
    for (const auto& l : store_.layers()) out.push_back(store_.materialize_weights(l.index));
    return out;
  }
  void store_into(Checkpoint& c) const override { c.soft = store_; }

 private:
  NetworkSpec spec_;
  SoftStore store_;
  HyperParams hp_;
  RngSet& rng_;
  std::size_t active_;
};

class DenseModel final : public Model {
 public:
  DenseModel(const NetworkSpec& spec, DenseNet net, const HyperParams& hp, double weight_decay)
      : spec_(spec), net_(std::move(net)), hp_(hp), weight_decay_(weight_decay) {}

  NetParams params() const override { return net_.params(); }
  std::vector<std::size_t> step(const ForwardTrace& trace, const NetParams& params,
                                std::span<const int> labels, std::size_t iteration) override {
    const auto grads = backward_dense(spec_, params, trace, labels);
    const double eta = eta_at(hp_, iteration);
    if (hp_.optimizer == OptimizerKind::shrinkage) {
      shrinkage_step(net_, grads, eta, hp_.alpha);
    } else {
      sgd_step(net_, grads, eta, weight_decay_);
    }
    return std::vector<std::size_t>(net_.weights.size(), 0);
  }
  double connectivity() const override { return net_.connectivity(); }
  std::vector<double> layer_connectivity() const override { return net_.layer_connectivity(); }
  std::vector<Matrix> dense_weights() const override { return net_.weights; }
  void store_into(Checkpoint& c) const override { c.dense = net_; }
  DenseNet& net() { return net_; }

 private:
  NetworkSpec spec_;
  DenseNet net_;
  HyperParams hp_;
  double weight_decay_;
};

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

std::unique_ptr<Model> make_model(const ExperimentConfig& cfg, RngSet& rng) {
  const auto layers = cfg.network.shapes();
  switch (cfg.hp.optimizer) {
    case OptimizerKind::deep_r:
      return std::make_unique<SparseModel>(
          cfg.network, init_connectivity(layers, cfg.layer_fractions(), rng.init, cfg.sign_policy),
          cfg.hp, rng);
    case OptimizerKind::soft_deep_r:
      return std::make_unique<SoftModel>(
          cfg.network,
          init_soft_connectivity(layers, cfg.layer_fractions(), cfg.hp.theta_min, rng.init), cfg.hp,
          rng);
    case OptimizerKind::sgd:
    case OptimizerKind::shrinkage:
    case OptimizerKind::prune: {
      // same draws as a fully connected sparse store, so w = s * |N| / sqrt(fan_in)
      const auto full = init_connectivity(layers, ones(layers.size()), rng.init);
      const double decay = cfg.hp.optimizer == OptimizerKind::prune ? cfg.weight_decay : 0.0;
      return std::make_unique<DenseModel>(cfg.network, dense_from(full), cfg.hp, decay);
    }
  }
  throw ConfigError("unsupported optimizer");
}

std::vector<double> flatten(const std::vector<Matrix>& ms, std::size_t i) {
  const auto d = ms[i].data();
  return {d.begin(), d.end()};
}

/// Per weight layer: rectified hidden activity, logits for the output layer.
std::vector<Matrix> probe_activity(const NetworkSpec& spec, const NetParams& params,
                                   const Matrix& probe) {
  auto trace = forward(spec, params, probe);
  std::vector<Matrix> out;
  for (std::size_t l = 0; l + 1 < spec.weight_layers(); ++l) out.push_back(std::move(trace.activations[l + 1]));
  out.push_back(std::move(trace.pre_activations.back()));
  return out;
}

}  // namespace

RunResult run_training(const ExperimentConfig& cfg_in, const RunOptions& opts) {
  ExperimentConfig cfg = cfg_in;
  cfg.resolve();
  cfg.validate();
  DataSplit owned;
  if (opts.data == nullptr) owned = load_data(cfg);
  const DataSplit& data = opts.data != nullptr ? *opts.data : owned;
  require(data.train.features() == cfg.network.inputs() && data.test.features() == cfg.network.inputs(),
          "run_training: data width does not match the network input size");
  require(data.train.size() > 0, "run_training: empty training set");

  const NetworkSpec& spec = cfg.network;
  const auto layers = spec.shapes();
  const std::size_t n_layers = layers.size();
  RngSet rng(cfg.seed_init, cfg.seed_noise, cfg.seed_rewire, cfg.seed_data, cfg.seed_label);
  auto model = make_model(cfg, rng);

  Matrix probe;
  if (cfg.transfer && data.test.size() > 0) {
    const std::size_t n = std::min(cfg.probe_samples, data.test.size());
    probe = data.test.select(sample_without_replacement(data.test.size(), n, rng.init)).inputs;
  }

  RunResult result;
  result.potential = total_connections(layers);
  result.budget = model->budget();
  result.metrics_path = cfg.metrics;
  result.checkpoint_path = cfg.checkpoint_path();
  if (cfg.transfer) result.correlations_path = sidecar(cfg.metrics, ".corr.csv");

  std::optional<MetricsWriter> writer;
  if (opts.write_files) {
    writer.emplace(cfg.metrics, n_layers);
    std::ofstream side(sidecar(cfg.metrics, ".config"), std::ios::trunc);
    side << cfg.to_text();
  }

  std::vector<std::size_t> potential_per_layer;
  for (const auto& l : layers) potential_per_layer.push_back(l.size());

  const auto start = std::chrono::steady_clock::now();
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double window_loss = 0.0;
  std::size_t window_correct = 0, window_samples = 0, window_iters = 0;
  std::vector<std::size_t> window_new(n_layers, 0);
  result.max_connectivity = model->connectivity();

  std::vector<Matrix> prev_weights;
  std::vector<Matrix> prev_activity;

  auto record = [&](const Dataset& test, bool full) {
    MetricsRecord r;
    r.iteration = iteration;
    r.epoch = epoch;
    r.window = window_iters;
    r.train_loss = window_samples ? window_loss / static_cast<double>(window_samples) : 0.0;
    r.train_accuracy =
        window_samples ? static_cast<double>(window_correct) / static_cast<double>(window_samples) : 0.0;
    const std::size_t n = full ? test.size() : std::min(test.size(), cfg.eval_samples ? cfg.eval_samples : test.size());
    r.test_accuracy = evaluate(spec, model->params(), test, n);
    r.test_samples = n;
    r.connectivity = model->connectivity();
    r.layer_connectivity = model->layer_connectivity();
    r.new_per_layer = window_new;
    r.layer_potential = potential_per_layer;
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.max_connectivity = std::max(result.max_connectivity, r.connectivity);
    if (writer) writer->write(r);
    if (opts.on_record) opts.on_record(r);
    result.records.push_back(std::move(r));
    window_loss = 0.0;
    window_correct = window_samples = window_iters = 0;
    std::fill(window_new.begin(), window_new.end(), 0);
  };

  auto run_epochs = [&](std::size_t count) {
    for (std::size_t e = 0; e < count; ++e, ++epoch) {
      std::optional<Dataset> shuffled_train, shuffled_test;
      if (cfg.transfer) {
        const auto perm = cfg.random_permutations
                              ? LabelPermutation::random(data.train.classes, rng.label, epoch)
                              : LabelPermutation::identity(data.train.classes, epoch);
        shuffled_train = shuffle_labels(data.train, perm);
        shuffled_test = shuffle_labels(data.test, perm);
      }
      const Dataset& train = shuffled_train ? *shuffled_train : data.train;
      const Dataset& test = shuffled_test ? *shuffled_test : data.test;

      BatchSequence batches(train, cfg.hp.batch, rng.data);
      const std::size_t n_batches = batches.batch_count();
      Batch batch;
      for (std::size_t b = 0; batches.next(batch); ++b) {
        const NetParams params = model->params();
        const auto trace = forward(spec, params, batch.inputs);
        const double loss = cross_entropy(trace, batch.labels);
        if (!std::isfinite(loss)) {
          throw NumericalAbort("non-finite loss at iteration " + std::to_string(iteration));
        }
        const auto pred = predictions(trace);
        for (std::size_t i = 0; i < pred.size(); ++i) window_correct += pred[i] == batch.labels[i];
        window_loss += loss * static_cast<double>(batch.labels.size());
        window_samples += batch.labels.size();

        const auto fresh = model->step(trace, params, batch.labels, iteration);
        ++iteration;
        ++window_iters;
        std::size_t total_new = 0;
        for (std::size_t l = 0; l < n_layers; ++l) {
          window_new[l] += fresh[l];
          total_new += fresh[l];
        }
        result.new_per_iteration.push_back(total_new);
        if (!model->exact_k_holds()) ++result.exact_k_violations;
        if (const auto c = model->tracked_connectivity()) {
          result.max_connectivity = std::max(result.max_connectivity, *c);
        }

        if (b + 1 == n_batches) {
          record(test, true);
          result.epoch_test_accuracy.push_back(result.records.back().test_accuracy);
        } else if (iteration % cfg.record_every == 0) {
          record(test, false);
        }
      }

      if (cfg.transfer) {
        const auto weights = model->dense_weights();
        std::vector<Matrix> activity;
        if (!probe.empty()) activity = probe_activity(spec, model->params(), probe);
        if (!prev_weights.empty()) {
          CorrelationRecord c;
          c.epoch_from = epoch - 1;
          c.epoch_to = epoch;
          for (std::size_t l = 0; l < n_layers; ++l) {
            c.weight.push_back(stats::pearson(flatten(prev_weights, l), flatten(weights, l)));
            c.activity.push_back(activity.empty() ? 0.0
                                                  : stats::pearson(flatten(prev_activity, l),
                                                                   flatten(activity, l)));
          }
          result.correlations.push_back(std::move(c));
        }
        prev_weights = weights;
        prev_activity = std::move(activity);
      }
    }
  };

  if (cfg.hp.optimizer == OptimizerKind::prune) {
    auto& dense = static_cast<DenseModel&>(*model);
    auto schedule = PruneSchedule::split(cfg.hp.epochs, cfg.prune_quality, cfg.weight_decay);
    const auto report = run_prune_schedule(dense.net(), schedule,
                                           [&](DenseNet&, std::size_t n, std::size_t) { run_epochs(n); });
    result.prune_connectivity = report.connectivity;
  } else {
    run_epochs(cfg.hp.epochs);
  }

  result.iterations = iteration;
  result.final_connectivity = model->connectivity();
  result.final_test_accuracy = result.epoch_test_accuracy.empty() ? 0.0 : result.epoch_test_accuracy.back();

  if (opts.write_files) {
    Checkpoint ckpt;
    ckpt.layer_sizes = spec.layer_sizes;
    ckpt.iteration = iteration;
    ckpt.epoch = epoch;
    ckpt.streams = {rng.init, rng.noise, rng.rewire, rng.data, rng.label};
    model->store_into(ckpt);
    save_checkpoint(result.checkpoint_path, ckpt);
    if (cfg.transfer) write_correlations(result.correlations_path, result.correlations);
  }
  return result;
}

RunResult run_transfer(ExperimentConfig cfg, const RunOptions& opts) {
  cfg.transfer = true;
  return run_training(cfg, opts);
}

}  // namespace deepr
