#include "deepr/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "deepr/error.hpp"

#ifndef DEEPR_DEFAULT_MNIST_DIR
#define DEEPR_DEFAULT_MNIST_DIR "data/mnist"
#endif

namespace deepr {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
                    std::string(expected));
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(trim(v));
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) bad_value(key, v, "a number");
  return d;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  const auto s = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const auto s = trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> parse_doubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (const auto item : split_list(v)) out.push_back(parse_double(key, item));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec <= 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += f(xs[i]);
  }
  return out;
}

struct KeyDef {
  ConfigKey doc;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeyDef>& key_table() {
  using C = ExperimentConfig;
  using V = std::string_view;
  static const std::vector<KeyDef> table = {
      {{"optimizer", "deep_r | soft_deep_r | sgd | shrinkage | prune"},
       [](C& c, V v) { c.hp.optimizer = optimizer_from_string(trim(v)); },
       [](const C& c) { return std::string(to_string(c.hp.optimizer)); }},
      {{"layers", "comma-separated layer sizes, input first"},
       [](C& c, V v) {
         c.network.layer_sizes.clear();
         for (const auto s : split_list(v)) c.network.layer_sizes.push_back(parse_uint("layers", s));
       },
       [](const C& c) { return join(c.network.layer_sizes, [](std::size_t n) { return std::to_string(n); }); }},
      {{"eta", "learning rate"},
       [](C& c, V v) { c.hp.eta = parse_double("eta", v); },
       [](const C& c) { return fmt(c.hp.eta); }},
      {{"alpha", "l1 coefficient, one value or one per weight layer"},
       [](C& c, V v) { c.hp.alpha = parse_doubles("alpha", v); },
       [](const C& c) { return join(c.hp.alpha, fmt); }},
      {{"temperature", "noise temperature, or 'auto' for the optimizer default"},
       [](C& c, V v) {
         if (trim(v) == "auto") {
           c.temperature_auto = true;
         } else {
           c.temperature_auto = false;
           c.hp.temperature = parse_double("temperature", v);
         }
       },
       [](const C& c) { return c.temperature_auto ? std::string("auto") : fmt(c.hp.temperature); }},
      {{"temperature_schedule", "constant | proportional (T follows the decayed eta)"},
       [](C& c, V v) { c.hp.schedule = temperature_schedule_from_string(trim(v)); },
       [](const C& c) { return std::string(to_string(c.hp.schedule)); }},
      {{"eta_decay", "factor applied to eta every eta_decay_every iterations"},
       [](C& c, V v) { c.hp.eta_decay = parse_double("eta_decay", v); },
       [](const C& c) { return fmt(c.hp.eta_decay); }},
      {{"eta_decay_every", "iterations between eta decays, 0 disables"},
       [](C& c, V v) { c.hp.eta_decay_every = parse_uint("eta_decay_every", v); },
       [](const C& c) { return std::to_string(c.hp.eta_decay_every); }},
      {{"theta_min", "soft-DEEP R lower bound for theta (negative)"},
       [](C& c, V v) { c.hp.theta_min = parse_double("theta_min", v); },
       [](const C& c) { return fmt(c.hp.theta_min); }},
      {{"batch", "mini-batch size"},
       [](C& c, V v) { c.hp.batch = parse_uint("batch", v); },
       [](const C& c) { return std::to_string(c.hp.batch); }},
      {{"epochs", "passes over the training set"},
       [](C& c, V v) { c.hp.epochs = parse_uint("epochs", v); },
       [](const C& c) { return std::to_string(c.hp.epochs); }},
      {{"sign_policy", "redraw | keep: sign of a reactivated connection"},
       [](C& c, V v) {
         const auto s = trim(v);
         if (s == "redraw") c.sign_policy = SignPolicy::redraw;
         else if (s == "keep") c.sign_policy = SignPolicy::keep;
         else bad_value("sign_policy", v, "redraw or keep");
       },
       [](const C& c) { return std::string(c.sign_policy == SignPolicy::redraw ? "redraw" : "keep"); }},
      {{"connectivity", "global connectivity parameter p0 in (0, 1]"},
       [](C& c, V v) { c.connectivity = parse_double("connectivity", v); },
       [](const C& c) { return fmt(c.connectivity); }},
      {{"multipliers", "per-layer multipliers of p0"},
       [](C& c, V v) { c.multipliers = parse_doubles("multipliers", v); },
       [](const C& c) { return join(c.multipliers, fmt); }},
      {{"fractions", "explicit per-layer connectivity fractions (empty: p0 * multipliers)"},
       [](C& c, V v) { c.fractions = parse_doubles("fractions", v); },
       [](const C& c) { return join(c.fractions, fmt); }},
      {{"dataset", "mnist | synthetic"},
       [](C& c, V v) {
         const auto s = trim(v);
         if (s == "mnist") c.dataset = DatasetKind::mnist;
         else if (s == "synthetic") c.dataset = DatasetKind::synthetic;
         else bad_value("dataset", v, "mnist or synthetic");
       },
       [](const C& c) { return std::string(c.dataset == DatasetKind::mnist ? "mnist" : "synthetic"); }},
      {{"mnist_dir", "directory with the four MNIST IDX files"},
       [](C& c, V v) { c.mnist_dir = std::string(trim(v)); },
       [](const C& c) { return c.mnist_dir.string(); }},
      {{"train_subset", "use only the first N training samples, 0 = all"},
       [](C& c, V v) { c.train_subset = parse_uint("train_subset", v); },
       [](const C& c) { return std::to_string(c.train_subset); }},
      {{"test_subset", "use only the first N test samples, 0 = all"},
       [](C& c, V v) { c.test_subset = parse_uint("test_subset", v); },
       [](const C& c) { return std::to_string(c.test_subset); }},
      {{"synthetic_seed", "teacher seed of the synthetic task"},
       [](C& c, V v) { c.synthetic.seed = parse_uint("synthetic_seed", v); },
       [](const C& c) { return std::to_string(c.synthetic.seed); }},
      {{"synthetic_samples", "training samples of the synthetic task"},
       [](C& c, V v) { c.synthetic.samples = parse_uint("synthetic_samples", v); },
       [](const C& c) { return std::to_string(c.synthetic.samples); }},
      {{"synthetic_test_samples", "test samples of the synthetic task"},
       [](C& c, V v) { c.synthetic_test_samples = parse_uint("synthetic_test_samples", v); },
       [](const C& c) { return std::to_string(c.synthetic_test_samples); }},
      {{"synthetic_input_dim", "input dimension of the synthetic task"},
       [](C& c, V v) { c.synthetic.input_dim = parse_uint("synthetic_input_dim", v); },
       [](const C& c) { return std::to_string(c.synthetic.input_dim); }},
      {{"synthetic_classes", "classes of the synthetic task"},
       [](C& c, V v) { c.synthetic.classes = parse_uint("synthetic_classes", v); },
       [](const C& c) { return std::to_string(c.synthetic.classes); }},
      {{"synthetic_margin", "minimum teacher logit gap of kept samples"},
       [](C& c, V v) { c.synthetic.margin = parse_double("synthetic_margin", v); },
       [](const C& c) { return fmt(c.synthetic.margin); }},
      {{"seed_init", "seed of the initialization stream"},
       [](C& c, V v) { c.seed_init = parse_uint("seed_init", v); },
       [](const C& c) { return std::to_string(c.seed_init); }},
      {{"seed_noise", "seed of the parameter noise stream"},
       [](C& c, V v) { c.seed_noise = parse_uint("seed_noise", v); },
       [](const C& c) { return std::to_string(c.seed_noise); }},
      {{"seed_rewire", "seed of the reactivation stream"},
       [](C& c, V v) { c.seed_rewire = parse_uint("seed_rewire", v); },
       [](const C& c) { return std::to_string(c.seed_rewire); }},
      {{"seed_data", "seed of the data shuffling stream"},
       [](C& c, V v) { c.seed_data = parse_uint("seed_data", v); },
       [](const C& c) { return std::to_string(c.seed_data); }},
      {{"seed_label", "seed of the label permutation stream"},
       [](C& c, V v) { c.seed_label = parse_uint("seed_label", v); },
       [](const C& c) { return std::to_string(c.seed_label); }},
      {{"metrics", "metrics CSV path"},
       [](C& c, V v) { c.metrics = std::string(trim(v)); },
       [](const C& c) { return c.metrics.string(); }},
      {{"checkpoint", "final checkpoint path (empty: <metrics>.ckpt)"},
       [](C& c, V v) { c.checkpoint = std::string(trim(v)); },
       [](const C& c) { return c.checkpoint.string(); }},
      {{"record_every", "iterations between metrics rows (epoch ends are always recorded)"},
       [](C& c, V v) { c.record_every = parse_uint("record_every", v); },
       [](const C& c) { return std::to_string(c.record_every); }},
      {{"eval_samples", "test samples evaluated at intermediate rows, 0 = all"},
       [](C& c, V v) { c.eval_samples = parse_uint("eval_samples", v); },
       [](const C& c) { return std::to_string(c.eval_samples); }},
      {{"transfer", "permute the labels every epoch"},
       [](C& c, V v) { c.transfer = parse_bool("transfer", v); },
       [](const C& c) { return std::string(c.transfer ? "true" : "false"); }},
      {{"label_permutation", "random | identity"},
       [](C& c, V v) {
         const auto s = trim(v);
         if (s == "random") c.random_permutations = true;
         else if (s == "identity") c.random_permutations = false;
         else bad_value("label_permutation", v, "random or identity");
       },
       [](const C& c) { return std::string(c.random_permutations ? "random" : "identity"); }},
      {{"probe_samples", "test inputs in the fixed activity probe"},
       [](C& c, V v) { c.probe_samples = parse_uint("probe_samples", v); },
       [](const C& c) { return std::to_string(c.probe_samples); }},
      {{"sweep_connectivity", "p0 grid of a sweep"},
       [](C& c, V v) { c.sweep_connectivity = parse_doubles("sweep_connectivity", v); },
       [](const C& c) { return join(c.sweep_connectivity, fmt); }},
      {{"sweep_alpha", "alpha grid of a sweep (empty: alpha)"},
       [](C& c, V v) { c.sweep_alpha = parse_doubles("sweep_alpha", v); },
       [](const C& c) { return join(c.sweep_alpha, fmt); }},
      {{"sweep_optimizers", "optimizers of a sweep (empty: optimizer)"},
       [](C& c, V v) {
         c.sweep_optimizers.clear();
         for (const auto s : split_list(v)) c.sweep_optimizers.push_back(optimizer_from_string(s));
       },
       [](const C& c) {
         return join(c.sweep_optimizers, [](OptimizerKind k) { return std::string(to_string(k)); });
       }},
      {{"sweep_threads", "sweep points run in parallel"},
       [](C& c, V v) { c.sweep_threads = parse_uint("sweep_threads", v); },
       [](const C& c) { return std::to_string(c.sweep_threads); }},
      {{"sweep_output", "directory for sweep metrics and summary"},
       [](C& c, V v) { c.sweep_output = std::string(trim(v)); },
       [](const C& c) { return c.sweep_output.string(); }},
      {{"prune_quality", "pruning threshold multiplier q"},
       [](C& c, V v) { c.prune_quality = parse_double("prune_quality", v); },
       [](const C& c) { return fmt(c.prune_quality); }},
      {{"weight_decay", "l2 coefficient used by the pruning schedule"},
       [](C& c, V v) { c.weight_decay = parse_double("weight_decay", v); },
       [](const C& c) { return fmt(c.weight_decay); }},
  };
  return table;
}

const KeyDef& find_key(std::string_view key) {
  for (const auto& k : key_table())
    if (k.doc.name == key) return k;
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

}  // namespace

std::filesystem::path default_mnist_dir() {
  if (const char* env = std::getenv("DEEPR_MNIST_DIR"); env != nullptr && *env != '\0') return env;
  return DEEPR_DEFAULT_MNIST_DIR;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  find_key(trim(key)).set(*this, value);
}

std::string ExperimentConfig::get(std::string_view key) const { return find_key(key).get(*this); }

std::vector<double> ExperimentConfig::layer_fractions() const {
  if (!fractions.empty()) return fractions;
  return allocate_fractions(connectivity, multipliers);
}

std::filesystem::path ExperimentConfig::checkpoint_path() const {
  if (!checkpoint.empty()) return checkpoint;
  auto p = metrics;
  p += ".ckpt";
  return p;
}

void ExperimentConfig::resolve() {
  if (mnist_dir.empty()) mnist_dir = default_mnist_dir();
  if (temperature_auto) {
    const double alpha = hp.alpha.empty() ? 0.0 : hp.alpha.front();
    switch (hp.optimizer) {
      case OptimizerKind::deep_r:
        hp.temperature = transfer ? transfer_default_temperature(hp.eta, alpha)
                                  : deep_r_default_temperature(hp.eta);
        break;
      case OptimizerKind::soft_deep_r:
        hp.temperature = soft_deep_r_default_temperature(hp.eta, alpha);
        break;
      default:
        hp.temperature = 0.0;
    }
  }
}

void ExperimentConfig::validate() const {
  network.validate();
  const std::size_t layers = network.weight_layers();
  hp.validate(layers);
  if (hp.epochs == 0) throw ConfigError("epochs must be >= 1");
  if (record_every == 0) throw ConfigError("record_every must be >= 1");
  if (fractions.empty()) {
    if (multipliers.size() != layers) {
      throw ConfigError("multipliers needs " + std::to_string(layers) + " values, got " +
                        std::to_string(multipliers.size()));
    }
    (void)allocate_fractions(connectivity, multipliers);
  } else {
    (void)active_counts_for(network.shapes(), fractions);
  }
  if (dataset == DatasetKind::mnist) {
    if (network.inputs() != 784 || network.classes() != 10) {
      throw ConfigError("MNIST needs 784 inputs and 10 classes");
    }
    for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                             "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}) {
      if (!std::filesystem::exists(mnist_dir / name)) {
        throw ConfigError("missing MNIST file " + (mnist_dir / name).string() +
                          " (run tools/fetch_mnist.sh or set mnist_dir)");
      }
    }
  } else {
    if (network.inputs() != synthetic.input_dim || network.classes() != synthetic.classes) {
      throw ConfigError("layers must start with synthetic_input_dim and end with synthetic_classes");
    }
  }
  if (transfer && hp.optimizer != OptimizerKind::deep_r && hp.optimizer != OptimizerKind::soft_deep_r &&
      hp.optimizer != OptimizerKind::sgd) {
    throw ConfigError("transfer runs support deep_r, soft_deep_r and sgd");
  }
  if (prune_quality < 0.0) throw ConfigError("prune_quality must be >= 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (sweep_threads == 0) throw ConfigError("sweep_threads must be >= 1");
  for (const double p : sweep_connectivity) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sweep_connectivity values must lie in (0, 1]");
  }
  for (const double a : sweep_alpha) {
    if (!(a >= 0.0)) throw ConfigError("sweep_alpha values must be >= 0");
  }
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& k : key_table()) out += k.doc.name + " = " + k.get(*this) + "\n";
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& k : key_table()) out.push_back(k.doc);
    return out;
  }();
  return keys;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  cfg.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace deepr
