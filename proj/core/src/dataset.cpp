#include "deepr/dataset.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "deepr/error.hpp"

namespace deepr {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::validation: return "validation";
  }
  return "?";
}

void Dataset::validate() const {
  require(inputs.rows() == labels.size(),
          "Dataset: " + std::to_string(inputs.rows()) + " rows but " +
              std::to_string(labels.size()) + " labels");
  for (const int y : labels) {
    require(y >= 0 && static_cast<std::size_t>(y) < classes,
            "Dataset: label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
  }
}

Dataset Dataset::head(std::size_t n) const {
  if (n == 0 || n >= size()) return *this;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return select(idx);
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out;
  out.split = split;
  out.classes = classes;
  out.inputs = Matrix(indices.size(), inputs.cols());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] < size(), "Dataset::select: index out of range");
    const auto src = inputs.row(indices[i]);
    std::copy(src.begin(), src.end(), out.inputs.row(i).begin());
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

std::vector<std::size_t> Dataset::class_histogram() const {
  std::vector<std::size_t> h(classes, 0);
  for (const int y : labels) ++h.at(static_cast<std::size_t>(y));
  return h;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  return idx;
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch) {
  require(batch >= 1, "batch_ranges: batch size must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch) out.emplace_back(b, std::min(n, b + batch));
  return out;
}

BatchSequence::BatchSequence(const Dataset& data, std::size_t batch, RngStream& rng)
    : data_(&data), order_(shuffled_indices(data.size(), rng)), ranges_(batch_ranges(data.size(), batch)) {}

bool BatchSequence::next(Batch& out) {
  if (cursor_ >= ranges_.size()) return false;
  const auto [begin, end] = ranges_[cursor_++];
  const std::size_t cols = data_->inputs.cols();
  if (out.inputs.rows() != end - begin || out.inputs.cols() != cols) out.inputs = Matrix(end - begin, cols);
  out.labels.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const auto src = data_->inputs.row(order_[i]);
    std::copy(src.begin(), src.end(), out.inputs.row(i - begin).begin());
    out.labels[i - begin] = data_->labels[order_[i]];
  }
  return true;
}

LabelPermutation LabelPermutation::identity(std::size_t classes, std::size_t epoch) {
  LabelPermutation p;
  p.epoch = epoch;
  p.map.resize(classes);
  std::iota(p.map.begin(), p.map.end(), 0);
  return p;
}

LabelPermutation LabelPermutation::random(std::size_t classes, RngStream& rng, std::size_t epoch) {
  LabelPermutation p;
  p.epoch = epoch;
  p.seed = rng.seed();
  for (const std::size_t i : shuffled_indices(classes, rng)) p.map.push_back(static_cast<int>(i));
  return p;
}

bool LabelPermutation::valid() const {
  std::vector<bool> seen(map.size(), false);
  for (const int v : map) {
    if (v < 0 || static_cast<std::size_t>(v) >= map.size() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

LabelPermutation LabelPermutation::inverse() const {
  require(valid(), "LabelPermutation::inverse: not a bijection");
  LabelPermutation inv = *this;
  for (std::size_t i = 0; i < map.size(); ++i) inv.map[static_cast<std::size_t>(map[i])] = static_cast<int>(i);
  return inv;
}

Dataset shuffle_labels(const Dataset& data, const LabelPermutation& perm) {
  require(perm.valid() && perm.map.size() == data.classes,
          "shuffle_labels: permutation does not match the class count");
  Dataset out = data;
  for (int& y : out.labels) y = perm(y);
  return out;
}

Dataset synthetic_task(const SyntheticSpec& spec) {
  if (spec.samples == 0 || spec.input_dim == 0 || spec.classes < 2) {
    throw ConfigError("synthetic task needs samples >= 1, input_dim >= 1 and classes >= 2");
  }
  RngStream teacher_rng(spec.seed, StreamTag::init);
  Matrix teacher(spec.input_dim, spec.classes);
  for (double& v : teacher.data()) v = teacher_rng.normal();
  RngStream rng(spec.sample_seed, StreamTag::data_shuffle);
  // centre the logits on the mean input so every class gets a share
  std::vector<double> bias(spec.classes, 0.0);
  for (std::size_t c = 0; c < spec.classes; ++c)
    for (std::size_t i = 0; i < spec.input_dim; ++i) bias[c] -= 0.5 * teacher(i, c);

  Dataset out;
  out.classes = spec.classes;
  out.inputs = Matrix(spec.samples, spec.input_dim);
  std::vector<double> x(spec.input_dim), logits(spec.classes);
  std::size_t filled = 0;
  std::size_t attempts = 0;
  while (filled < spec.samples) {
    if (++attempts > 1000 * spec.samples) {
      throw ConfigError("synthetic task: margin " + std::to_string(spec.margin) + " is unattainable");
    }
    for (double& v : x) v = rng.uniform01();
    for (std::size_t c = 0; c < spec.classes; ++c) {
      double z = bias[c];
      for (std::size_t i = 0; i < spec.input_dim; ++i) z += x[i] * teacher(i, c);
      logits[c] = z;
    }
    const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    double second = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < spec.classes; ++c)
      if (c != best) second = std::max(second, logits[c]);
    if (logits[best] - second < spec.margin) continue;
    std::copy(x.begin(), x.end(), out.inputs.row(filled).begin());
    out.labels.push_back(static_cast<int>(best));
    ++filled;
  }
  const auto hist = out.class_histogram();
  if (std::find(hist.begin(), hist.end(), std::size_t{0}) != hist.end()) {
    throw ConfigError("synthetic task: some class received no samples; change the seed or margin");
  }
  return out;
}

}  // namespace deepr
