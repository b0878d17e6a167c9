#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "deepr/matrix.hpp"
#include "deepr/rng.hpp"

namespace deepr {

enum class Split { train, test, validation };

std::string_view to_string(Split split);

/// Samples in rows, features scaled to [0, 1], integer class labels.
struct Dataset {
  Matrix inputs;
  std::vector<int> labels;
  Split split = Split::train;
  std::size_t classes = 10;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t features() const noexcept { return inputs.cols(); }

  /// Throws ContractViolation if rows and labels disagree or a label is out of range.
  void validate() const;

  /// The first n samples (all of them when n is 0 or too large).
  Dataset head(std::size_t n) const;
  /// Rows in the given order.
  Dataset select(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_histogram() const;
};

/// Uniformly random permutation of [0, n) (Fisher-Yates).
std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng);

/// [begin, end) ranges of consecutive batches; the last may be short.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch);

struct Batch {
  Matrix inputs;
  std::vector<int> labels;
};

/// One epoch of mini-batches: the sample order is shuffled once at
/// construction, then cut into contiguous batches.
class BatchSequence {
 public:
  BatchSequence(const Dataset& data, std::size_t batch, RngStream& rng);

  std::size_t batch_count() const noexcept { return ranges_.size(); }
  std::span<const std::size_t> order() const noexcept { return order_; }
  /// Fills `out` with the next batch; false once the epoch is exhausted.
  bool next(Batch& out);

 private:
  const Dataset* data_;
  std::vector<std::size_t> order_;
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
  std::size_t cursor_ = 0;
};

/// A bijection on class labels used for one epoch of the transfer task.
struct LabelPermutation {
  std::size_t epoch = 0;
  std::uint64_t seed = 0;
  std::vector<int> map;

  static LabelPermutation identity(std::size_t classes, std::size_t epoch = 0);
  static LabelPermutation random(std::size_t classes, RngStream& rng, std::size_t epoch = 0);

  bool valid() const;
  LabelPermutation inverse() const;
  int operator()(int label) const { return map.at(static_cast<std::size_t>(label)); }
};

/// Labels mapped through `perm`; inputs untouched.
Dataset shuffle_labels(const Dataset& data, const LabelPermutation& perm);

struct SyntheticSpec {
  /// Seed of the teacher weights.
  std::uint64_t seed = 1;
  /// Seed of the sampled inputs; train and test sets share a teacher but
  /// use different sample seeds.
  std::uint64_t sample_seed = 1;
  std::size_t samples = 1000;
  std::size_t input_dim = 20;
  std::size_t classes = 2;
  /// Minimum gap between the two largest teacher logits.
  double margin = 0.5;
};

/// Inputs uniform in [0, 1]; labels are the argmax of a fixed random linear
/// teacher, keeping only samples whose top two teacher logits differ by at
/// least `margin`. Throws ConfigError if a class ends up empty.
Dataset synthetic_task(const SyntheticSpec& spec);

}  // namespace deepr
