#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace deepr {

/// Purpose of a random stream. Streams with the same seed but a different
/// purpose are independent, so changing e.g. the data order never perturbs
/// the rewiring noise.
enum class StreamTag : std::uint64_t {
  init = 0,
  noise = 1,
  rewire = 2,
  data_shuffle = 3,
  label_shuffle = 4,
};

std::string_view to_string(StreamTag tag);
StreamTag stream_tag_from_string(std::string_view name);

/// Philox4x64-10 block function (Salmon et al., Random123).
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// Counter-based random stream.
///
/// Word i of the stream is lane (i % 4) of philox4x64({i / 4, 0, 0, 0},
/// {seed, tag}). The counter is the index of the next 64-bit word, so a
/// stream is fully described by (seed, tag, counter) and can be
/// checkpointed and resumed bit-exactly.
///
/// Counter consumption:
///   next_u64 / operator()  1 word
///   uniform01              1 word
///   normal                 2 words (Box-Muller, cosine branch only)
///   gauss(out)             2 words per pair, i.e. 2*ceil(n/2) words
///   uniform_index          1 word, plus 1 per (rare) Lemire rejection
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t counter = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  StreamTag tag() const noexcept { return tag_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on the open interval (0, 1).
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  double normal();

  /// Fills `out` with standard normal variates.
  void gauss(std::span<double> out);
  std::vector<double> gauss(std::size_t n);

  /// Uniform index in [0, n). Throws ContractViolation for n == 0.
  std::size_t uniform_index(std::size_t n);

  /// Uniform choice from {-1, +1}.
  int sign();

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.seed_ == b.seed_ && a.tag_ == b.tag_ && a.counter_ == b.counter_;
  }

 private:
  std::uint64_t seed_;
  StreamTag tag_;
  std::uint64_t counter_;
  std::uint64_t cached_block_ = std::numeric_limits<std::uint64_t>::max();
  std::array<std::uint64_t, 4> block_{};
};

/// The five per-run streams.
struct RngSet {
  RngStream init;
  RngStream noise;
  RngStream rewire;
  RngStream data;
  RngStream label;

  RngSet(std::uint64_t init_seed, std::uint64_t noise_seed, std::uint64_t rewire_seed,
         std::uint64_t data_seed, std::uint64_t label_seed);
};

}  // namespace deepr
