#include "deepr/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "deepr/error.hpp"

namespace deepr {

__extension__ typedef unsigned __int128 u128;
namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const u128 product = static_cast<u128>(a) * b;
  hi = static_cast<std::uint64_t>(product >> 64);
  lo = static_cast<std::uint64_t>(product);
}

}  // namespace

std::string_view to_string(StreamTag tag) {
  switch (tag) {
    case StreamTag::init: return "init";
    case StreamTag::noise: return "noise";
    case StreamTag::rewire: return "rewire";
    case StreamTag::data_shuffle: return "data-shuffle";
    case StreamTag::label_shuffle: return "label-shuffle";
  }
  return "unknown";
}

StreamTag stream_tag_from_string(std::string_view name) {
  for (auto tag : {StreamTag::init, StreamTag::noise, StreamTag::rewire, StreamTag::data_shuffle,
                   StreamTag::label_shuffle}) {
    if (to_string(tag) == name) return tag;
  }
  throw FormatError("unknown stream tag '" + std::string(name) + "'");
}

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t counter)
    : seed_(seed), tag_(tag), counter_(counter) {}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t block = counter_ >> 2;
  if (block != cached_block_) {
    block_ = philox4x64({block, 0, 0, 0}, {seed_, static_cast<std::uint64_t>(tag_)});
    cached_block_ = block;
  }
  return block_[counter_++ & 3];
}

double RngStream::uniform01() {
  // 53 random bits, shifted by half a ulp so neither 0 nor 1 is produced.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RngStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void RngStream::gauss(std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform01()));
    const double phi = 2.0 * std::numbers::pi * uniform01();
    out[i] = r * std::cos(phi);
    out[i + 1] = r * std::sin(phi);
  }
  if (i < out.size()) out[i] = normal();
}

std::vector<double> RngStream::gauss(std::size_t n) {
  std::vector<double> out(n);
  gauss(std::span<double>(out));
  return out;
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw ContractViolation("uniform_index: n must be >= 1");
  // Lemire, "Fast random integer generation in an interval" (2019).
  const std::uint64_t range = n;
  u128 m = static_cast<u128>(next_u64()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

int RngStream::sign() { return (next_u64() >> 63) != 0 ? 1 : -1; }

RngSet::RngSet(std::uint64_t init_seed, std::uint64_t noise_seed, std::uint64_t rewire_seed,
               std::uint64_t data_seed, std::uint64_t label_seed)
    : init(init_seed, StreamTag::init),
      noise(noise_seed, StreamTag::noise),
      rewire(rewire_seed, StreamTag::rewire),
      data(data_seed, StreamTag::data_shuffle),
      label(label_seed, StreamTag::label_shuffle) {}

}  // namespace deepr
