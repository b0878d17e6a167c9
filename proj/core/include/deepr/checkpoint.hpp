#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deepr/connection_store.hpp"
#include "deepr/mlp.hpp"
#include "deepr/rng.hpp"
#include "deepr/soft_store.hpp"

namespace deepr {

/// Model and sampler state at an iteration boundary. Exactly one of the
/// three parameter holders is set. Floating values are stored as hex
/// floats, so save/load round-trips bit-exactly.
struct Checkpoint {
  std::vector<std::size_t> layer_sizes;
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  std::vector<RngStream> streams;
  std::optional<ConnectionStore> sparse;
  std::optional<SoftStore> soft;
  std::optional<DenseNet> dense;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on malformed input.
Checkpoint decode_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace deepr
