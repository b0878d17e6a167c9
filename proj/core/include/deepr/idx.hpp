#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepr/dataset.hpp"

namespace deepr {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// An unsigned-byte IDX array: big-endian header, row-major payload.
struct IdxArray {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

/// Parses an unsigned-byte IDX buffer with the given magic. Throws
/// FormatError naming the field at fault (magic, dims, payload).
IdxArray parse_idx(std::span<const std::uint8_t> bytes, std::uint32_t expected_magic,
                   const std::string& what);
std::vector<std::uint8_t> encode_idx(const IdxArray& array);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Builds a dataset from IDX image and label buffers; pixels are scaled by 1/255.
Dataset dataset_from_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                         Split split = Split::train, std::size_t classes = 10);
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 Split split = Split::train, std::size_t classes = 10);

/// Inverse of dataset_from_idx for square images: pixels are rounded back
/// to bytes, so values of the form b/255 round-trip exactly.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> dataset_to_idx(const Dataset& data);
void write_idx(const Dataset& data, const std::filesystem::path& images,
               const std::filesystem::path& labels);

}  // namespace deepr
