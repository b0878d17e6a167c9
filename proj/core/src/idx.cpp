#include "deepr/idx.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "deepr/error.hpp"

namespace deepr {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t at) {
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes, std::uint32_t expected_magic,
                   const std::string& what) {
  if (bytes.size() < 4) throw FormatError(what + ": magic: file shorter than 4 bytes");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != expected_magic) {
    throw FormatError(what + ": magic: expected " + hex(expected_magic) + ", found " + hex(magic));
  }
  const std::size_t ndims = magic & 0xFFu;
  if (bytes.size() < 4 + 4 * ndims) throw FormatError(what + ": dims: header truncated");
  IdxArray out;
  std::size_t payload = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    out.dims.push_back(read_be32(bytes, 4 + 4 * d));
    payload *= out.dims.back();
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() - header < payload) {
    throw FormatError(what + ": payload: truncated, header promises " + std::to_string(payload) +
                      " bytes, found " + std::to_string(bytes.size() - header));
  }
  if (bytes.size() - header > payload) {
    throw FormatError(what + ": payload: " + std::to_string(bytes.size() - header - payload) +
                      " trailing bytes after the declared payload");
  }
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return out;
}

std::vector<std::uint8_t> encode_idx(const IdxArray& array) {
  require(!array.dims.empty() && array.dims.size() < 256, "encode_idx: bad dimension count");
  std::size_t payload = 1;
  for (const auto d : array.dims) payload *= d;
  require(payload == array.data.size(), "encode_idx: payload does not match the dimensions");
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * array.dims.size() + payload);
  write_be32(out, 0x00000800u | static_cast<std::uint32_t>(array.dims.size()));
  for (const auto d : array.dims) write_be32(out, d);
  out.insert(out.end(), array.data.begin(), array.data.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset dataset_from_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                         Split split, std::size_t classes) {
  const auto img = parse_idx(images, kIdxImageMagic, "images");
  const auto lab = parse_idx(labels, kIdxLabelMagic, "labels");
  const std::size_t n = img.dims[0];
  if (lab.dims[0] != n) {
    throw FormatError("count: " + std::to_string(n) + " images but " +
                      std::to_string(lab.dims[0]) + " labels");
  }
  const std::size_t features = std::size_t{img.dims[1]} * img.dims[2];
  Dataset out;
  out.split = split;
  out.classes = classes;
  out.inputs = Matrix(n, features);
  auto dst = out.inputs.data();
  for (std::size_t i = 0; i < img.data.size(); ++i) dst[i] = img.data[i] / 255.0;
  out.labels.reserve(n);
  for (const auto y : lab.data) {
    if (y >= classes) throw FormatError("labels: value " + std::to_string(y) + " out of range");
    out.labels.push_back(y);
  }
  return out;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 Split split, std::size_t classes) {
  return dataset_from_idx(read_file_bytes(images), read_file_bytes(labels), split, classes);
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> dataset_to_idx(const Dataset& data) {
  data.validate();
  const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(double(data.features()))));
  require(std::size_t{side} * side == data.features(), "dataset_to_idx: images must be square");
  IdxArray img;
  img.dims = {static_cast<std::uint32_t>(data.size()), side, side};
  img.data.reserve(data.inputs.size());
  for (const double v : data.inputs.data()) {
    require(v >= 0.0 && v <= 1.0, "dataset_to_idx: pixel outside [0, 1]");
    img.data.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  IdxArray lab;
  lab.dims = {static_cast<std::uint32_t>(data.size())};
  for (const int y : data.labels) lab.data.push_back(static_cast<std::uint8_t>(y));
  return {encode_idx(img), encode_idx(lab)};
}

void write_idx(const Dataset& data, const std::filesystem::path& images,
               const std::filesystem::path& labels) {
  const auto [img, lab] = dataset_to_idx(data);
  for (const auto& [path, bytes] : {std::pair{images, &img}, std::pair{labels, &lab}}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes->data()), static_cast<std::streamsize>(bytes->size()));
  }
}

}  // namespace deepr
