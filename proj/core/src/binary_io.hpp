#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "drape/common.hpp"

namespace drape::detail {

inline void appendF32(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

inline void appendF64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

inline void appendU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void appendU64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t readLE(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
  if (offset + static_cast<std::size_t>(width) > bytes.size()) throw Error("binary blob truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return v;
}

inline double readF32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(readLE(bytes, offset, 4))));
}

inline double readF64(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return std::bit_cast<double>(readLE(bytes, offset, 8));
}

/// Decodes `count` values of `dtype` ("f32" or "f64") starting at `offset`.
inline std::vector<double> decodeFloats(std::span<const std::uint8_t> bytes, std::size_t offset,
                                        std::size_t count, const std::string& dtype) {
  std::vector<double> out(count);
  if (dtype == "f32") {
    for (std::size_t i = 0; i < count; ++i) out[i] = readF32(bytes, offset + 4 * i);
  } else if (dtype == "f64") {
    for (std::size_t i = 0; i < count; ++i) out[i] = readF64(bytes, offset + 8 * i);
  } else {
    throw Error("unsupported dtype '" + dtype + "'");
  }
  return out;
}

inline std::vector<std::uint8_t> readFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void writeFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

inline std::string readTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void writeTextFile(const std::filesystem::path& path, const std::string& text) {
  writeFileBytes(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace drape::detail
