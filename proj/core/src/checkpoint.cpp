#include "drape/checkpoint.hpp"

#include <array>

#include "binary_io.hpp"
#include "json_io.hpp"

namespace drape {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'G', 'D', 'C', 'K'};

}  // namespace

std::string_view toString(Precision p) { return p == Precision::Single ? "single" : "double"; }

Precision parsePrecision(std::string_view text) {
  if (text == "double" || text == "f64") return Precision::Double;
  if (text == "single" || text == "f32") return Precision::Single;
  throw Error("unknown precision '" + std::string(text) + "' (expected double or single)");
}

void saveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const bool single = checkpoint.dtype == Precision::Single;
  const std::size_t width = single ? 4 : 8;
  detail::Json tensors = detail::Json::array();
  std::size_t offset = 0;
  for (const Param& p : checkpoint.params) {
    tensors.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}, {"count", p.value.size()}});
    offset += width * p.value.size();
  }
  detail::Json metadata;
  try {
    metadata = detail::Json::parse(checkpoint.metadata);
  } catch (const detail::Json::exception& e) {
    throw Error(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  const detail::Json header{{"seed", checkpoint.seed},
                            {"net", detail::toJsonValue(checkpoint.net)},
                            {"vertex_count", checkpoint.vertexCount},
                            {"dtype", single ? "f32" : "f64"},
                            {"epoch", checkpoint.epoch},
                            {"tensors", tensors},
                            {"metadata", metadata}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> bytes(kMagic.begin(), kMagic.end());
  detail::appendU32(bytes, kCheckpointVersion);
  detail::appendU64(bytes, text.size());
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.reserve(bytes.size() + offset);
  for (const Param& p : checkpoint.params) {
    for (const double v : p.value) {
      if (single) {
        detail::appendF32(bytes, v);
      } else {
        detail::appendF64(bytes, v);
      }
    }
  }
  detail::writeFileBytes(path, bytes);
}

Checkpoint loadCheckpoint(const std::filesystem::path& path) {
  const auto bytes = detail::readFileBytes(path);
  const std::string where = "checkpoint " + path.string() + ": ";
  if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(where + "not a checkpoint file");
  }
  const auto version = static_cast<std::uint32_t>(detail::readLE(bytes, 4, 4));
  if (version != kCheckpointVersion) throw Error(where + "unsupported version " + std::to_string(version));
  const std::uint64_t headerLen = detail::readLE(bytes, 8, 8);
  if (16 + headerLen > bytes.size()) throw Error(where + "truncated header");
  Checkpoint ck;
  try {
    const auto header = detail::Json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(headerLen));
    ck.seed = header.at("seed").get<std::uint64_t>();
    detail::fromJsonValue(header.at("net"), ck.net);
    ck.vertexCount = header.at("vertex_count").get<Index>();
    const std::string dtype = header.at("dtype").get<std::string>();
    ck.dtype = parsePrecision(dtype);
    ck.epoch = header.at("epoch").get<int>();
    ck.metadata = header.at("metadata").dump();
    const std::size_t base = 16 + headerLen;
    for (const auto& t : header.at("tensors")) {
      const auto shape = t.at("shape").get<ad::Shape>();
      const auto count = t.at("count").get<std::size_t>();
      const auto offset = t.at("offset").get<std::size_t>();
      if (ad::numel(shape) != count) throw Error(where + "tensor shape/count mismatch");
      ck.params.add(t.at("name").get<std::string>(), shape, detail::decodeFloats(bytes, base + offset, count, dtype));
    }
  } catch (const detail::Json::exception& e) {
    throw Error(where + "malformed header: " + e.what());
  }
  return ck;
}

DeformationNet networkFromCheckpoint(const Checkpoint& checkpoint) {
  DeformationNet net{checkpoint.net, checkpoint.vertexCount, {}};
  for (const Param& p : checkpoint.params) {
    if (p.name == kBlendWeightsParam) continue;
    net.params.add(p.name, p.shape, p.value);
  }
  net.validate();
  return net;
}

bool applyBlendWeights(const Checkpoint& checkpoint, GarmentRig& rig) {
  if (!checkpoint.params.contains(kBlendWeightsParam)) return false;
  const Param& p = checkpoint.params.at(kBlendWeightsParam);
  const ad::Shape expected{static_cast<std::size_t>(rig.blendWeights.rows()),
                           static_cast<std::size_t>(rig.blendWeights.cols())};
  if (p.shape != expected) {
    throw Error("checkpoint blend weights " + ad::shapeString(p.shape) + " do not match the rig " +
                ad::shapeString(expected));
  }
  std::copy(p.value.begin(), p.value.end(), rig.blendWeights.data());
  return true;
}

}  // namespace drape
