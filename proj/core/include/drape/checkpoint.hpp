#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "drape/garment.hpp"
#include "drape/network.hpp"

namespace drape {

enum class Precision { Double, Single };

std::string_view toString(Precision p);
Precision parsePrecision(std::string_view text);

inline constexpr std::string_view kBlendWeightsParam = "garment.blend_weights";

/// Container layout: "GDCK", u32 version, u64 header length, JSON header
/// (seed, net config, dtype, tensor table, metadata), then little-endian
/// tensor blobs in table order.
struct Checkpoint {
  NetConfig net;
  Index vertexCount = 0;
  /// Network tensors, optionally followed by kBlendWeightsParam.
  ParamSet params;
  std::uint64_t seed = 0;
  Precision dtype = Precision::Double;
  int epoch = 0;
  /// Free-form JSON object text (run configuration).
  std::string metadata = "{}";
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void saveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint loadCheckpoint(const std::filesystem::path& path);

/// Network tensors only; validated against the stored config.
DeformationNet networkFromCheckpoint(const Checkpoint& checkpoint);
/// Replaces the rig's weights if the checkpoint carries them.
bool applyBlendWeights(const Checkpoint& checkpoint, GarmentRig& rig);

}  // namespace drape
