#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "drape/body.hpp"
#include "drape/garment.hpp"
#include "drape/render.hpp"

namespace drape {

/// One supervised frame: pose, shape, camera and the observed images.
struct FrameRecord {
  PoseParams pose;
  Camera camera;
  Image mask;
  Image normal;
  int frameIndex = 0;
};

inline constexpr double kDefaultTrainFraction = 0.8;

struct SequenceDataset {
  /// Sorted by frameIndex.
  std::vector<FrameRecord> frames;
  /// Indices into `frames`, ascending; disjoint and together exhaustive.
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  /// Throws on mixed image sizes, non-constant beta, duplicate frame
  /// indices or a broken split. Messages name the offending frame.
  void validate() const;
};

/// Ranks frames by a hash of their frame index and gives the first
/// round(fraction * n) to training. Independent of frame order.
void assignSplit(SequenceDataset& dataset, double trainFraction = kDefaultTrainFraction);

/// Layout: poses/NNNN.json ({theta[72], beta[10], camera[3]}),
/// masks/NNNN.png, normals/NNNN.png.
SequenceDataset loadSequence(const std::filesystem::path& dir, double trainFraction = kDefaultTrainFraction);
void saveSequence(const SequenceDataset& dataset, const std::filesystem::path& dir);

/// The body and garment stored next to a sequence (`body/`, `template/`).
struct SceneAssets {
  BodyModel body;
  GarmentRig rig;
};
SceneAssets loadSceneAssets(const std::filesystem::path& dir);
void saveSceneAssets(const SceneAssets& assets, const std::filesystem::path& dir);

/// One OBJ per frame, NNNN.obj, sharing the face list. Frames load in
/// ascending index order; `frameIndices` receives the indices when given.
MeshSequence loadMeshSequence(const std::filesystem::path& dir, std::vector<int>* frameIndices = nullptr);
/// Frames are named 0000, 0001, ... unless `frameIndices` names them.
void saveMeshSequence(const MeshSequence& sequence, const std::filesystem::path& dir,
                      std::span<const int> frameIndices = {});

/// Zero-padded four-digit frame name.
std::string frameName(int index);

}  // namespace drape
