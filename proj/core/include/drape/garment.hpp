#pragma once

#include <filesystem>
#include <string_view>

#include "drape/body.hpp"
#include "drape/mesh.hpp"

namespace drape {

enum class GarmentCategory { UpperShort, UpperLong, PantsShort, PantsLong, SkirtShort, SkirtLong };

std::string_view toString(GarmentCategory category);
GarmentCategory parseGarmentCategory(std::string_view text);

/// Per-vertex offsets (meters) added to the garment template before skinning.
using Displacement = Points;

/// Garment template registered in the body's rest space, with its
/// connectivity and skinning weights.
struct GarmentRig {
  TriMesh templateMesh;
  TopologyCache topology;
  /// N x K, rows on the probability simplex. Trainable.
  MatrixX blendWeights;
  GarmentCategory category = GarmentCategory::UpperShort;

  [[nodiscard]] Index vertexCount() const { return templateMesh.vertexCount(); }
  void validate() const;
};

/// Each garment vertex copies the weight row of its nearest body template
/// vertex; equidistant candidates resolve to the lowest body index.
MatrixX transferBlendWeights(const TriMesh& garmentTemplate, const BodyModel& body);

/// Builds topology and transfers weights from `body`.
GarmentRig makeGarmentRig(TriMesh garmentTemplate, const BodyModel& body, GarmentCategory category);

/// T + d. Throws on a shape mismatch or non-finite offsets.
TriMesh applyDisplacement(const GarmentRig& rig, const Displacement& d);

/// Skins T + d with the body's joint transforms for `params`.
TriMesh poseGarment(const GarmentRig& rig, const Displacement& d, const BodyModel& body,
                    const PoseParams& params);
/// Same, reusing transforms already computed for the body.
TriMesh poseGarment(const GarmentRig& rig, const Displacement& d, const JointTransforms& transforms);

/// Euclidean projection of one vector onto the probability simplex.
std::vector<double> projectToSimplex(std::span<const double> row);
/// Row-wise projection, in place.
void projectRowsToSimplex(MatrixX& weights);

/// Layout: `garment.obj` + `garment_meta.json` (category, optional weight
/// triplets). Missing weights are transferred from `body`.
GarmentRig loadGarmentRig(const std::filesystem::path& dir, const BodyModel& body);
void saveGarmentRig(const GarmentRig& rig, const std::filesystem::path& dir);

}  // namespace drape
