#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "drape/autodiff.hpp"
#include "drape/mesh.hpp"

namespace drape {

inline constexpr int kJointCount = 24;
inline constexpr int kPoseDim = 3 * kJointCount;
inline constexpr int kShapeDim = 10;
/// Flattened (R_k - I) over the 23 non-root joints.
inline constexpr int kPoseBasisDim = 9 * (kJointCount - 1);

/// Per-frame pose (axis-angle per joint, radians) and shape coefficients.
struct PoseParams {
  std::array<double, kPoseDim> theta{};
  std::array<double, kShapeDim> beta{};

  /// Throws if any value is non-finite.
  void validate() const;
};

/// K x 12 rows of row-major 3x4 [R | t] joint transforms.
using JointTransforms = Eigen::Matrix<double, Eigen::Dynamic, 12, Eigen::RowMajor>;

/// Linear parametric body: shape-dependent template, regressed skeleton,
/// optional pose-corrective basis and skinning weights.
struct BodyModel {
  TriMesh templateMesh;
  /// (3V x kShapeDim), row 3v+d holds coordinate d of vertex v.
  MatrixX shapeBasis;
  /// (3V x kPoseBasisDim) or empty.
  MatrixX poseBasis;
  /// K x V, rows sum to 1.
  MatrixX jointRegressor;
  std::vector<Index> parents;
  /// V x K, rows on the probability simplex.
  MatrixX blendWeights;

  [[nodiscard]] int jointCount() const { return static_cast<int>(parents.size()); }
  [[nodiscard]] Index vertexCount() const { return templateMesh.vertexCount(); }
  void validate() const;
};

/// B + Σ β_k S_k.
TriMesh shapedTemplate(const BodyModel& model, std::span<const double> beta);

/// Joint regressor applied to the shaped template.
Points skeletonJoints(const BodyModel& model, std::span<const double> beta);

/// Per-joint transforms taking rest-pose points to posed points.
JointTransforms forwardKinematics(std::span<const double> theta, const Points& restJoints,
                                  std::span<const Index> parents);

/// v'_i = Σ_k w_ik (A_k v_i).
Points linearBlendSkinning(const Points& vertices, const MatrixX& weights,
                           const JointTransforms& transforms);

struct PosedBody {
  TriMesh mesh;
  Points restJoints;
  JointTransforms transforms;
};

/// Full body posing; also returns the skeleton and transforms so a garment
/// can be skinned with the same joints.
PosedBody poseBodyDetailed(const BodyModel& model, const PoseParams& params);
TriMesh poseBody(const BodyModel& model, const PoseParams& params);

/// Rotation-deviation features feeding the pose-corrective basis.
std::vector<double> poseFeature(std::span<const double> theta);

/// Differentiable joint transforms from a [K x 3] axis-angle node.
ad::Var jointTransformsNode(ad::Var axisAngles, const Points& restJoints,
                            std::span<const Index> parents);

/// Layout: `body.obj` + `body_meta.json`; bases stored as little-endian f32
/// blobs next to the JSON (or inline base64).
BodyModel loadBodyModel(const std::filesystem::path& dir);
void saveBodyModel(const BodyModel& model, const std::filesystem::path& dir);

/// SMPL joint hierarchy used by the bundled model.
std::vector<Index> smplParents();

/// Index of the joint named as in the SMPL layout (e.g. "left_elbow").
Index smplJoint(std::string_view name);

}  // namespace drape
