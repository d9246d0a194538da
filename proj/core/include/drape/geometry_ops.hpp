#pragma once

#include <span>
#include <vector>

#include "drape/autodiff.hpp"
#include "drape/mesh.hpp"

/// Differentiable geometry primitives: rotations, kinematics, skinning and
/// the per-element quantities behind the cloth energies.
namespace drape::ad {

/// Axis-angle rows [K x 3] to row-major rotation matrices [K x 9].
Var rodrigues(Var axisAngles);

/// Composes local joint rotations [K x 9] about rest joint positions
/// [K x 3] down the kinematic tree. Returns per-joint 3x4 transforms
/// [K x 12] (row-major [R | t]) that take rest-pose points to posed points.
/// Throws on cycles or out-of-range parents.
Var forwardKinematics(Var localRotations, Var restJoints, std::span<const Index> parents);

/// Linear blend skinning: v'_i = Σ_k w_ik (R_k v_i + t_k).
/// vertices [N x 3], weights [N x K], transforms [K x 12].
Var linearBlendSkinning(Var vertices, Var weights, Var transforms);

/// Edge lengths [E] for the given edge list.
Var edgeLengths(Var vertices, std::span<const Edge> edges);

/// Unit face normals [F x 3]. Throws on a zero-area face.
Var faceNormals(Var vertices, const Faces& faces);

/// Area-weighted unit vertex normals [N x 3]; isolated vertices get 0.
Var vertexNormals(Var vertices, const Faces& faces);

/// Unsigned angle between the normals of each dihedral pair [P].
Var dihedralAngles(Var faceNormals, std::span<const DihedralPair> pairs);

/// Uniform graph Laplacian over face adjacency:
/// L_f = mean_{g ~ f}(n_g) - n_f, zero for faces without neighbors. [F x 3]
Var faceLaplacian(Var faceNormals, const std::vector<std::vector<Index>>& adjacency);

struct CollisionSettings {
  double epsilon = 0.004;
  /// Body vertices farther than this from every garment vertex are skipped.
  double radius = 0.05;
};

/// Σ_j max(ε - d_j·n_j, 0)² over body vertices j, with d_j the vector from
/// body vertex j to its nearest garment vertex. The nearest index is fixed
/// within one evaluation. Result shape [1].
Var collisionPenalty(Var garmentVertices, const Points& bodyVertices,
                     std::span<const Vec3> bodyNormals, const CollisionSettings& settings);

}  // namespace drape::ad
