#pragma once

#include "drape/body.hpp"
#include "drape/garment.hpp"

/// Procedurally generated meshes and models bundled for tests, examples and
/// the synthetic sequence generator.
namespace drape::procedural {

/// Low-poly 24-joint body built from elliptic tubes (624 vertices). Joint
/// layout follows the SMPL hierarchy; the pose-corrective basis is empty.
BodyModel syntheticBody();

struct TubeSpec {
  Index rings = 10;
  Index segments = 20;
  double yTop = 0.32;
  double yBottom = -0.02;
  /// Elliptic radii (x, z) at the top and bottom ring.
  double radiusXTop = 0.175;
  double radiusZTop = 0.125;
  double radiusXBottom = 0.175;
  double radiusZBottom = 0.125;
};

/// Open vertical tube around the y axis with outward-facing triangles.
TriMesh verticalTube(const TubeSpec& spec);

/// Sleeveless open-cylinder top around the synthetic body's torso
/// (200 vertices with the default spec).
TriMesh shirtTemplate();
/// Flared open-cylinder skirt around the synthetic body's hips.
TriMesh skirtTemplate();

/// nx x ny quads over [0, sizeX] x [0, sizeY] in the z = 0 plane, each split
/// into two counter-clockwise triangles (normals +z).
TriMesh grid(Index nx, Index ny, double sizeX, double sizeY);

/// Unit icosphere; level 0 is the icosahedron, each level splits every face
/// into four.
TriMesh icosphere(int level);

}  // namespace drape::procedural
