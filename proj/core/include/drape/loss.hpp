#pragma once

#include <functional>
#include <vector>

#include "drape/autodiff.hpp"
#include "drape/dataset.hpp"
#include "drape/garment.hpp"
#include "drape/render.hpp"

namespace drape {

struct LossWeights {
  double mask = 500.0;
  double normal = 1500.0;
  double edge = 100.0;
  double face = 2000.0;
  double angle = 1.0;
  double collision = 100.0;
  /// Collision offset ε in meters.
  double epsilon = 0.004;
  /// Body vertices farther than this from the garment are not tested.
  double collisionRadius = 0.05;

  void validate() const;
};

/// Weighted terms; total is their sum.
struct LossBreakdown {
  double total = 0.0;
  double mask = 0.0;
  double normal = 0.0;
  double edge = 0.0;
  double face = 0.0;
  double angle = 0.0;
  double collision = 0.0;
};

/// Maps an [H x W x 3] image node to a flat feature vector.
using FeatureTransform = std::function<ad::Var(ad::Var image)>;

namespace ad {

/// Frobenius norm of pred - gt; pred is [H x W] or [H x W x C].
Var maskTerm(Var pred, const Image& gt);

/// 5-tap binomial blur followed by 2x decimation, edge-replicated. [H x W x C]
/// -> [H/2 x W/2 x C].
Var pyramidDown(Var image);
/// sqrt(gx² + gy² + e²) - e per channel with forward differences (zero on
/// the last row/column), e = 1e-3.
Var gradientMagnitude(Var image);
/// Image, three pyramid levels below it, and the gradient magnitude of each
/// of the four levels, flattened and concatenated.
Var featureTransform(Var image);

/// ‖F(pred) - F(masked gt)‖ where the gt normal image is masked towards the
/// background value: 0.5 + m (n - 0.5).
Var normalTerm(Var predNormal, const Image& gtMask, const Image& gtNormal,
               const FeatureTransform& features = featureTransform);

struct LossNodes {
  Var total;
  Var mask;
  Var normal;
  Var edge;
  Var face;
  Var angle;
  Var collision;

  [[nodiscard]] LossBreakdown values() const;
};

/// Weighted edge, face, angle and collision terms for posed garment
/// vertices [N x 3]; mask/normal are zero scalars.
LossNodes clothLoss(Var posed, const GarmentRig& rig, const Points& bodyPosed,
                    std::span<const Vec3> bodyNormals, const LossWeights& w);

LossNodes totalLoss(Var posed, const GarmentRig& rig, const FrameRecord& frame, const Points& bodyPosed,
                    std::span<const Vec3> bodyNormals, const LossWeights& w, double sharpness,
                    const FeatureTransform& features = featureTransform);

}  // namespace ad

/// Unweighted Frobenius norm of the difference. Throws on a size mismatch.
double maskTerm(const Image& pred, const Image& gt);

struct FeaturePyramid {
  /// Level 0 is the input.
  std::vector<Image> levels;
  std::vector<Image> gradients;
};
FeaturePyramid featurePyramid(const Image& image);
std::vector<double> featureTransform(const Image& image);

/// Unweighted normal-map distance.
double normalTerm(const Image& predNormal, const Image& gtMask, const Image& gtNormal);

/// gt normal masked towards the background: 0.5 + m (n - 0.5).
Image maskedNormal(const Image& gtMask, const Image& gtNormal);

LossBreakdown clothLoss(const TriMesh& posed, const GarmentRig& rig, const TriMesh& bodyPosed,
                        std::span<const Vec3> bodyNormals, const LossWeights& w);

LossBreakdown totalLoss(const FrameRecord& frame, const TriMesh& posed, const GarmentRig& rig,
                        const TriMesh& bodyPosed, const LossWeights& w, double sharpness = kDefaultSharpness);

}  // namespace drape
