#include "drape/loss.hpp"

#include <array>
#include <cmath>

#include "drape/geometry_ops.hpp"
#include "drape/ops.hpp"

namespace drape {

void LossWeights::validate() const {
  for (const double v : {mask, normal, edge, face, angle, collision, collisionRadius}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("loss weights must be finite and non-negative");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error("collision epsilon must be positive");
}

namespace ad {

LossBreakdown LossNodes::values() const {
  return LossBreakdown{total.item(), mask.item(),  normal.item(),   edge.item(),
                       face.item(),  angle.item(), collision.item()};
}

namespace {

Var weighted(Var term, double w) { return scale(term, w); }

Var sumNodes(std::initializer_list<Var> nodes) {
  const std::vector<Var> list(nodes);
  const std::vector<double> ones(list.size(), 1.0);
  return linearCombination(list, ones);
}

}  // namespace

LossNodes clothLoss(Var posed, const GarmentRig& rig, const Points& bodyPosed, std::span<const Vec3> bodyNormals,
                    const LossWeights& w) {
  w.validate();
  const Shape expected{static_cast<std::size_t>(rig.topology.vertexCount), 3};
  if (posed.shape() != expected) {
    throw Error("cloth_loss: posed garment " + shapeString(posed.shape()) + " does not match rig topology " +
                shapeString(expected));
  }
  Tape& t = posed.tape();
  LossNodes n;
  n.mask = t.scalar(0.0);
  n.normal = t.scalar(0.0);

  const Var lengths = edgeLengths(posed, rig.topology.edges);
  const Var rest = t.constant(std::vector<double>(rig.topology.restEdgeLengths), lengths.shape());
  n.edge = w.edge > 0.0 ? weighted(sumSquares(sub(lengths, rest)), w.edge) : t.scalar(0.0);

  if (w.face > 0.0 || w.angle > 0.0) {
    const Var fn = faceNormals(posed, rig.templateMesh.faces);
    n.face = w.face > 0.0 ? weighted(sumSquares(faceLaplacian(fn, rig.topology.faceAdjacency)), w.face)
                          : t.scalar(0.0);
    n.angle = w.angle > 0.0 ? weighted(sumSquares(dihedralAngles(fn, rig.topology.dihedralPairs)), w.angle)
                            : t.scalar(0.0);
  } else {
    n.face = t.scalar(0.0);
    n.angle = t.scalar(0.0);
  }

  if (w.collision > 0.0 && bodyPosed.rows() > 0) {
    const CollisionSettings settings{w.epsilon, w.collisionRadius};
    n.collision = weighted(collisionPenalty(posed, bodyPosed, bodyNormals, settings), w.collision);
  } else {
    n.collision = t.scalar(0.0);
  }
  n.total = sumNodes({n.mask, n.normal, n.edge, n.face, n.angle, n.collision});
  return n;
}

LossNodes totalLoss(Var posed, const GarmentRig& rig, const FrameRecord& frame, const Points& bodyPosed,
                    std::span<const Vec3> bodyNormals, const LossWeights& w, double sharpness,
                    const FeatureTransform& features) {
  LossNodes n = clothLoss(posed, rig, bodyPosed, bodyNormals, w);
  const Faces& faces = rig.templateMesh.faces;
  if (w.mask > 0.0) {
    const Var sil = rasterizeSilhouette(posed, faces, frame.camera, sharpness);
    n.mask = weighted(maskTerm(sil, frame.mask), w.mask);
  }
  if (w.normal > 0.0) {
    const Var normals = rasterizeNormals(posed, vertexNormals(posed, faces), faces, frame.camera, sharpness);
    n.normal = weighted(normalTerm(normals, frame.mask, frame.normal, features), w.normal);
  }
  n.total = sumNodes({n.mask, n.normal, n.edge, n.face, n.angle, n.collision});
  return n;
}

}  // namespace ad

namespace {

ad::Var imageVar(ad::Tape& t, const Image& img) {
  ad::Shape shape{static_cast<std::size_t>(img.height), static_cast<std::size_t>(img.width)};
  if (img.channels != 1) shape.push_back(static_cast<std::size_t>(img.channels));
  return t.constant(std::vector<double>(img.data), shape);
}

Image imageFrom(ad::Var v, ImageKind kind) {
  const ad::Shape& s = v.shape();
  Image img;
  img.height = static_cast<int>(s[0]);
  img.width = static_cast<int>(s[1]);
  img.channels = s.size() == 3 ? static_cast<int>(s[2]) : 1;
  img.kind = kind;
  img.data.assign(v.value().begin(), v.value().end());
  return img;
}

ad::Var pointsVar(ad::Tape& t, const Points& p) {
  return t.constant(std::vector<double>(p.data(), p.data() + p.size()),
                    ad::Shape{static_cast<std::size_t>(p.rows()), 3});
}

}  // namespace

double maskTerm(const Image& pred, const Image& gt) {
  if (!pred.sameDimensions(gt)) throw Error("mask_term: image sizes differ");
  ad::Tape t;
  return ad::maskTerm(imageVar(t, pred), gt).item();
}

FeaturePyramid featurePyramid(const Image& image) {
  ad::Tape t;
  FeaturePyramid out;
  ad::Var level = imageVar(t, image);
  for (int l = 0; l < 4; ++l) {
    if (l > 0) level = ad::pyramidDown(level);
    out.levels.push_back(imageFrom(level, image.kind));
    out.gradients.push_back(imageFrom(ad::gradientMagnitude(level), image.kind));
  }
  return out;
}

std::vector<double> featureTransform(const Image& image) {
  ad::Tape t;
  const ad::Var f = ad::featureTransform(imageVar(t, image));
  return {f.value().begin(), f.value().end()};
}

Image maskedNormal(const Image& gtMask, const Image& gtNormal) {
  if (gtMask.width != gtNormal.width || gtMask.height != gtNormal.height || gtMask.channels != 1) {
    throw Error("normal_term: mask and normal image sizes differ");
  }
  Image out = gtNormal;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const double m = gtMask.at(x, y);
      for (int c = 0; c < out.channels; ++c) {
        out.at(x, y, c) = kNormalBackground + m * (gtNormal.at(x, y, c) - kNormalBackground);
      }
    }
  }
  return out;
}

double normalTerm(const Image& predNormal, const Image& gtMask, const Image& gtNormal) {
  if (!predNormal.sameDimensions(gtNormal)) throw Error("normal_term: image sizes differ");
  ad::Tape t;
  return ad::normalTerm(imageVar(t, predNormal), gtMask, gtNormal).item();
}

LossBreakdown clothLoss(const TriMesh& posed, const GarmentRig& rig, const TriMesh& bodyPosed,
                        std::span<const Vec3> bodyNormals, const LossWeights& w) {
  ad::Tape t;
  return ad::clothLoss(pointsVar(t, posed.vertices), rig, bodyPosed.vertices, bodyNormals, w).values();
}

LossBreakdown totalLoss(const FrameRecord& frame, const TriMesh& posed, const GarmentRig& rig,
                        const TriMesh& bodyPosed, const LossWeights& w, double sharpness) {
  ad::Tape t;
  const auto normals = vertexNormals(bodyPosed).normals;
  return ad::totalLoss(pointsVar(t, posed.vertices), rig, frame, bodyPosed.vertices, normals, w, sharpness)
      .values();
}

}  // namespace drape
