#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drape/gradcheck.hpp"
#include "drape/loss.hpp"
#include "drape/procedural.hpp"
#include "drape/synthetic.hpp"
#include "helpers.hpp"

namespace drape {
namespace {

Image randomImage(int w, int h, int c, ImageKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h, c, kind);
  for (double& v : img.data) v = u(rng);
  return img;
}

double l2Diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Rig without a body: everything skinned to the root.
GarmentRig bareRig(TriMesh mesh) {
  GarmentRig rig;
  rig.topology = buildTopology(mesh);
  rig.blendWeights = MatrixX::Zero(mesh.vertexCount(), kJointCount);
  rig.blendWeights.col(0).setOnes();
  rig.templateMesh = std::move(mesh);
  return rig;
}

TriMesh bumpy(TriMesh mesh, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  for (Index i = 0; i < mesh.vertexCount(); ++i) {
    for (int d = 0; d < 3; ++d) mesh.vertices(i, d) += u(rng);
  }
  return mesh;
}

TriMesh transformed(TriMesh mesh, const Mat3& r, const Vec3& t) {
  for (Index i = 0; i < mesh.vertexCount(); ++i) {
    mesh.vertices.row(i) = (r * vertexAt(mesh.vertices, i) + t).transpose();
  }
  return mesh;
}

TriMesh pointCloud(const std::vector<Vec3>& pts) {
  TriMesh m;
  m.vertices.resize(static_cast<Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.vertices.row(static_cast<Index>(i)) = pts[i].transpose();
  return m;
}

LossWeights only(double LossWeights::*term) {
  LossWeights w;
  w.mask = w.normal = w.edge = w.face = w.angle = w.collision = 0.0;
  w.*term = 1.0;
  return w;
}

// ---- weights ----

TEST(LossWeights, DefaultsEchoTrainingWeights) {
  const LossWeights w;
  EXPECT_EQ(w.mask, 500.0);
  EXPECT_EQ(w.normal, 1500.0);
  EXPECT_EQ(w.edge, 100.0);
  EXPECT_EQ(w.face, 2000.0);
  EXPECT_EQ(w.angle, 1.0);
  EXPECT_EQ(w.collision, 100.0);
  EXPECT_EQ(w.epsilon, 0.004);
  EXPECT_NO_THROW(w.validate());
}

TEST(LossWeights, RejectsNegativeAndNonFinite) {
  LossWeights w;
  w.face = -1.0;
  EXPECT_THROW(w.validate(), Error);
  w = LossWeights{};
  w.mask = std::nan("");
  EXPECT_THROW(w.validate(), Error);
  w = LossWeights{};
  w.epsilon = 0.0;
  EXPECT_THROW(w.validate(), Error);
  w = LossWeights{};
  w.edge = 0.0;
  EXPECT_NO_THROW(w.validate());
}

// ---- mask term ----

TEST(MaskTerm, IdenticalIsZero) {
  const Image a = randomImage(8, 6, 1, ImageKind::Mask, 1);
  EXPECT_EQ(maskTerm(a, a), 0.0);
}

TEST(MaskTerm, ZerosAgainstOnesIsFour) {
  const Image zeros(4, 4, 1, ImageKind::Mask, 0.0);
  const Image ones(4, 4, 1, ImageKind::Mask, 1.0);
  EXPECT_DOUBLE_EQ(maskTerm(zeros, ones), 4.0);
}

TEST(MaskTerm, MatchesElementwiseSum) {
  const Image a = randomImage(13, 7, 1, ImageKind::Mask, 2);
  const Image b = randomImage(13, 7, 1, ImageKind::Mask, 3);
  double s = 0.0;
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 13; ++x) s += std::pow(a.at(x, y) - b.at(x, y), 2);
  }
  EXPECT_NEAR(maskTerm(a, b), std::sqrt(s), 1e-12);
  EXPECT_DOUBLE_EQ(maskTerm(a, b), maskTerm(b, a));
}

TEST(MaskTerm, SizeMismatchThrows) {
  EXPECT_THROW((void)maskTerm(Image(4, 4, 1, ImageKind::Mask), Image(4, 5, 1, ImageKind::Mask)), Error);
}

// ---- feature transform ----

TEST(FeatureTransform, ConstantImageHasZeroGradients) {
  const FeaturePyramid p = featurePyramid(Image(32, 32, 3, ImageKind::Normal, 0.3));
  ASSERT_EQ(p.gradients.size(), 4u);
  for (const Image& g : p.gradients) {
    for (const double v : g.data) EXPECT_EQ(v, 0.0);
  }
  for (const Image& l : p.levels) {
    for (const double v : l.data) EXPECT_NEAR(v, 0.3, 1e-15);
  }
}

TEST(FeatureTransform, LevelsHalve) {
  const FeaturePyramid p = featurePyramid(Image(128, 128, 3, ImageKind::Normal, 0.5));
  ASSERT_EQ(p.levels.size(), 4u);
  const int sizes[] = {128, 64, 32, 16};
  for (int l = 0; l < 4; ++l) {
    EXPECT_EQ(p.levels[l].width, sizes[l]);
    EXPECT_EQ(p.levels[l].height, sizes[l]);
    EXPECT_EQ(p.levels[l].channels, 3);
    EXPECT_TRUE(p.gradients[l].sameDimensions(p.levels[l]));
  }
  const auto f = featureTransform(Image(128, 128, 3, ImageKind::Normal, 0.5));
  EXPECT_EQ(f.size(), 2u * 3u * (128 * 128 + 64 * 64 + 32 * 32 + 16 * 16));
}

TEST(FeatureTransform, StepEdgePeaksOnEdgeColumn) {
  Image img(32, 32, 3, ImageKind::Normal, 0.0);
  for (int y = 0; y < 32; ++y) {
    for (int x = 16; x < 32; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 1.0;
    }
  }
  const FeaturePyramid p = featurePyramid(img);
  const double e = 1e-3;
  auto mag = [e](double g) { return std::sqrt(g * g + e * e) - e; };

  // Level 0: the forward difference sees the step between columns 15 and 16.
  for (int x = 0; x < 32; ++x) {
    EXPECT_NEAR(p.gradients[0].at(x, 10, 1), x == 15 ? mag(1.0) : 0.0, 1e-14) << x;
  }
  // Level 1: the binomial blur of the step sampled at even columns gives
  // 1/16 at column 7, 11/16 at 8 and 1 from 9 on.
  const Image& l1 = p.levels[1];
  EXPECT_NEAR(l1.at(6, 5), 0.0, 1e-15);
  EXPECT_NEAR(l1.at(7, 5), 1.0 / 16.0, 1e-15);
  EXPECT_NEAR(l1.at(8, 5), 11.0 / 16.0, 1e-15);
  EXPECT_NEAR(l1.at(9, 5), 1.0, 1e-15);
  const Image& g1 = p.gradients[1];
  EXPECT_NEAR(g1.at(6, 5), mag(1.0 / 16.0), 1e-14);
  EXPECT_NEAR(g1.at(7, 5), mag(10.0 / 16.0), 1e-14);
  EXPECT_NEAR(g1.at(8, 5), mag(5.0 / 16.0), 1e-14);
  int peak = 0;
  for (int x = 1; x < 16; ++x) {
    if (g1.at(x, 5) > g1.at(peak, 5)) peak = x;
  }
  EXPECT_EQ(peak, 7);
}

TEST(FeatureTransform, Deterministic) {
  const Image img = randomImage(16, 16, 3, ImageKind::Normal, 4);
  EXPECT_EQ(featureTransform(img), featureTransform(img));
}

// ---- normal term ----

TEST(NormalTerm, IdenticalMaskedNormalsGiveZero) {
  const Image mask = randomImage(16, 16, 1, ImageKind::Mask, 5);
  const Image normal = randomImage(16, 16, 3, ImageKind::Normal, 6);
  EXPECT_NEAR(normalTerm(maskedNormal(mask, normal), mask, normal), 0.0, 1e-12);
}

TEST(NormalTerm, EmptyMaskComparesAgainstBackground) {
  const Image mask(16, 16, 1, ImageKind::Mask, 0.0);
  const Image normal = randomImage(16, 16, 3, ImageKind::Normal, 7);
  const Image pred = randomImage(16, 16, 3, ImageKind::Normal, 8);
  const Image background(16, 16, 3, ImageKind::Normal, kNormalBackground);
  EXPECT_NEAR(normalTerm(pred, mask, normal), l2Diff(featureTransform(pred), featureTransform(background)), 1e-12);
  EXPECT_NEAR(normalTerm(background, mask, normal), 0.0, 1e-12);
}

TEST(NormalTerm, MatchesComposedOracle) {
  const Image mask = randomImage(24, 20, 1, ImageKind::Mask, 9);
  const Image normal = randomImage(24, 20, 3, ImageKind::Normal, 10);
  const Image pred = randomImage(24, 20, 3, ImageKind::Normal, 11);
  Image masked = normal;
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 24; ++x) {
      for (int c = 0; c < 3; ++c) masked.at(x, y, c) = 0.5 + mask.at(x, y) * (normal.at(x, y, c) - 0.5);
    }
  }
  const Image viaHelper = maskedNormal(mask, normal);
  for (std::size_t i = 0; i < masked.size(); ++i) EXPECT_NEAR(viaHelper.data[i], masked.data[i], 1e-15);
  EXPECT_NEAR(normalTerm(pred, mask, normal), l2Diff(featureTransform(pred), featureTransform(masked)), 1e-10);
}

TEST(NormalTerm, SizeMismatchThrows) {
  const Image mask(16, 16, 1, ImageKind::Mask, 1.0);
  const Image normal(16, 16, 3, ImageKind::Normal, 0.5);
  EXPECT_THROW((void)normalTerm(Image(8, 16, 3, ImageKind::Normal), mask, normal), Error);
  EXPECT_THROW((void)normalTerm(normal, Image(8, 8, 1, ImageKind::Mask), normal), Error);
}

// ---- cloth loss ----

TEST(ClothLoss, FlatRestStateIsZero) {
  const GarmentRig rig = bareRig(procedural::grid(4, 3, 0.4, 0.3));
  const LossBreakdown b = clothLoss(rig.templateMesh, rig, TriMesh{}, {}, LossWeights{});
  EXPECT_NEAR(b.edge, 0.0, 1e-20);
  EXPECT_NEAR(b.face, 0.0, 1e-20);
  EXPECT_NEAR(b.angle, 0.0, 1e-20);
  EXPECT_EQ(b.collision, 0.0);
  EXPECT_EQ(b.mask, 0.0);
  EXPECT_EQ(b.normal, 0.0);
  EXPECT_NEAR(b.total, 0.0, 1e-20);
}

TEST(ClothLoss, StretchedEdge) {
  // A = origin, B on the x axis, C above A. B moves on the circle around C
  // so that |AB| goes from 0.10 to 0.12 and |BC| is unchanged.
  TriMesh rest;
  rest.vertices.resize(3, 3);
  const double h = 0.2;
  rest.vertices << 0, 0, 0, 0.1, 0, 0, 0, h, 0;
  rest.faces.resize(1, 3);
  rest.faces << 0, 1, 2;
  const GarmentRig rig = bareRig(rest);

  TriMesh posed = rest;
  const double y = 0.0044 / (2.0 * h);
  posed.vertices.row(1) << std::sqrt(0.0144 - y * y), y, 0.0;
  ASSERT_NEAR((vertexAt(posed.vertices, 1) - vertexAt(posed.vertices, 0)).norm(), 0.12, 1e-15);
  ASSERT_NEAR((vertexAt(posed.vertices, 1) - vertexAt(posed.vertices, 2)).norm(),
              (vertexAt(rest.vertices, 1) - vertexAt(rest.vertices, 2)).norm(), 1e-15);

  const LossBreakdown b = clothLoss(posed, rig, TriMesh{}, {}, LossWeights{});
  EXPECT_NEAR(b.edge, 100.0 * 0.02 * 0.02, 1e-14);
  EXPECT_EQ(b.face, 0.0);
  EXPECT_EQ(b.angle, 0.0);
}

TEST(ClothLoss, BodyVertexOnSurface) {
  const GarmentRig rig = bareRig(procedural::grid(2, 2, 0.2, 0.2));
  const Vec3 onSurface = vertexAt(rig.templateMesh.vertices, 4);
  const TriMesh body = pointCloud({onSurface});
  const std::vector<Vec3> normals{Vec3(0, 0, 1)};
  const LossBreakdown b = clothLoss(rig.templateMesh, rig, body, normals, LossWeights{});
  EXPECT_NEAR(b.collision, 100.0 * 0.004 * 0.004, 1e-15);
  EXPECT_NEAR(b.collision, 1.6e-3, 1e-15);
}

TEST(ClothLoss, CollisionHingeByHand) {
  const GarmentRig rig = bareRig(procedural::grid(3, 3, 0.3, 0.3));
  const Index n = rig.vertexCount();
  auto offsetBody = [&](double dz) {
    std::vector<Vec3> pts;
    for (Index i = 0; i < n; ++i) pts.push_back(vertexAt(rig.templateMesh.vertices, i) - Vec3(0, 0, dz));
    return pointCloud(pts);
  };
  const std::vector<Vec3> up(static_cast<std::size_t>(n), Vec3(0, 0, 1));

  // Clear of the ε band: no penalty.
  EXPECT_EQ(clothLoss(rig.templateMesh, rig, offsetBody(0.01), up, LossWeights{}).collision, 0.0);
  EXPECT_EQ(clothLoss(rig.templateMesh, rig, offsetBody(0.004), up, LossWeights{}).collision, 0.0);
  // Inside the band by 2 mm at every vertex.
  const double c = clothLoss(rig.templateMesh, rig, offsetBody(0.002), up, LossWeights{}).collision;
  EXPECT_NEAR(c, 100.0 * static_cast<double>(n) * 0.002 * 0.002, 1e-14);
  // Penetrating by 1 cm.
  const double p = clothLoss(rig.templateMesh, rig, offsetBody(-0.01), up, LossWeights{}).collision;
  EXPECT_NEAR(p, 100.0 * static_cast<double>(n) * 0.014 * 0.014, 1e-12);
}

TEST(ClothLoss, CollisionIgnoresDistantBodyVertices) {
  const GarmentRig rig = bareRig(procedural::grid(2, 2, 0.2, 0.2));
  const TriMesh body = pointCloud({Vec3(0.1, 0.1, -1.0)});
  const std::vector<Vec3> normals{Vec3(0, 0, -1)};
  EXPECT_EQ(clothLoss(rig.templateMesh, rig, body, normals, LossWeights{}).collision, 0.0);
}

TEST(ClothLoss, RigidMotionInvariance) {
  const GarmentRig rig = bareRig(procedural::grid(5, 4, 0.5, 0.4));
  const TriMesh posed = bumpy(rig.templateMesh, 0.02, 12);
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1, 2, -0.5).normalized()).toRotationMatrix();
  const TriMesh moved = transformed(posed, r, Vec3(0.3, -1.2, 2.0));
  const LossBreakdown a = clothLoss(posed, rig, TriMesh{}, {}, LossWeights{});
  const LossBreakdown b = clothLoss(moved, rig, TriMesh{}, {}, LossWeights{});
  EXPECT_GT(a.edge, 0.0);
  EXPECT_GT(a.face, 0.0);
  EXPECT_GT(a.angle, 0.0);
  EXPECT_NEAR(b.edge, a.edge, 1e-9 * a.edge);
  EXPECT_NEAR(b.face, a.face, 1e-9 * a.face);
  EXPECT_NEAR(b.angle, a.angle, 1e-9 * a.angle);
}

TEST(ClothLoss, TermsScaleWithWeights) {
  const GarmentRig rig = bareRig(procedural::grid(3, 3, 0.3, 0.3));
  const TriMesh posed = bumpy(rig.templateMesh, 0.02, 13);
  const LossBreakdown full = clothLoss(posed, rig, TriMesh{}, {}, LossWeights{});
  EXPECT_NEAR(clothLoss(posed, rig, TriMesh{}, {}, only(&LossWeights::edge)).edge * 100.0, full.edge, 1e-12);
  EXPECT_NEAR(clothLoss(posed, rig, TriMesh{}, {}, only(&LossWeights::face)).face * 2000.0, full.face, 1e-10);
  EXPECT_NEAR(clothLoss(posed, rig, TriMesh{}, {}, only(&LossWeights::angle)).angle, full.angle, 1e-12);
  const LossBreakdown edgeOnly = clothLoss(posed, rig, TriMesh{}, {}, only(&LossWeights::edge));
  EXPECT_EQ(edgeOnly.face, 0.0);
  EXPECT_EQ(edgeOnly.angle, 0.0);
}

TEST(ClothLoss, MismatchedTopologyThrows) {
  const GarmentRig rig = bareRig(procedural::grid(3, 3, 0.3, 0.3));
  const TriMesh other = procedural::grid(2, 3, 0.3, 0.3);
  EXPECT_THROW((void)clothLoss(other, rig, TriMesh{}, {}, LossWeights{}), Error);
}

TEST(ClothLoss, InvalidWeightsThrow) {
  const GarmentRig rig = bareRig(procedural::grid(2, 2, 0.2, 0.2));
  LossWeights w;
  w.angle = -1.0;
  EXPECT_THROW((void)clothLoss(rig.templateMesh, rig, TriMesh{}, {}, w), Error);
}

// ---- total loss ----

TEST(TotalLoss, PerfectPredictionOfRestFrame) {
  const GarmentRig rig = bareRig(procedural::grid(6, 6, 0.6, 0.6));
  const Camera camera = frameCamera(rig.templateMesh, 32);
  const FrameRecord frame = renderFrame(rig.templateMesh, PoseParams{}, camera, 0.05, 0);
  const LossBreakdown b = totalLoss(frame, rig.templateMesh, rig, TriMesh{}, LossWeights{}, 0.05);
  EXPECT_LT(b.total, 1e-6);
  EXPECT_LT(b.mask, 1e-9);
  EXPECT_LT(b.normal, 1e-6);
  EXPECT_GE(b.total, 0.0);
}

TEST(TotalLoss, EqualsSumOfIndependentTerms) {
  const CheckScene scene = checkScene(3);
  const TriMesh body = poseBody(scene.body, scene.frame.pose);
  const TriMesh garment = bumpy(poseGarment(scene.rig, Displacement::Zero(scene.rig.vertexCount(), 3), scene.body,
                                            scene.frame.pose),
                                0.005, 14);
  const LossWeights w;
  const LossBreakdown b = totalLoss(scene.frame, garment, scene.rig, body, w, scene.sharpness);

  const double mask =
      w.mask * maskTerm(rasterizeSilhouette(garment, scene.frame.camera, scene.sharpness), scene.frame.mask);
  const double normal = w.normal * normalTerm(rasterizeNormals(garment, scene.frame.camera, scene.sharpness),
                                              scene.frame.mask, scene.frame.normal);
  const auto bodyNormals = vertexNormals(body).normals;
  const LossBreakdown cloth = clothLoss(garment, scene.rig, body, bodyNormals, w);

  EXPECT_NEAR(b.mask, mask, 1e-9 * mask);
  EXPECT_NEAR(b.normal, normal, 1e-9 * normal);
  EXPECT_DOUBLE_EQ(b.edge, cloth.edge);
  EXPECT_DOUBLE_EQ(b.face, cloth.face);
  EXPECT_DOUBLE_EQ(b.angle, cloth.angle);
  EXPECT_DOUBLE_EQ(b.collision, cloth.collision);
  const double sum = b.mask + b.normal + b.edge + b.face + b.angle + b.collision;
  EXPECT_NEAR(b.total, sum, 1e-9 * sum);
  for (const double v : {b.mask, b.normal, b.edge, b.face, b.angle, b.collision}) EXPECT_GE(v, 0.0);
  EXPECT_GT(b.mask, 0.0);
  EXPECT_GT(b.normal, 0.0);
}

TEST(TotalLoss, ZeroImageWeightsReduceToClothLoss) {
  const CheckScene scene = checkScene(4);
  const TriMesh body = poseBody(scene.body, scene.frame.pose);
  const TriMesh garment =
      poseGarment(scene.rig, Displacement::Zero(scene.rig.vertexCount(), 3), scene.body, scene.frame.pose);
  LossWeights w;
  w.mask = 0.0;
  w.normal = 0.0;
  const LossBreakdown b = totalLoss(scene.frame, garment, scene.rig, body, w, scene.sharpness);
  EXPECT_EQ(b.mask, 0.0);
  EXPECT_EQ(b.normal, 0.0);
  EXPECT_DOUBLE_EQ(b.total, clothLoss(garment, scene.rig, body, vertexNormals(body).normals, w).total);
}

// ---- gradients w.r.t. posed vertices ----

struct LossScene {
  GarmentRig rig;
  TriMesh posed;
  TriMesh body;
  std::vector<Vec3> bodyNormals;
};

LossScene clothScene() {
  LossScene s;
  s.rig = bareRig(procedural::grid(3, 3, 0.3, 0.3));
  s.posed = bumpy(s.rig.templateMesh, 0.02, 15);
  // Body points 1-3 mm under a few garment vertices, all inside the ε band.
  std::vector<Vec3> pts;
  for (const Index i : {0, 5, 10, 15}) {
    pts.push_back(vertexAt(s.posed.vertices, i) - Vec3(0, 0, 0.001 + 0.0005 * static_cast<double>(pts.size())));
  }
  s.body = pointCloud(pts);
  s.bodyNormals.assign(pts.size(), Vec3(0.1, -0.2, 1.0).normalized());
  return s;
}

GradcheckReport checkWrtPosed(const LossScene& s, const LossWeights& w, double tolerance,
                              const FrameRecord* frame = nullptr, double step = 1e-5) {
  ParamSet params;
  params.add("posed", ad::Shape{static_cast<std::size_t>(s.posed.vertexCount()), 3},
             std::vector<double>(s.posed.vertices.data(), s.posed.vertices.data() + s.posed.vertices.size()));
  const TapedLoss loss = [&](ad::Tape&, std::span<const ad::Var> p) {
    if (frame) return ad::totalLoss(p[0], s.rig, *frame, s.body.vertices, s.bodyNormals, w, 0.05).total;
    return ad::clothLoss(p[0], s.rig, s.body.vertices, s.bodyNormals, w).total;
  };
  GradcheckOptions o;
  o.step = step;
  o.tolerance = tolerance;
  o.budget = 200;
  o.seed = 5;
  return gradcheck(loss, params, o);
}

TEST(LossGradients, EdgeTerm) {
  const auto r = checkWrtPosed(clothScene(), only(&LossWeights::edge), 1e-4);
  EXPECT_TRUE(r.pass) << r.maxRelErr;
}

TEST(LossGradients, FaceTerm) {
  const auto r = checkWrtPosed(clothScene(), only(&LossWeights::face), 1e-4);
  EXPECT_TRUE(r.pass) << r.maxRelErr;
}

TEST(LossGradients, AngleTerm) {
  const auto r = checkWrtPosed(clothScene(), only(&LossWeights::angle), 1e-4);
  EXPECT_TRUE(r.pass) << r.maxRelErr;
}

TEST(LossGradients, CollisionTerm) {
  const LossScene s = clothScene();
  const LossBreakdown b = clothLoss(s.posed, s.rig, s.body, s.bodyNormals, only(&LossWeights::collision));
  ASSERT_GT(b.collision, 0.0);
  const auto r = checkWrtPosed(s, only(&LossWeights::collision), 1e-4);
  EXPECT_TRUE(r.pass) << r.maxRelErr;
}

TEST(LossGradients, AllClothTermsWithPaperWeights) {
  LossWeights w;
  w.mask = w.normal = 0.0;
  const auto r = checkWrtPosed(clothScene(), w, 1e-4);
  EXPECT_TRUE(r.pass) << r.maxRelErr;
}

// The perturbed mesh has sliver triangles in projection, so the central
// difference needs a finer step than the cloth terms.
LossScene rasterScene(FrameRecord& frame) {
  const CheckScene scene = checkScene(0);
  LossScene s;
  s.rig = scene.rig;
  s.posed = bumpy(poseGarment(scene.rig, Displacement::Zero(scene.rig.vertexCount(), 3), scene.body,
                              scene.frame.pose),
                  0.003, 16);
  frame = scene.frame;
  return s;
}

TEST(LossGradients, MaskTermThroughRasterizer) {
  FrameRecord frame;
  const LossScene s = rasterScene(frame);
  const auto r = checkWrtPosed(s, only(&LossWeights::mask), 1e-3, &frame, 1e-6);
  EXPECT_TRUE(r.pass) << r.maxRelErr << " at " << r.worstParam;
}

TEST(LossGradients, NormalTermThroughRasterizer) {
  FrameRecord frame;
  const LossScene s = rasterScene(frame);
  const auto r = checkWrtPosed(s, only(&LossWeights::normal), 1e-3, &frame, 1e-6);
  EXPECT_TRUE(r.pass) << r.maxRelErr << " at " << r.worstParam;
}

}  // namespace
}  // namespace drape
