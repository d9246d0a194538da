#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drape/garment.hpp"
#include "drape/kdtree.hpp"
#include "drape/procedural.hpp"
#include "helpers.hpp"

using namespace drape;

namespace {

BodyModel pointBody(const Points& vertices, std::uint64_t seed) {
  BodyModel body;
  body.templateMesh.vertices = vertices;
  body.blendWeights = MatrixX::Zero(vertices.rows(), 4);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index i = 0; i < vertices.rows(); ++i) {
    for (Index k = 0; k < 4; ++k) body.blendWeights(i, k) = u(rng);
    body.blendWeights.row(i) /= body.blendWeights.row(i).sum();
  }
  return body;
}

/// Simplex projection by bisection on the threshold tau with Σ max(x - tau, 0) = 1.
std::vector<double> projectByBisection(const std::vector<double>& x) {
  double lo = *std::min_element(x.begin(), x.end()) - 1.0;
  double hi = *std::max_element(x.begin(), x.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double v : x) s += std::max(v - mid, 0.0);
    (s > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> out;
  for (double v : x) out.push_back(std::max(v - 0.5 * (lo + hi), 0.0));
  return out;
}

std::vector<double> edgeLengths(const TriMesh& m, const TopologyCache& topo) {
  std::vector<double> out;
  for (const Edge& e : topo.edges) out.push_back((vertexAt(m.vertices, e.a) - vertexAt(m.vertices, e.b)).norm());
  return out;
}

GarmentRig shirtRig(const BodyModel& body) {
  return makeGarmentRig(procedural::shirtTemplate(), body, GarmentCategory::UpperShort);
}

}  // namespace

TEST(GarmentCategory, NamesRoundTrip) {
  for (auto c : {GarmentCategory::UpperShort, GarmentCategory::UpperLong, GarmentCategory::PantsShort,
                 GarmentCategory::PantsLong, GarmentCategory::SkirtShort, GarmentCategory::SkirtLong}) {
    EXPECT_EQ(parseGarmentCategory(toString(c)), c);
  }
  EXPECT_EQ(toString(GarmentCategory::SkirtLong), "skirt_long");
  EXPECT_THROW(parseGarmentCategory("hat"), Error);
}

TEST(TransferBlendWeights, CoincidentVertexCopiesRow) {
  const BodyModel body = procedural::syntheticBody();
  TriMesh g;
  g.vertices.resize(2, 3);
  g.vertices.row(0) = body.templateMesh.vertices.row(123);
  g.vertices.row(1) = body.templateMesh.vertices.row(7);
  const MatrixX w = transferBlendWeights(g, body);
  EXPECT_EQ(w.row(0), body.blendWeights.row(123));
  EXPECT_EQ(w.row(1), body.blendWeights.row(7));
}

TEST(TransferBlendWeights, EquidistantPicksLowerIndex) {
  Points v(3, 3);
  v << 1, 0, 0, 5, 5, 5, -1, 0, 0;
  BodyModel body = pointBody(v, 1);
  TriMesh g;
  g.vertices = Points::Zero(1, 3);
  EXPECT_EQ(transferBlendWeights(g, body).row(0), body.blendWeights.row(0));
  // Swap order: the lower index still wins.
  v.row(0) << 5, 5, 5;
  v.row(1) << -1, 0, 0;
  v.row(2) << 1, 0, 0;
  body = pointBody(v, 1);
  EXPECT_EQ(transferBlendWeights(g, body).row(0), body.blendWeights.row(1));
}

TEST(TransferBlendWeights, MatchesExhaustiveScan) {
  const BodyModel body = pointBody(test::randomPoints(20, 31), 2);
  TriMesh g;
  g.vertices = test::randomPoints(20, 32, 1.2);
  const MatrixX w = transferBlendWeights(g, body);
  for (Index i = 0; i < 20; ++i) {
    Index best = 0;
    double bestD = INFINITY;
    for (Index j = 0; j < 20; ++j) {
      const double d = (vertexAt(g.vertices, i) - vertexAt(body.templateMesh.vertices, j)).squaredNorm();
      if (d < bestD) {
        bestD = d;
        best = j;
      }
    }
    EXPECT_EQ(w.row(i), body.blendWeights.row(best)) << "garment vertex " << i;
  }
}

TEST(TransferBlendWeights, BundledRigsMatchExhaustiveScan) {
  const BodyModel body = procedural::syntheticBody();
  for (const TriMesh& t : {procedural::shirtTemplate(), procedural::skirtTemplate()}) {
    const MatrixX w = transferBlendWeights(t, body);
    for (Index i = 0; i < t.vertexCount(); ++i) {
      const Neighbor nn = nearestBruteForce(body.templateMesh.vertices, vertexAt(t.vertices, i));
      EXPECT_EQ(w.row(i), body.blendWeights.row(nn.index));
    }
  }
}

TEST(TransferBlendWeights, EmptyBodyRejected) {
  EXPECT_THROW(transferBlendWeights(test::singleTriangle(), BodyModel{}), Error);
}

TEST(GarmentRig, BundledRigIsValid) {
  const BodyModel body = procedural::syntheticBody();
  const GarmentRig rig = shirtRig(body);
  EXPECT_EQ(rig.vertexCount(), 200);
  EXPECT_EQ(rig.blendWeights.cols(), kJointCount);
  EXPECT_NO_THROW(rig.validate());
  GarmentRig broken = rig;
  broken.blendWeights(0, 0) += 0.01;
  EXPECT_THROW(broken.validate(), Error);
}

TEST(ApplyDisplacement, ZeroConstantAndRandom) {
  const BodyModel body = procedural::syntheticBody();
  const GarmentRig rig = shirtRig(body);
  const Points zero = Points::Zero(rig.vertexCount(), 3);
  EXPECT_EQ(applyDisplacement(rig, zero).vertices, rig.templateMesh.vertices);

  Points lift = Points::Zero(rig.vertexCount(), 3);
  lift.col(2).setConstant(0.01);
  const TriMesh lifted = applyDisplacement(rig, lift);
  EXPECT_EQ(lifted.faces, rig.templateMesh.faces);
  EXPECT_NEAR((lifted.vertices.col(2).array() - rig.templateMesh.vertices.col(2).array() - 0.01).abs().maxCoeff(),
              0.0, 1e-15);

  const Points d = test::randomPoints(rig.vertexCount(), 5, 0.02);
  EXPECT_EQ(applyDisplacement(rig, d).vertices, rig.templateMesh.vertices + d);
}

TEST(ApplyDisplacement, RejectsNanAndShapeMismatch) {
  const BodyModel body = procedural::syntheticBody();
  const GarmentRig rig = shirtRig(body);
  Points d = Points::Zero(rig.vertexCount(), 3);
  d(4, 1) = std::nan("");
  EXPECT_THROW(applyDisplacement(rig, d), Error);
  EXPECT_THROW(applyDisplacement(rig, Points::Zero(3, 3)), Error);
}

TEST(PoseGarment, RestPoseIsTemplatePlusDisplacement) {
  const BodyModel body = procedural::syntheticBody();
  const GarmentRig rig = shirtRig(body);
  const Points d = test::randomPoints(rig.vertexCount(), 6, 0.01);
  const TriMesh posed = poseGarment(rig, d, body, PoseParams{});
  EXPECT_LE((posed.vertices - (rig.templateMesh.vertices + d)).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(PoseGarment, RootRotationIsRigid) {
  const BodyModel body = procedural::syntheticBody();
  const GarmentRig rig = shirtRig(body);
  const Points d = test::randomPoints(rig.vertexCount(), 7, 0.01);
  PoseParams p;
  p.theta[0] = -0.3;
  p.theta[1] = 1.2;
  p.theta[2] = 0.5;
  const PosedBody posedBody = poseBodyDetailed(body, p);
  const TriMesh posed = poseGarment(rig, d, body, p);
  const Mat3 r = Eigen::AngleAxisd(Vec3(-0.3, 1.2, 0.5).norm(), Vec3(-0.3, 1.2, 0.5).normalized()).toRotationMatrix();
  const Vec3 root = vertexAt(posedBody.restJoints, 0);
  const TriMesh rest = applyDisplacement(rig, d);
  for (Index i = 0; i < rig.vertexCount(); ++i) {
    const Vec3 expected = r * (vertexAt(rest.vertices, i) - root) + root;
    EXPECT_LE((vertexAt(posed.vertices, i) - expected).norm(), 1e-6);
  }
  const auto before = edgeLengths(rest, rig.topology);
  const auto after = edgeLengths(posed, rig.topology);
  for (std::size_t e = 0; e < before.size(); ++e) EXPECT_NEAR(before[e], after[e], 1e-6);
}

TEST(PoseGarment, BentPoseMatchesBodyPipeline) {
  const BodyModel body = procedural::syntheticBody();
  const GarmentRig rig = shirtRig(body);
  const Points d = test::randomPoints(rig.vertexCount(), 8, 0.01);
  PoseParams p;
  p.theta[static_cast<std::size_t>(3 * smplJoint("spine1") + 0)] = 0.4;
  p.theta[static_cast<std::size_t>(3 * smplJoint("left_shoulder") + 2)] = -0.7;
  p.beta[2] = 0.5;
  const Points joints = skeletonJoints(body, p.beta);
  const JointTransforms transforms = forwardKinematics(p.theta, joints, body.parents);
  const Points oracle = linearBlendSkinning(rig.templateMesh.vertices + d, rig.blendWeights, transforms);
  EXPECT_EQ(poseGarment(rig, d, body, p).vertices, oracle);
  EXPECT_LE((poseGarment(rig, d, poseBodyDetailed(body, p).transforms).vertices - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((oracle - rig.templateMesh.vertices).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Simplex, RowOnSimplexUnchanged) {
  const std::vector<double> row{0.2, 0.3, 0.5};
  const auto out = projectToSimplex(row);
  for (std::size_t i = 0; i < row.size(); ++i) EXPECT_NEAR(out[i], row[i], 1e-15);
}

TEST(Simplex, CornerAndClosedForm) {
  EXPECT_EQ(projectToSimplex(std::vector<double>{2, 0, 0}), (std::vector<double>{1, 0, 0}));
  const auto half = projectToSimplex(std::vector<double>{0.6, 0.6, 0.0});
  EXPECT_NEAR(half[0], 0.5, 1e-15);
  EXPECT_NEAR(half[1], 0.5, 1e-15);
  EXPECT_EQ(half[2], 0.0);
}

TEST(Simplex, RandomRowsMatchBisectionOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> row(24);
    for (double& v : row) v = n(rng);
    const auto fast = projectToSimplex(row);
    const auto slow = projectByBisection(row);
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      EXPECT_NEAR(fast[i], slow[i], 1e-12);
      EXPECT_GE(fast[i], 0.0);
      sum += fast[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Simplex, RowsStayOnSimplexAcrossManyUpdates) {
  const BodyModel body = procedural::syntheticBody();
  GarmentRig rig = shirtRig(body);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int step = 0; step < 50; ++step) {
    for (Index i = 0; i < rig.blendWeights.rows(); ++i) {
      for (Index k = 0; k < rig.blendWeights.cols(); ++k) rig.blendWeights(i, k) += n(rng);
    }
    projectRowsToSimplex(rig.blendWeights);
    EXPECT_NO_THROW(rig.validate());
  }
}

TEST(GarmentIo, SaveLoadRoundTrip) {
  test::TempDir dir;
  const BodyModel body = procedural::syntheticBody();
  GarmentRig rig = makeGarmentRig(procedural::skirtTemplate(), body, GarmentCategory::SkirtShort);
  rig.blendWeights.row(0).setConstant(1.0 / kJointCount);
  saveGarmentRig(rig, dir.path());
  const GarmentRig back = loadGarmentRig(dir.path(), body);
  EXPECT_EQ(back.category, GarmentCategory::SkirtShort);
  EXPECT_EQ(back.templateMesh.faces, rig.templateMesh.faces);
  EXPECT_LE((back.blendWeights - rig.blendWeights).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(back.topology.edges, rig.topology.edges);
}
