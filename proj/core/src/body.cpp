#include "drape/body.hpp"

#include <cmath>
#include <sstream>

#include "drape/geometry_ops.hpp"
#include "drape/ops.hpp"

namespace drape {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "pelvis",         "left_hip",       "right_hip",  "spine1",      "left_knee",
    "right_knee",     "spine2",         "left_ankle", "right_ankle", "spine3",
    "left_foot",      "right_foot",     "neck",       "left_collar", "right_collar",
    "head",           "left_shoulder",  "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist",     "right_wrist",    "left_hand",  "right_hand"};

}  // namespace

std::vector<Index> smplParents() {
  return {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};
}

Index smplJoint(std::string_view name) {
  for (std::size_t i = 0; i < kJointNames.size(); ++i) {
    if (kJointNames[i] == name) return static_cast<Index>(i);
  }
  throw Error("unknown joint name '" + std::string(name) + "'");
}

void PoseParams::validate() const {
  for (double v : theta) {
    if (!std::isfinite(v)) throw Error("pose parameters contain a non-finite value");
  }
  for (double v : beta) {
    if (!std::isfinite(v)) throw Error("shape parameters contain a non-finite value");
  }
}

void BodyModel::validate() const {
  validateMesh(templateMesh, true);
  const Index v = vertexCount();
  const int k = jointCount();
  if (k < 1) throw Error("body model has no joints");
  if (shapeBasis.rows() != 3 * v || shapeBasis.cols() != kShapeDim) {
    throw Error("body shape basis must be (3V x 10)");
  }
  if (poseBasis.size() != 0 && (poseBasis.rows() != 3 * v || poseBasis.cols() != 9 * (k - 1))) {
    throw Error("body pose basis must be (3V x 9(K-1)) or empty");
  }
  if (jointRegressor.rows() != k || jointRegressor.cols() != v) {
    throw Error("joint regressor must be (K x V)");
  }
  if (blendWeights.rows() != v || blendWeights.cols() != k) {
    throw Error("body blend weights must be (V x K)");
  }
  Index roots = 0;
  for (int j = 0; j < k; ++j) {
    if (parents[j] == -1) ++roots;
    if (parents[j] < -1 || parents[j] >= k || parents[j] == j) {
      throw Error("joint " + std::to_string(j) + " has invalid parent");
    }
  }
  if (roots != 1 || parents[0] != -1) throw Error("kinematic tree must have a single root at joint 0");
  // Cycle detection.
  for (int j = 0; j < k; ++j) {
    int steps = 0;
    for (Index cur = j; cur != -1; cur = parents[cur]) {
      if (++steps > k) throw Error("kinematic tree has a cycle through joint " + std::to_string(j));
    }
  }
  for (int j = 0; j < k; ++j) {
    const double s = jointRegressor.row(j).sum();
    if (std::abs(s - 1.0) > 1e-6) throw Error("joint regressor row " + std::to_string(j) + " does not sum to 1");
  }
  for (Index i = 0; i < v; ++i) {
    const double s = blendWeights.row(i).sum();
    if (std::abs(s - 1.0) > 1e-6 || blendWeights.row(i).minCoeff() < 0.0) {
      throw Error("body blend-weight row " + std::to_string(i) + " is not on the simplex");
    }
  }
}

TriMesh shapedTemplate(const BodyModel& model, std::span<const double> beta) {
  if (beta.size() != kShapeDim) throw Error("beta must have 10 entries");
  const Eigen::Map<const Eigen::VectorXd> b(beta.data(), kShapeDim);
  const Eigen::VectorXd offset = model.shapeBasis * b;
  TriMesh out = model.templateMesh;
  out.vertices += Eigen::Map<const Points>(offset.data(), model.vertexCount(), 3);
  return out;
}

Points skeletonJoints(const BodyModel& model, std::span<const double> beta) {
  const TriMesh shaped = shapedTemplate(model, beta);
  return model.jointRegressor * shaped.vertices;
}

ad::Var jointTransformsNode(ad::Var axisAngles, const Points& restJoints,
                            std::span<const Index> parents) {
  ad::Tape& tape = axisAngles.tape();
  const auto k = static_cast<std::size_t>(restJoints.rows());
  const ad::Var joints = tape.constant(std::span<const double>(restJoints.data(), 3 * k), ad::Shape{k, 3});
  return ad::forwardKinematics(ad::rodrigues(axisAngles), joints, parents);
}

JointTransforms forwardKinematics(std::span<const double> theta, const Points& restJoints,
                                  std::span<const Index> parents) {
  const auto k = static_cast<std::size_t>(restJoints.rows());
  if (theta.size() != 3 * k || parents.size() != k) {
    throw Error("forwardKinematics: theta has " + std::to_string(theta.size()) + " values for " +
                std::to_string(k) + " joints");
  }
  ad::Tape tape;
  const ad::Var angles = tape.constant(theta, ad::Shape{k, 3});
  const ad::Var transforms = jointTransformsNode(angles, restJoints, parents);
  return Eigen::Map<const JointTransforms>(transforms.value().data(), static_cast<Eigen::Index>(k), 12);
}

Points linearBlendSkinning(const Points& vertices, const MatrixX& weights,
                           const JointTransforms& transforms) {
  if (weights.rows() != vertices.rows() || weights.cols() != transforms.rows()) {
    std::ostringstream os;
    os << "lbs: " << vertices.rows() << " vertices, weights " << weights.rows() << "x"
       << weights.cols() << ", " << transforms.rows() << " transforms";
    throw Error(os.str());
  }
  ad::Tape tape;
  const auto n = static_cast<std::size_t>(vertices.rows());
  const auto k = static_cast<std::size_t>(transforms.rows());
  const ad::Var v = tape.constant(std::span<const double>(vertices.data(), 3 * n), ad::Shape{n, 3});
  const ad::Var w = tape.constant(std::span<const double>(weights.data(), n * k), ad::Shape{n, k});
  const ad::Var a = tape.constant(std::span<const double>(transforms.data(), 12 * k), ad::Shape{k, 12});
  const ad::Var out = ad::linearBlendSkinning(v, w, a);
  return Eigen::Map<const Points>(out.value().data(), static_cast<Eigen::Index>(n), 3);
}

std::vector<double> poseFeature(std::span<const double> theta) {
  const std::size_t k = theta.size() / 3;
  ad::Tape tape;
  const ad::Var rot = ad::rodrigues(tape.constant(theta, ad::Shape{k, 3}));
  const auto r = rot.value();
  std::vector<double> feature;
  feature.reserve(9 * (k - 1));
  for (std::size_t j = 1; j < k; ++j) {
    for (int e = 0; e < 9; ++e) feature.push_back(r[9 * j + e] - ((e % 4 == 0) ? 1.0 : 0.0));
  }
  return feature;
}

PosedBody poseBodyDetailed(const BodyModel& model, const PoseParams& params) {
  params.validate();
  const auto k = static_cast<std::size_t>(model.jointCount());
  if (k != kJointCount) throw Error("pose parameters expect a 24-joint body model");
  PosedBody out;
  TriMesh rest = shapedTemplate(model, params.beta);
  out.restJoints = model.jointRegressor * rest.vertices;
  if (model.poseBasis.size() != 0) {
    const auto feature = poseFeature(params.theta);
    const Eigen::Map<const Eigen::VectorXd> f(feature.data(), static_cast<Eigen::Index>(feature.size()));
    const Eigen::VectorXd offset = model.poseBasis * f;
    rest.vertices += Eigen::Map<const Points>(offset.data(), rest.vertexCount(), 3);
  }
  out.transforms = forwardKinematics(params.theta, out.restJoints, model.parents);
  out.mesh = TriMesh{linearBlendSkinning(rest.vertices, model.blendWeights, out.transforms), rest.faces};
  return out;
}

TriMesh poseBody(const BodyModel& model, const PoseParams& params) {
  return poseBodyDetailed(model, params).mesh;
}

}  // namespace drape
