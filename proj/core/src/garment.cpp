#include "drape/garment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "binary_io.hpp"
#include "drape/kdtree.hpp"
#include "drape/mesh_io.hpp"

namespace drape {

namespace {

constexpr std::array<std::pair<GarmentCategory, std::string_view>, 6> kCategoryNames = {{
    {GarmentCategory::UpperShort, "upper_short"},
    {GarmentCategory::UpperLong, "upper_long"},
    {GarmentCategory::PantsShort, "pants_short"},
    {GarmentCategory::PantsLong, "pants_long"},
    {GarmentCategory::SkirtShort, "skirt_short"},
    {GarmentCategory::SkirtLong, "skirt_long"},
}};

}  // namespace

std::string_view toString(GarmentCategory category) {
  for (const auto& [c, name] : kCategoryNames) {
    if (c == category) return name;
  }
  return "unknown";
}

GarmentCategory parseGarmentCategory(std::string_view text) {
  for (const auto& [c, name] : kCategoryNames) {
    if (name == text) return c;
  }
  throw Error("unknown garment category '" + std::string(text) + "'");
}

void GarmentRig::validate() const {
  validateMesh(templateMesh, true);
  topology.checkCompatible(templateMesh);
  if (blendWeights.rows() != vertexCount()) {
    throw Error("garment blend weights have " + std::to_string(blendWeights.rows()) +
                " rows for " + std::to_string(vertexCount()) + " vertices");
  }
  for (Eigen::Index i = 0; i < blendWeights.rows(); ++i) {
    const double s = blendWeights.row(i).sum();
    if (std::abs(s - 1.0) > 1e-6 || blendWeights.row(i).minCoeff() < 0.0) {
      throw Error("garment blend-weight row " + std::to_string(i) + " is not on the simplex");
    }
  }
}

MatrixX transferBlendWeights(const TriMesh& garmentTemplate, const BodyModel& body) {
  if (body.vertexCount() == 0) throw Error("cannot transfer blend weights from an empty body");
  const KdTree tree(body.templateMesh.vertices);
  MatrixX out(garmentTemplate.vertexCount(), body.blendWeights.cols());
  for (Index i = 0; i < garmentTemplate.vertexCount(); ++i) {
    const Neighbor nn = tree.nearest(vertexAt(garmentTemplate.vertices, i));
    out.row(i) = body.blendWeights.row(nn.index);
  }
  return out;
}

GarmentRig makeGarmentRig(TriMesh garmentTemplate, const BodyModel& body, GarmentCategory category) {
  GarmentRig rig;
  rig.topology = buildTopology(garmentTemplate);
  rig.blendWeights = transferBlendWeights(garmentTemplate, body);
  rig.templateMesh = std::move(garmentTemplate);
  rig.category = category;
  rig.validate();
  return rig;
}

TriMesh applyDisplacement(const GarmentRig& rig, const Displacement& d) {
  if (d.rows() != rig.vertexCount()) {
    throw Error("displacement has " + std::to_string(d.rows()) + " rows for " +
                std::to_string(rig.vertexCount()) + " garment vertices");
  }
  if (!d.allFinite()) throw Error("displacement contains non-finite values");
  return TriMesh{rig.templateMesh.vertices + d, rig.templateMesh.faces};
}

TriMesh poseGarment(const GarmentRig& rig, const Displacement& d, const JointTransforms& transforms) {
  const TriMesh rest = applyDisplacement(rig, d);
  return TriMesh{linearBlendSkinning(rest.vertices, rig.blendWeights, transforms), rest.faces};
}

TriMesh poseGarment(const GarmentRig& rig, const Displacement& d, const BodyModel& body,
                    const PoseParams& params) {
  if (rig.blendWeights.cols() != body.jointCount()) {
    throw Error("garment rig and body disagree on joint count");
  }
  params.validate();
  const Points joints = skeletonJoints(body, params.beta);
  const JointTransforms transforms = forwardKinematics(params.theta, joints, body.parents);
  return poseGarment(rig, d, transforms);
}

std::vector<double> projectToSimplex(std::span<const double> row) {
  std::vector<double> sorted(row.begin(), row.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = std::max(row[i] - tau, 0.0);
  return out;
}

void projectRowsToSimplex(MatrixX& weights) {
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    const auto projected =
        projectToSimplex(std::span<const double>(weights.row(r).data(), static_cast<std::size_t>(weights.cols())));
    for (Eigen::Index c = 0; c < weights.cols(); ++c) weights(r, c) = projected[c];
  }
}

GarmentRig loadGarmentRig(const std::filesystem::path& dir, const BodyModel& body) {
  TriMesh mesh = loadObj(dir / "garment.obj");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(detail::readTextFile(dir / "garment_meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("garment_meta.json: " + std::string(e.what()));
  }
  const auto category = parseGarmentCategory(meta.at("category").get<std::string>());
  GarmentRig rig = makeGarmentRig(std::move(mesh), body, category);
  if (meta.contains("blend_weights")) {
    MatrixX w = MatrixX::Zero(rig.vertexCount(), body.jointCount());
    for (const auto& t : meta.at("blend_weights").at("triplets")) {
      const auto r = t.at(0).get<Eigen::Index>();
      const auto c = t.at(1).get<Eigen::Index>();
      if (r < 0 || r >= w.rows() || c < 0 || c >= w.cols()) {
        throw Error("garment_meta.json: blend weight triplet out of range");
      }
      w(r, c) += t.at(2).get<double>();
    }
    rig.blendWeights = std::move(w);
    rig.validate();
  }
  return rig;
}

void saveGarmentRig(const GarmentRig& rig, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  saveObj(rig.templateMesh, dir / "garment.obj");
  nlohmann::json triplets = nlohmann::json::array();
  for (Eigen::Index r = 0; r < rig.blendWeights.rows(); ++r) {
    for (Eigen::Index c = 0; c < rig.blendWeights.cols(); ++c) {
      if (rig.blendWeights(r, c) != 0.0) triplets.push_back({r, c, rig.blendWeights(r, c)});
    }
  }
  nlohmann::json meta;
  meta["format"] = "drape-garment";
  meta["version"] = 1;
  meta["category"] = std::string(toString(rig.category));
  meta["blend_weights"] = {{"triplets", triplets}};
  detail::writeTextFile(dir / "garment_meta.json", meta.dump(1));
}

}  // namespace drape
