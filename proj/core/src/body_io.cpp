#include <json.hpp>

#include "binary_io.hpp"
#include "drape/base64.hpp"
#include "drape/body.hpp"
#include "drape/mesh_io.hpp"

namespace drape {

namespace {

using nlohmann::json;

MatrixX readDenseBlock(const json& spec, const std::filesystem::path& dir, Eigen::Index rows,
                       Eigen::Index cols, const std::string& what) {
  const auto shape = spec.at("shape").get<std::vector<std::size_t>>();
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (count != static_cast<std::size_t>(rows * cols)) {
    throw Error(what + ": declared shape does not match the model (" + std::to_string(count) +
                " values, expected " + std::to_string(rows * cols) + ")");
  }
  const std::string dtype = spec.value("dtype", "f32");
  std::vector<std::uint8_t> bytes;
  if (spec.contains("file")) {
    bytes = detail::readFileBytes(dir / spec.at("file").get<std::string>());
  } else if (spec.contains("base64")) {
    bytes = base64Decode(spec.at("base64").get<std::string>());
  } else {
    throw Error(what + ": needs either 'file' or 'base64'");
  }
  const std::size_t width = dtype == "f64" ? 8 : 4;
  if (bytes.size() != count * width) {
    throw Error(what + ": blob has " + std::to_string(bytes.size()) + " bytes, expected " +
                std::to_string(count * width));
  }
  const auto values = detail::decodeFloats(bytes, 0, count, dtype);
  return Eigen::Map<const MatrixX>(values.data(), rows, cols);
}

MatrixX readTriplets(const json& spec, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  MatrixX m = MatrixX::Zero(rows, cols);
  for (const auto& t : spec.at("triplets")) {
    const auto r = t.at(0).get<Eigen::Index>();
    const auto c = t.at(1).get<Eigen::Index>();
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw Error(what + ": triplet index (" + std::to_string(r) + ", " + std::to_string(c) + ") out of range");
    }
    m(r, c) += t.at(2).get<double>();
  }
  return m;
}

json tripletsOf(const MatrixX& m) {
  json triplets = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) triplets.push_back(json::array({r, c, m(r, c)}));
    }
  }
  return json{{"triplets", triplets}};
}

}  // namespace

BodyModel loadBodyModel(const std::filesystem::path& dir) {
  BodyModel model;
  model.templateMesh = loadObj(dir / "body.obj");
  json meta;
  try {
    meta = json::parse(detail::readTextFile(dir / "body_meta.json"));
  } catch (const json::exception& e) {
    throw Error("body_meta.json: " + std::string(e.what()));
  }
  try {
    model.parents = meta.at("parents").get<std::vector<Index>>();
    const auto k = static_cast<Eigen::Index>(model.parents.size());
    const Eigen::Index v = model.vertexCount();
    model.jointRegressor = readTriplets(meta.at("joint_regressor"), k, v, "joint_regressor");
    model.blendWeights = readTriplets(meta.at("blend_weights"), v, k, "blend_weights");
    model.shapeBasis = readDenseBlock(meta.at("shape_basis"), dir, 3 * v, kShapeDim, "shape_basis");
    if (meta.contains("pose_basis") && !meta.at("pose_basis").is_null()) {
      model.poseBasis = readDenseBlock(meta.at("pose_basis"), dir, 3 * v, 9 * (k - 1), "pose_basis");
    }
  } catch (const json::exception& e) {
    throw Error("body_meta.json: " + std::string(e.what()));
  }
  model.validate();
  return model;
}

void saveBodyModel(const BodyModel& model, const std::filesystem::path& dir) {
  model.validate();
  std::filesystem::create_directories(dir);
  saveObj(model.templateMesh, dir / "body.obj");
  const auto v = static_cast<std::size_t>(model.vertexCount());

  json meta;
  meta["format"] = "drape-body";
  meta["version"] = 1;
  meta["parents"] = model.parents;
  meta["joint_regressor"] = tripletsOf(model.jointRegressor);
  meta["blend_weights"] = tripletsOf(model.blendWeights);

  std::vector<std::uint8_t> blob;
  for (Eigen::Index i = 0; i < model.shapeBasis.size(); ++i) detail::appendF32(blob, model.shapeBasis.data()[i]);
  detail::writeFileBytes(dir / "shape_basis.f32", blob);
  meta["shape_basis"] = {{"file", "shape_basis.f32"}, {"dtype", "f32"}, {"shape", {v, 3, kShapeDim}}};

  if (model.poseBasis.size() != 0) {
    blob.clear();
    for (Eigen::Index i = 0; i < model.poseBasis.size(); ++i) detail::appendF32(blob, model.poseBasis.data()[i]);
    detail::writeFileBytes(dir / "pose_basis.f32", blob);
    meta["pose_basis"] = {{"file", "pose_basis.f32"},
                          {"dtype", "f32"},
                          {"shape", {v, 3, static_cast<std::size_t>(model.poseBasis.cols())}}};
  }
  detail::writeTextFile(dir / "body_meta.json", meta.dump(1));
}

}  // namespace drape
