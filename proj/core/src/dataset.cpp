#include "drape/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "binary_io.hpp"
#include "drape/mesh_io.hpp"

namespace drape {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string frameError(int index, const std::string& msg) { return "frame " + frameName(index) + ": " + msg; }

std::string sizeString(const Image& img) { return std::to_string(img.width) + "x" + std::to_string(img.height); }

/// Frame indices of files named NNNN<ext> in `dir`, ascending.
std::vector<int> indexedFiles(const std::filesystem::path& dir, const std::string& ext) {
  std::vector<int> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ext) continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error("unexpected file name " + entry.path().string());
    }
    out.push_back(std::stoi(stem));
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <std::size_t N>
void readArray(const nlohmann::json& j, const char* key, std::array<double, N>& out, int frame) {
  if (!j.contains(key)) throw Error(frameError(frame, std::string("missing '") + key + "'"));
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != N) {
    throw Error(frameError(frame, std::string("'") + key + "' must have " + std::to_string(N) + " values"));
  }
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i].get<double>();
}

}  // namespace

std::string frameName(int index) {
  if (index < 0) throw Error("negative frame index");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return buf;
}

void SequenceDataset::validate() const {
  if (frames.empty()) throw Error("sequence has no frames");
  const FrameRecord& first = frames.front();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameRecord& f = frames[i];
    if (i > 0 && f.frameIndex <= frames[i - 1].frameIndex) {
      throw Error(frameError(f.frameIndex, "frames not strictly increasing by index"));
    }
    try {
      f.pose.validate();
      f.camera.validate();
      f.mask.validate();
      f.normal.validate();
    } catch (const Error& e) {
      throw Error(frameError(f.frameIndex, e.what()));
    }
    if (f.mask.channels != 1) throw Error(frameError(f.frameIndex, "mask must have one channel"));
    if (f.normal.channels != 3) throw Error(frameError(f.frameIndex, "normal map must have three channels"));
    if (!f.mask.sameDimensions(first.mask)) {
      throw Error(frameError(f.frameIndex, "mask is " + sizeString(f.mask) + ", sequence uses " + sizeString(first.mask)));
    }
    if (f.normal.width != first.mask.width || f.normal.height != first.mask.height) {
      throw Error(frameError(f.frameIndex,
                             "normal map is " + sizeString(f.normal) + ", sequence uses " + sizeString(first.mask)));
    }
    if (f.camera.width != f.mask.width || f.camera.height != f.mask.height) {
      throw Error(frameError(f.frameIndex, "camera image size does not match the mask"));
    }
    if (f.pose.beta != first.pose.beta) {
      throw Error(frameError(f.frameIndex, "beta differs from frame " + frameName(first.frameIndex)));
    }
  }
  std::vector<std::size_t> all(train);
  all.insert(all.end(), test.begin(), test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] != i) throw Error("train/test split is not a partition of the frames");
  }
  if (all.size() != frames.size()) throw Error("train/test split is not a partition of the frames");
}

void assignSplit(SequenceDataset& dataset, double trainFraction) {
  if (!(trainFraction >= 0.0 && trainFraction <= 1.0)) throw Error("train fraction must be in [0, 1]");
  std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
  for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
    ranked.emplace_back(splitmix64(static_cast<std::uint64_t>(dataset.frames[i].frameIndex)), i);
  }
  std::sort(ranked.begin(), ranked.end());
  const auto trainCount =
      static_cast<std::size_t>(std::llround(trainFraction * static_cast<double>(dataset.frames.size())));
  dataset.train.clear();
  dataset.test.clear();
  for (std::size_t r = 0; r < ranked.size(); ++r) (r < trainCount ? dataset.train : dataset.test).push_back(ranked[r].second);
  std::sort(dataset.train.begin(), dataset.train.end());
  std::sort(dataset.test.begin(), dataset.test.end());
}

SequenceDataset loadSequence(const std::filesystem::path& dir, double trainFraction) {
  if (!std::filesystem::is_directory(dir)) throw Error("sequence directory " + dir.string() + " does not exist");
  const auto indices = indexedFiles(dir / "poses", ".json");
  if (indices.empty()) throw Error("sequence " + dir.string() + " has no poses/NNNN.json files");
  SequenceDataset ds;
  for (const int index : indices) {
    FrameRecord f;
    f.frameIndex = index;
    const std::string name = frameName(index);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(detail::readTextFile(dir / "poses" / (name + ".json")));
      readArray(j, "theta", f.pose.theta, index);
      readArray(j, "beta", f.pose.beta, index);
      std::array<double, 3> cam{};
      readArray(j, "camera", cam, index);
      f.camera.s = cam[0];
      f.camera.tx = cam[1];
      f.camera.ty = cam[2];
    } catch (const nlohmann::json::exception& e) {
      throw Error(frameError(index, std::string("bad pose file: ") + e.what()));
    }
    const auto maskPath = dir / "masks" / (name + ".png");
    const auto normalPath = dir / "normals" / (name + ".png");
    if (!std::filesystem::exists(maskPath)) throw Error(frameError(index, "missing " + maskPath.string()));
    if (!std::filesystem::exists(normalPath)) throw Error(frameError(index, "missing " + normalPath.string()));
    f.mask = readPng(maskPath);
    f.mask.kind = ImageKind::Mask;
    f.normal = readPng(normalPath);
    f.normal.kind = ImageKind::Normal;
    f.camera.width = f.mask.width;
    f.camera.height = f.mask.height;
    ds.frames.push_back(std::move(f));
  }
  assignSplit(ds, trainFraction);
  ds.validate();
  return ds;
}

void saveSequence(const SequenceDataset& dataset, const std::filesystem::path& dir) {
  dataset.validate();
  for (const FrameRecord& f : dataset.frames) {
    const std::string name = frameName(f.frameIndex);
    nlohmann::json j;
    j["theta"] = f.pose.theta;
    j["beta"] = f.pose.beta;
    j["camera"] = {f.camera.s, f.camera.tx, f.camera.ty};
    detail::writeTextFile(dir / "poses" / (name + ".json"), j.dump() + "\n");
    writePng(f.mask, dir / "masks" / (name + ".png"));
    writePng(f.normal, dir / "normals" / (name + ".png"));
  }
}

SceneAssets loadSceneAssets(const std::filesystem::path& dir) {
  BodyModel body = loadBodyModel(dir / "body");
  GarmentRig rig = loadGarmentRig(dir / "template", body);
  return SceneAssets{std::move(body), std::move(rig)};
}

void saveSceneAssets(const SceneAssets& assets, const std::filesystem::path& dir) {
  saveBodyModel(assets.body, dir / "body");
  saveGarmentRig(assets.rig, dir / "template");
}

MeshSequence loadMeshSequence(const std::filesystem::path& dir, std::vector<int>* frameIndices) {
  const auto indices = indexedFiles(dir, ".obj");
  if (indices.empty()) throw Error("no NNNN.obj meshes in " + dir.string());
  MeshSequence seq;
  for (const int index : indices) {
    const TriMesh m = loadObj(dir / (frameName(index) + ".obj"));
    if (seq.size() > 0 && (m.faces.rows() != seq.faces.rows() || m.faces != seq.faces)) {
      throw Error(frameError(index, "mesh topology differs from the first frame in " + dir.string()));
    }
    if (seq.size() > 0 && m.vertices.rows() != seq.frames.front().rows()) {
      throw Error(frameError(index, "vertex count differs from the first frame in " + dir.string()));
    }
    seq.push_back(m);
  }
  if (frameIndices != nullptr) frameIndices->assign(indices.begin(), indices.end());
  return seq;
}

void saveMeshSequence(const MeshSequence& sequence, const std::filesystem::path& dir,
                      std::span<const int> frameIndices) {
  if (!frameIndices.empty() && frameIndices.size() != sequence.size()) {
    throw Error("saveMeshSequence: " + std::to_string(frameIndices.size()) + " frame indices for " +
                std::to_string(sequence.size()) + " frames");
  }
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const int index = frameIndices.empty() ? static_cast<int>(i) : frameIndices[i];
    saveObj(sequence.frame(i), dir / (frameName(index) + ".obj"));
  }
}

}  // namespace drape
