#include "drape/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "drape/procedural.hpp"

namespace drape {

namespace {

struct Dof {
  const char* joint;
  int axis;
  double bias;
  double amplitude;
};

constexpr std::array<Dof, 17> kDofs{{
    {"pelvis", 1, 0.0, 0.25},
    {"spine1", 0, 0.0, 0.08},
    {"spine2", 2, 0.0, 0.08},
    {"spine3", 1, 0.0, 0.10},
    {"neck", 0, 0.0, 0.15},
    {"head", 1, 0.0, 0.20},
    {"left_shoulder", 2, 0.0, 0.35},
    {"left_shoulder", 1, 0.0, 0.25},
    {"right_shoulder", 2, 0.0, 0.35},
    {"right_shoulder", 1, 0.0, 0.25},
    {"left_elbow", 1, -0.6, 0.5},
    {"right_elbow", 1, 0.6, 0.5},
    {"left_hip", 0, 0.0, 0.30},
    {"right_hip", 0, 0.0, 0.30},
    {"left_knee", 0, 0.3, 0.30},
    {"right_knee", 0, 0.3, 0.30},
    {"left_collar", 2, 0.0, 0.10},
}};

}  // namespace

void SynthConfig::validate() const {
  if (frames < 1) throw Error("synth: frames must be >= 1");
  if (imageSize < 1) throw Error("synth: image size must be >= 1");
  if (!(sharpness > 0.0)) throw Error("synth: sharpness must be positive");
  if (!std::isfinite(poseAmplitude) || !std::isfinite(wrinkleAmplitude)) throw Error("synth: amplitudes must be finite");
  if (!(trainFraction >= 0.0 && trainFraction <= 1.0)) throw Error("synth: train fraction must be in [0, 1]");
}

Displacement wrinkleDisplacement(const GarmentRig& rig, std::span<const double> theta, double amplitude) {
  if (theta.size() != static_cast<std::size_t>(kPoseDim)) throw Error("wrinkle: theta must have 72 values");
  const double elbow = theta[3 * static_cast<std::size_t>(smplJoint("left_elbow")) + 1];
  const auto normals = vertexNormals(rig.templateMesh).normals;
  const double omega = 2.0 * std::numbers::pi / kWrinkleWavelength;
  Displacement d(rig.vertexCount(), 3);
  for (Index i = 0; i < rig.vertexCount(); ++i) {
    const double y = rig.templateMesh.vertices(i, 1);
    d.row(i) = amplitude * std::sin(omega * y + kWrinklePoseGain * elbow) * normals[i].transpose();
  }
  return d;
}

Camera frameCamera(const TriMesh& garmentTemplate, int imageSize) {
  if (garmentTemplate.vertices.rows() == 0) throw Error("cannot frame an empty mesh");
  const Eigen::RowVector3d lo = garmentTemplate.vertices.colwise().minCoeff();
  const Eigen::RowVector3d hi = garmentTemplate.vertices.colwise().maxCoeff();
  const double extent = std::max(hi(0) - lo(0), hi(1) - lo(1));
  if (!(extent > 0.0)) throw Error("cannot frame a mesh with zero extent");
  Camera c;
  c.s = 1.2 / extent;
  c.tx = -c.s * 0.5 * (lo(0) + hi(0));
  c.ty = -c.s * 0.5 * (lo(1) + hi(1));
  c.width = imageSize;
  c.height = imageSize;
  return c;
}

std::vector<PoseParams> sampleTrajectory(int frames, double amplitude, std::uint64_t seed) {
  if (frames < 1) throw Error("trajectory needs at least one frame");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.5, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Wave {
    std::size_t slot;
    double bias, amplitude, freq, phase;
  };
  std::vector<Wave> waves;
  for (const Dof& d : kDofs) {
    const auto slot = static_cast<std::size_t>(3 * smplJoint(d.joint) + d.axis);
    const double f = freq(rng);
    const double p = phase(rng);
    waves.push_back(Wave{slot, d.bias, d.amplitude, f, p});
  }
  std::vector<PoseParams> poses(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const double u = static_cast<double>(t) / static_cast<double>(frames);
    for (const Wave& w : waves) {
      poses[t].theta[w.slot] =
          amplitude * (w.bias + w.amplitude * std::sin(2.0 * std::numbers::pi * w.freq * u + w.phase));
    }
  }
  return poses;
}

void quantize8(Image& image) {
  for (double& v : image.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

FrameRecord renderFrame(const TriMesh& posedGarment, const PoseParams& pose, const Camera& camera,
                        double sharpness, int frameIndex) {
  FrameRecord f;
  f.pose = pose;
  f.camera = camera;
  f.frameIndex = frameIndex;
  f.mask = rasterizeSilhouette(posedGarment, camera, sharpness);
  f.normal = rasterizeNormals(posedGarment, camera, sharpness);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const double a = f.mask.at(x, y);
      for (int c = 0; c < 3; ++c) {
        double& v = f.normal.at(x, y, c);
        v = a > 1e-12 ? std::clamp(kNormalBackground + (v - kNormalBackground) / a, 0.0, 1.0) : kNormalBackground;
      }
    }
  }
  return f;
}

SyntheticSequence synthSequence(const SynthConfig& config, const BodyModel& body, const GarmentRig& rig) {
  config.validate();
  rig.validate();
  const Camera camera = frameCamera(rig.templateMesh, config.imageSize);
  const auto poses = sampleTrajectory(config.frames, config.poseAmplitude, config.seed);
  SyntheticSequence out;
  for (int t = 0; t < config.frames; ++t) {
    const PoseParams& pose = poses[static_cast<std::size_t>(t)];
    const Displacement d = wrinkleDisplacement(rig, pose.theta, config.wrinkleAmplitude);
    const TriMesh garment = poseGarment(rig, d, body, pose);
    FrameRecord f = renderFrame(garment, pose, camera, config.sharpness, t);
    quantize8(f.mask);
    quantize8(f.normal);
    out.dataset.frames.push_back(std::move(f));
    out.groundTruth.push_back(garment);
  }
  assignSplit(out.dataset, config.trainFraction);
  out.dataset.validate();
  return out;
}

CheckScene checkScene(std::uint64_t seed, int hypotheses) {
  CheckScene scene;
  scene.body = procedural::syntheticBody();
  procedural::TubeSpec tube;
  tube.rings = 5;
  tube.segments = 10;
  scene.rig = makeGarmentRig(procedural::verticalTube(tube), scene.body, GarmentCategory::UpperShort);

  const auto poses = sampleTrajectory(8, 1.0, seed);
  const PoseParams& pose = poses[3];
  const Displacement d = wrinkleDisplacement(scene.rig, pose.theta, 0.01);
  const TriMesh garment = poseGarment(scene.rig, d, scene.body, pose);
  scene.frame = renderFrame(garment, pose, frameCamera(scene.rig.templateMesh, 32), scene.sharpness, 0);

  NetConfig net;
  net.hypothesisCount = hypotheses;
  net.embeddingWidths = {16, 16};
  net.fusionHidden = 8;
  net.initStd = 0.2;
  net.seed = seed;
  scene.net = initParams(net, scene.rig.vertexCount());
  return scene;
}

}  // namespace drape
