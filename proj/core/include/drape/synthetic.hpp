#pragma once

#include <cstdint>
#include <vector>

#include "drape/dataset.hpp"
#include "drape/garment.hpp"
#include "drape/network.hpp"

namespace drape {

struct SynthConfig {
  int frames = 64;
  /// Scales every joint trajectory.
  double poseAmplitude = 1.0;
  /// Peak ground-truth displacement in meters.
  double wrinkleAmplitude = 0.01;
  std::uint64_t seed = 0;
  int imageSize = 128;
  double sharpness = kDefaultSharpness;
  double trainFraction = kDefaultTrainFraction;

  void validate() const;
};

/// Spatial period (meters along template y) of the ground-truth wrinkles.
inline constexpr double kWrinkleWavelength = 0.17;
/// Phase shift per radian of left-elbow flexion.
inline constexpr double kWrinklePoseGain = 2.0;

/// d*(θ)_i = amplitude · sin(2π y_i / kWrinkleWavelength + kWrinklePoseGain ·
/// θ_left_elbow,y) · n_i, with y_i and n_i the template position and normal.
Displacement wrinkleDisplacement(const GarmentRig& rig, std::span<const double> theta, double amplitude);

/// Camera centered on the template's x/y bounding box, which spans 60% of
/// the frame.
Camera frameCamera(const TriMesh& garmentTemplate, int imageSize);

/// Smooth per-joint sinusoids; beta is zero.
std::vector<PoseParams> sampleTrajectory(int frames, double amplitude, std::uint64_t seed);

/// Renders the observation images of one posed garment. The stored normal
/// map is the unblended foreground (0.5 where nothing is covered), matching
/// the masked-normal convention of the loss.
FrameRecord renderFrame(const TriMesh& posedGarment, const PoseParams& pose, const Camera& camera,
                        double sharpness, int frameIndex);

/// Rounds every value to the nearest multiple of 1/255, as PNG storage does.
void quantize8(Image& image);

struct SyntheticSequence {
  SequenceDataset dataset;
  /// Posed ground-truth garments, one per frame.
  MeshSequence groundTruth;
};

/// Deterministic in the config. Images are quantized as if stored to PNG.
SyntheticSequence synthSequence(const SynthConfig& config, const BodyModel& body, const GarmentRig& rig);

/// One-frame scene small enough for finite differences: a 50-vertex tube
/// on the synthetic body, a 32x32 observation of its wrinkled pose and a
/// narrow randomly initialized network.
struct CheckScene {
  BodyModel body;
  GarmentRig rig;
  FrameRecord frame;
  DeformationNet net;
  double sharpness = 0.05;
};

CheckScene checkScene(std::uint64_t seed = 0, int hypotheses = 3);

}  // namespace drape
