#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "drape/checkpoint.hpp"
#include "drape/dataset.hpp"
#include "drape/gradcheck.hpp"
#include "drape/loss.hpp"
#include "drape/network.hpp"

namespace drape {

struct TrainConfig {
  int epochs = 10;
  int batchSize = 8;
  double lr = 1e-4;
  LossWeights weights;
  std::uint64_t seed = 0;
  /// Single rounds parameters to float after every step and stores f32.
  Precision precision = Precision::Double;
  bool optimizeBlendWeights = true;
  double sharpness = kDefaultSharpness;

  void validate() const;
};

struct StepLog {
  std::int64_t step = 0;
  int epoch = 0;
  /// Mean over the batch's frames.
  LossBreakdown loss;
};

struct TrainResult {
  DeformationNet net;
  MatrixX blendWeights;
  std::vector<StepLog> log;
  /// Mean frame loss of each epoch, measured before each step.
  std::vector<double> epochLoss;
  int bestEpoch = 0;
};

using StepCallback = std::function<void(const StepLog&)>;

/// Adam over the network (and blend weights if enabled) on shuffled
/// batches of the training split. With a non-empty `outDir`, writes
/// ckpt_epochK.bin each epoch, best.bin, and loss_log.csv.
TrainResult train(const SequenceDataset& dataset, const BodyModel& body, const GarmentRig& rig, DeformationNet net,
                  const TrainConfig& config, const std::filesystem::path& outDir = {},
                  const StepCallback& onStep = {});

/// Training frame order of one epoch (Fisher-Yates, seeded by seed and epoch).
std::vector<std::size_t> epochOrder(std::span<const std::size_t> frames, std::uint64_t seed, int epoch);

/// `step,total,mask,normal,edge,face,angle,collision` rows.
std::string lossLogCsv(std::span<const StepLog> log);

/// Taped objective of one frame: predicted displacement, skinning of the
/// displaced template with `weights` [N x K], then every loss term.
ad::LossNodes frameLossNodes(ad::Tape& tape, const NetVars& net, ad::Var weights, const FrameRecord& frame,
                             const BodyModel& body, const GarmentRig& rig, const LossWeights& lossWeights,
                             double sharpness);

/// Network tensors followed by kBlendWeightsParam, the layout `train`
/// optimizes when blend weights are trainable.
ParamSet trainableParams(const DeformationNet& net, const GarmentRig& rig);

/// Total loss of one frame as a function of trainableParams(net, rig).
/// Copies its inputs.
TapedLoss frameObjective(const FrameRecord& frame, const DeformationNet& net, const GarmentRig& rig,
                         const BodyModel& body, const LossWeights& lossWeights, double sharpness);

/// Loss of one frame under the given network and rig.
LossBreakdown frameLoss(const FrameRecord& frame, const DeformationNet& net, const GarmentRig& rig,
                        const BodyModel& body, const LossWeights& weights, double sharpness);

/// Predicted displacement then garment skinning, per pose.
MeshSequence animate(const DeformationNet& net, const GarmentRig& rig, const BodyModel& body,
                     std::span<const PoseParams> poses);

/// Checkpoint of a trained model.
Checkpoint makeCheckpoint(const DeformationNet& net, const MatrixX* blendWeights, const TrainConfig& config,
                          int epoch);

}  // namespace drape
