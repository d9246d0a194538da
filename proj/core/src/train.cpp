#include "drape/train.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <tuple>

#include "binary_io.hpp"
#include "drape/geometry_ops.hpp"
#include "drape/ops.hpp"
#include "json_io.hpp"

namespace drape {

namespace {

/// Body state for one frame; constant during training.
struct FrameScene {
  std::vector<double> transforms;
  Points bodyVertices;
  std::vector<Vec3> bodyNormals;
};

FrameScene prepareScene(const FrameRecord& frame, const BodyModel& body) {
  const PosedBody posed = poseBodyDetailed(body, frame.pose);
  FrameScene s;
  s.transforms.assign(posed.transforms.data(), posed.transforms.data() + posed.transforms.size());
  s.bodyVertices = posed.mesh.vertices;
  s.bodyNormals = vertexNormals(posed.mesh).normals;
  return s;
}

ad::Var pointsConstant(ad::Tape& t, const Points& p) {
  return t.constant(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                    ad::Shape{static_cast<std::size_t>(p.rows()), 3});
}

/// Builds the loss of one frame on `tape`.
ad::LossNodes frameNodes(ad::Tape& tape, const NetVars& net, ad::Var weights, const FrameRecord& frame,
                         const FrameScene& scene, const GarmentRig& rig, const LossWeights& lw, double sharpness) {
  const ad::Var theta = tape.constant(std::span<const double>(frame.pose.theta), ad::Shape{kPoseDim});
  const ad::Var d = ad::predictDisplacement(net, theta);
  const ad::Var rest = ad::add(pointsConstant(tape, rig.templateMesh.vertices), d);
  const ad::Var transforms = tape.constant(scene.transforms, ad::Shape{scene.transforms.size() / 12, 12});
  const ad::Var posed = ad::linearBlendSkinning(rest, weights, transforms);
  return ad::totalLoss(posed, rig, frame, scene.bodyVertices, scene.bodyNormals, lw, sharpness);
}

ad::Var weightsConstant(ad::Tape& t, const MatrixX& w) {
  return t.constant(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                    ad::Shape{static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols())});
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t epoch) {
  std::uint64_t x = seed ^ (epoch * 0x9e3779b97f4a7c15ULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void accumulate(LossBreakdown& into, const LossBreakdown& b, double w) {
  into.total += w * b.total;
  into.mask += w * b.mask;
  into.normal += w * b.normal;
  into.edge += w * b.edge;
  into.face += w * b.face;
  into.angle += w * b.angle;
  into.collision += w * b.collision;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batchSize < 1) throw Error("batch size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw Error("learning rate must be positive");
  if (!(sharpness > 0.0)) throw Error("sharpness must be positive");
  weights.validate();
}

std::vector<std::size_t> epochOrder(std::span<const std::size_t> frames, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(frames.begin(), frames.end());
  std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(epoch)));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

std::string lossLogCsv(std::span<const StepLog> log) {
  std::ostringstream out;
  out << "step,total,mask,normal,edge,face,angle,collision\n";
  char buf[512];
  for (const StepLog& s : log) {
    const LossBreakdown& l = s.loss;
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(s.step), l.total, l.mask, l.normal, l.edge, l.face, l.angle, l.collision);
    out << buf;
  }
  return out.str();
}

Checkpoint makeCheckpoint(const DeformationNet& net, const MatrixX* blendWeights, const TrainConfig& config,
                          int epoch) {
  Checkpoint ck;
  ck.net = net.config;
  ck.vertexCount = net.vertexCount;
  ck.params = net.params;
  if (blendWeights != nullptr) {
    ck.params.add(std::string(kBlendWeightsParam),
                  ad::Shape{static_cast<std::size_t>(blendWeights->rows()), static_cast<std::size_t>(blendWeights->cols())},
                  std::vector<double>(blendWeights->data(), blendWeights->data() + blendWeights->size()));
  }
  ck.seed = net.config.seed;
  ck.dtype = config.precision;
  ck.epoch = epoch;
  ck.metadata = detail::Json{{"train", detail::toJsonValue(config)}}.dump();
  return ck;
}

TrainResult train(const SequenceDataset& dataset, const BodyModel& body, const GarmentRig& rig, DeformationNet net,
                  const TrainConfig& config, const std::filesystem::path& outDir, const StepCallback& onStep) {
  config.validate();
  dataset.validate();
  rig.validate();
  net.validate();
  if (dataset.train.empty()) throw Error("training split is empty");
  if (net.vertexCount != rig.vertexCount()) {
    throw Error("network predicts " + std::to_string(net.vertexCount) + " vertices, garment has " +
                std::to_string(rig.vertexCount()));
  }

  std::vector<FrameScene> scenes(dataset.frames.size());
  for (const std::size_t i : dataset.train) scenes[i] = prepareScene(dataset.frames[i], body);

  const std::size_t netTensors = net.params.size();
  ParamSet params = config.optimizeBlendWeights ? trainableParams(net, rig) : std::move(net.params);
  if (config.precision == Precision::Single) roundToSingle(params);
  AdamState adam = AdamState::zerosLike(params);

  auto currentWeights = [&]() {
    MatrixX w = rig.blendWeights;
    if (config.optimizeBlendWeights) {
      const auto& v = params[netTensors].value;
      std::copy(v.begin(), v.end(), w.data());
    }
    return w;
  };
  auto snapshot = [&]() {
    DeformationNet out{net.config, net.vertexCount, {}};
    for (std::size_t i = 0; i < netTensors; ++i) out.params.add(params[i].name, params[i].shape, params[i].value);
    return out;
  };
  auto writeCheckpoint = [&](const std::filesystem::path& path, int epoch) {
    const MatrixX w = currentWeights();
    saveCheckpoint(makeCheckpoint(snapshot(), config.optimizeBlendWeights ? &w : nullptr, config, epoch), path);
  };

  TrainResult result;
  double bestLoss = std::numeric_limits<double>::infinity();
  std::int64_t step = 0;
  const auto batch = static_cast<std::size_t>(config.batchSize);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = epochOrder(dataset.train, config.seed, epoch);
    double epochSum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      ad::Tape tape;
      const auto vars = bindParams(tape, params);
      const NetVars netVars{&net.config, net.vertexCount, std::span<const ad::Var>(vars.data(), netTensors)};
      const ad::Var weights = config.optimizeBlendWeights ? vars[netTensors] : weightsConstant(tape, rig.blendWeights);
      std::vector<ad::Var> totals;
      StepLog log;
      log.step = ++step;
      log.epoch = epoch;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t fi = order[k];
        const int frameIndex = dataset.frames[fi].frameIndex;
        ad::LossNodes nodes;
        try {
          nodes = frameNodes(tape, netVars, weights, dataset.frames[fi], scenes[fi], rig, config.weights,
                             config.sharpness);
        } catch (const Error& e) {
          throw Error("frame " + frameName(frameIndex) + ": " + e.what());
        }
        const LossBreakdown b = nodes.values();
        if (!std::isfinite(b.total)) throw Error("non-finite loss at frame " + frameName(frameIndex));
        accumulate(log.loss, b, inv);
        totals.push_back(nodes.total);
      }
      const std::vector<double> means(totals.size(), inv);
      const ad::Var loss = ad::linearCombination(totals, means);
      tape.backward(loss);
      const GradRecord grads = collectGradients(tape, vars);
      adamStep(params, grads, adam, config.lr);
      if (config.optimizeBlendWeights) {
        MatrixX w = currentWeights();
        projectRowsToSimplex(w);
        std::copy(w.data(), w.data() + w.size(), params[netTensors].value.begin());
      }
      if (config.precision == Precision::Single) roundToSingle(params);
      epochSum += log.loss.total * static_cast<double>(end - start);
      result.log.push_back(log);
      if (onStep) onStep(log);
    }
    const double epochMean = epochSum / static_cast<double>(order.size());
    result.epochLoss.push_back(epochMean);
    if (!outDir.empty()) {
      writeCheckpoint(outDir / ("ckpt_epoch" + std::to_string(epoch) + ".bin"), epoch);
      if (epochMean < bestLoss) writeCheckpoint(outDir / "best.bin", epoch);
    }
    if (epochMean < bestLoss) {
      bestLoss = epochMean;
      result.bestEpoch = epoch;
    }
  }
  if (!outDir.empty()) detail::writeTextFile(outDir / "loss_log.csv", lossLogCsv(result.log));

  result.blendWeights = currentWeights();
  result.net = snapshot();
  return result;
}

ad::LossNodes frameLossNodes(ad::Tape& tape, const NetVars& net, ad::Var weights, const FrameRecord& frame,
                             const BodyModel& body, const GarmentRig& rig, const LossWeights& lossWeights,
                             double sharpness) {
  return frameNodes(tape, net, weights, frame, prepareScene(frame, body), rig, lossWeights, sharpness);
}

ParamSet trainableParams(const DeformationNet& net, const GarmentRig& rig) {
  ParamSet params = net.params;
  params.add(std::string(kBlendWeightsParam),
             ad::Shape{static_cast<std::size_t>(rig.blendWeights.rows()), static_cast<std::size_t>(rig.blendWeights.cols())},
             std::vector<double>(rig.blendWeights.data(), rig.blendWeights.data() + rig.blendWeights.size()));
  return params;
}

TapedLoss frameObjective(const FrameRecord& frame, const DeformationNet& net, const GarmentRig& rig,
                         const BodyModel& body, const LossWeights& lossWeights, double sharpness) {
  auto scene = std::make_shared<const FrameScene>(prepareScene(frame, body));
  auto context = std::make_shared<const std::tuple<FrameRecord, NetConfig, GarmentRig>>(frame, net.config, rig);
  const Index vertexCount = net.vertexCount;
  const std::size_t netTensors = net.params.size();
  return [=](ad::Tape& tape, std::span<const ad::Var> params) {
    if (params.size() != netTensors + 1) throw Error("frameObjective: expected network tensors plus blend weights");
    const auto& [f, config, r] = *context;
    const NetVars netVars{&config, vertexCount, params.subspan(0, netTensors)};
    return frameNodes(tape, netVars, params[netTensors], f, *scene, r, lossWeights, sharpness).total;
  };
}

LossBreakdown frameLoss(const FrameRecord& frame, const DeformationNet& net, const GarmentRig& rig,
                        const BodyModel& body, const LossWeights& weights, double sharpness) {
  const FrameScene scene = prepareScene(frame, body);
  ad::Tape tape;
  const auto vars = bindConstants(tape, net.params);
  const NetVars netVars{&net.config, net.vertexCount, vars};
  return frameNodes(tape, netVars, weightsConstant(tape, rig.blendWeights), frame, scene, rig, weights, sharpness)
      .values();
}

MeshSequence animate(const DeformationNet& net, const GarmentRig& rig, const BodyModel& body,
                     std::span<const PoseParams> poses) {
  if (net.vertexCount != rig.vertexCount()) throw Error("network and garment vertex counts differ");
  MeshSequence seq;
  for (const PoseParams& pose : poses) {
    const Displacement d = predictDisplacement(net, pose.theta);
    const JointTransforms transforms = poseBodyDetailed(body, pose).transforms;
    seq.push_back(poseGarment(rig, d, transforms));
  }
  if (seq.size() == 0) seq.faces = rig.templateMesh.faces;
  return seq;
}

}  // namespace drape
