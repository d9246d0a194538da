#include <benchmark/benchmark.h>

#include "drape/metrics.hpp"
#include "drape/procedural.hpp"
#include "drape/render.hpp"
#include "drape/synthetic.hpp"
#include "drape/train.hpp"

namespace {

struct Scene {
  drape::BodyModel body = drape::procedural::syntheticBody();
  drape::GarmentRig rig =
      drape::makeGarmentRig(drape::procedural::shirtTemplate(), body, drape::GarmentCategory::UpperShort);
  drape::SyntheticSequence seq;

  Scene() {
    drape::SynthConfig c;
    c.frames = 4;
    seq = drape::synthSequence(c, body, rig);
  }
};

const Scene& scene() {
  static const Scene s;
  return s;
}

void BM_RasterizeSilhouette(benchmark::State& state) {
  const auto& s = scene();
  const drape::TriMesh mesh = s.seq.groundTruth.frame(0);
  drape::Camera cam = drape::frameCamera(s.rig.templateMesh, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drape::rasterizeSilhouette(mesh, cam));
}
BENCHMARK(BM_RasterizeSilhouette)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_RasterizeNormals(benchmark::State& state) {
  const auto& s = scene();
  const drape::TriMesh mesh = s.seq.groundTruth.frame(0);
  drape::Camera cam = drape::frameCamera(s.rig.templateMesh, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drape::rasterizeNormals(mesh, cam));
}
BENCHMARK(BM_RasterizeNormals)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_FrameForward(benchmark::State& state) {
  const auto& s = scene();
  const drape::DeformationNet net = drape::initParams(drape::NetConfig{}, s.rig.vertexCount());
  for (auto _ : state) {
    benchmark::DoNotOptimize(drape::frameLoss(s.seq.dataset.frames[0], net, s.rig, s.body, drape::LossWeights{},
                                              drape::kDefaultSharpness));
  }
}
BENCHMARK(BM_FrameForward)->Unit(benchmark::kMillisecond);

void BM_FrameForwardBackward(benchmark::State& state) {
  const auto& s = scene();
  const drape::DeformationNet net = drape::initParams(drape::NetConfig{}, s.rig.vertexCount());
  const drape::ParamSet params = drape::trainableParams(net, s.rig);
  const drape::TapedLoss loss = drape::frameObjective(s.seq.dataset.frames[0], net, s.rig, s.body,
                                                      drape::LossWeights{}, drape::kDefaultSharpness);
  for (auto _ : state) {
    drape::ad::Tape tape;
    const auto vars = drape::bindParams(tape, params);
    tape.backward(loss(tape, vars));
    benchmark::DoNotOptimize(drape::collectGradients(tape, vars));
  }
}
BENCHMARK(BM_FrameForwardBackward)->Unit(benchmark::kMillisecond);

void BM_ChamferDistance(benchmark::State& state) {
  const auto& s = scene();
  const drape::TriMesh a = s.seq.groundTruth.frame(0);
  const drape::TriMesh b = s.seq.groundTruth.frame(1);
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(drape::chamferDistance(a, b, samples));
}
BENCHMARK(BM_ChamferDistance)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ChamferBruteForce(benchmark::State& state) {
  const auto& s = scene();
  const drape::Points a = drape::sampleSurface(s.seq.groundTruth.frame(0), 2000, 1);
  const drape::Points b = drape::sampleSurface(s.seq.groundTruth.frame(1), 2000, 2);
  const bool brute = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(drape::chamferPoints(a, b, brute));
}
BENCHMARK(BM_ChamferBruteForce)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
