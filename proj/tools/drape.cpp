#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "drape/checkpoint.hpp"
#include "drape/config.hpp"
#include "drape/dataset.hpp"
#include "drape/evaluate.hpp"
#include "drape/gradcheck.hpp"
#include "drape/mesh_io.hpp"
#include "drape/procedural.hpp"
#include "drape/render.hpp"
#include "drape/synthetic.hpp"
#include "drape/train.hpp"

namespace fs = std::filesystem;
using drape::Error;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string outDir;
};

void addCommon(CLI::App* sub, Common& c, const std::string& outDirHelp) {
  sub->add_option("--config", c.config, "JSON object of flag values (keys are flag names); flags given on the command line win")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--out-dir", c.outDir, outDirHelp);
}

/// Fills options the command line left unset from a flat JSON object.
void applyConfig(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) throw CLI::ConfigError(path + ": config must be a JSON object");
  auto text = [&](const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError(path + ": value of '" + key + "' must be a string, number or boolean");
  };
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = name == "config" ? nullptr : sub.get_option_no_throw("--" + name);
    if (opt == nullptr) throw CLI::ConfigError(path + ": unknown key '" + key + "' for " + sub.get_name());
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(text(v, key));
    } else {
      opt->add_result(text(value, key));
    }
    opt->run_callback();
  }
}

void require(CLI::App& sub, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (sub.get_option(name)->count() == 0) throw CLI::RequiredError(name);
  }
}

std::vector<drape::PoseParams> posesOf(const drape::SequenceDataset& ds, std::span<const std::size_t> idx) {
  std::vector<drape::PoseParams> out;
  for (const std::size_t i : idx) out.push_back(ds.frames[i].pose);
  return out;
}

std::vector<std::size_t> splitIndices(const drape::SequenceDataset& ds, const std::string& split) {
  if (split == "train") return ds.train;
  if (split == "test") return ds.test;
  std::vector<std::size_t> all(ds.frames.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  Common common;
  drape::SynthConfig config;
  std::string garment = "shirt";
};

int runSynth(const SynthArgs& a) {
  drape::SynthConfig config = a.config;
  config.seed = a.common.seed;
  const drape::BodyModel body = drape::procedural::syntheticBody();
  const bool skirt = a.garment == "skirt";
  const drape::GarmentRig rig = drape::makeGarmentRig(
      skirt ? drape::procedural::skirtTemplate() : drape::procedural::shirtTemplate(), body,
      skirt ? drape::GarmentCategory::SkirtShort : drape::GarmentCategory::UpperShort);
  const drape::SyntheticSequence seq = drape::synthSequence(config, body, rig);

  const fs::path out = a.common.outDir;
  fs::create_directories(out);
  drape::saveSequence(seq.dataset, out);
  drape::saveSceneAssets({body, rig}, out);
  drape::saveMeshSequence(seq.groundTruth, out / "gt");
  writeText(out / "synth_config.json", drape::toJson(config) + "\n");

  std::printf("synth: %zu frames (%zu train, %zu test), %d garment vertices, GT CCV %.6f cm -> %s\n",
              seq.dataset.frames.size(), seq.dataset.train.size(), seq.dataset.test.size(), rig.vertexCount(),
              drape::ccv(seq.groundTruth), out.string().c_str());
  return 0;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string data;
  drape::TrainConfig config;
  drape::NetConfig net;
  std::string precision = "double";
  double trainFraction = drape::kDefaultTrainFraction;
};

int runTrain(const TrainArgs& a) {
  drape::TrainConfig config = a.config;
  config.seed = a.common.seed;
  config.precision = drape::parsePrecision(a.precision);
  drape::NetConfig netConfig = a.net;
  netConfig.seed = a.common.seed;

  const drape::SequenceDataset ds = drape::loadSequence(a.data, a.trainFraction);
  const drape::SceneAssets assets = drape::loadSceneAssets(a.data);
  const fs::path out = a.common.outDir;
  fs::create_directories(out);
  writeText(out / "train_config.json",
            "{\"net\": " + drape::toJson(netConfig) + ", \"train\": " + drape::toJson(config) + "}\n");

  const drape::DeformationNet net = drape::initParams(netConfig, assets.rig.vertexCount());
  const auto result = drape::train(ds, assets.body, assets.rig, net, config, out, [](const drape::StepLog& s) {
    std::printf("epoch %d step %lld total %.6g mask %.6g normal %.6g edge %.6g face %.6g angle %.6g collision %.6g\n",
                s.epoch, static_cast<long long>(s.step), s.loss.total, s.loss.mask, s.loss.normal, s.loss.edge,
                s.loss.face, s.loss.angle, s.loss.collision);
    std::fflush(stdout);
  });
  for (std::size_t e = 0; e < result.epochLoss.size(); ++e) {
    std::printf("epoch %zu mean loss %.6g\n", e + 1, result.epochLoss[e]);
  }
  std::printf("best epoch %d; checkpoints and loss_log.csv in %s\n", result.bestEpoch, out.string().c_str());
  return 0;
}

// --- animate -------------------------------------------------------------

struct AnimateArgs {
  Common common;
  std::string checkpoint;
  std::string data;
  std::string split = "all";
  int randomFrames = 0;
  double poseAmplitude = 1.0;
  double trainFraction = drape::kDefaultTrainFraction;
};

int runAnimate(const AnimateArgs& a) {
  const drape::Checkpoint ck = drape::loadCheckpoint(a.checkpoint);
  const drape::DeformationNet net = drape::networkFromCheckpoint(ck);
  drape::SceneAssets assets = drape::loadSceneAssets(a.data);
  drape::applyBlendWeights(ck, assets.rig);

  std::vector<drape::PoseParams> poses;
  std::vector<int> names;
  if (a.randomFrames > 0) {
    poses = drape::sampleTrajectory(a.randomFrames, a.poseAmplitude, a.common.seed);
    for (int i = 0; i < a.randomFrames; ++i) names.push_back(i);
  } else {
    const drape::SequenceDataset ds = drape::loadSequence(a.data, a.trainFraction);
    const auto idx = splitIndices(ds, a.split);
    poses = posesOf(ds, idx);
    for (const std::size_t i : idx) names.push_back(ds.frames[i].frameIndex);
  }
  const drape::MeshSequence seq = drape::animate(net, assets.rig, assets.body, poses);
  drape::saveMeshSequence(seq, a.common.outDir, names);
  std::printf("animate: %zu frames -> %s\n", seq.size(), a.common.outDir.c_str());
  return 0;
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string pred;
  std::string gt;
  std::string data;
  std::string split = "all";
  std::string sequenceId;
  int samples = drape::kDefaultChamferSamples;
  double trainFraction = drape::kDefaultTrainFraction;
};

int runEval(const EvalArgs& a) {
  std::vector<int> predFrames;
  std::vector<int> gtFrames;
  drape::MeshSequence pred = drape::loadMeshSequence(a.pred, &predFrames);
  drape::MeshSequence gt = drape::loadMeshSequence(a.gt, &gtFrames);
  if (pred.size() != gt.size()) {
    throw Error("frame count mismatch: " + std::to_string(pred.size()) + " predicted vs " +
                std::to_string(gt.size()) + " ground-truth meshes");
  }
  if (predFrames != gtFrames) throw Error("predicted and ground-truth frame numbers differ");
  std::vector<int> frames = gtFrames;
  if (a.split != "all") {
    if (a.data.empty()) throw Error("--split needs --data to look up the split");
    const drape::SequenceDataset ds = drape::loadSequence(a.data, a.trainFraction);
    std::vector<std::size_t> keep;
    frames.clear();
    for (const std::size_t i : splitIndices(ds, a.split)) {
      const int f = ds.frames[i].frameIndex;
      const auto it = std::find(gtFrames.begin(), gtFrames.end(), f);
      if (it == gtFrames.end()) throw Error("frame " + drape::frameName(f) + " missing from the meshes");
      keep.push_back(static_cast<std::size_t>(it - gtFrames.begin()));
      frames.push_back(f);
    }
    pred = drape::subsequence(pred, keep);
    gt = drape::subsequence(gt, keep);
  }

  drape::EvalOptions options;
  options.samples = a.samples;
  options.seed = a.common.seed;
  const drape::EvalReport report = drape::evaluate(pred, gt, options);
  std::string id = a.sequenceId;
  if (id.empty()) {
    // seq/gt -> "seq"
    fs::path gtDir = fs::absolute(a.gt).lexically_normal();
    if (!gtDir.has_filename()) gtDir = gtDir.parent_path();
    id = gtDir.filename() == "gt" ? gtDir.parent_path().filename().string() : gtDir.filename().string();
  }
  std::printf("%s CD %.3f\n%s CCV %.3f\n%s GT_CCV %.3f\n", id.c_str(), report.meanChamfer, id.c_str(), report.ccv,
              id.c_str(), report.gtCcv);
  if (!a.common.outDir.empty()) {
    fs::create_directories(a.common.outDir);
    writeText(fs::path(a.common.outDir) / "metrics.csv", drape::perFrameCsv(id, frames, report));
    const std::vector<std::pair<std::string, drape::EvalReport>> rows{{id, report}};
    writeText(fs::path(a.common.outDir) / "summary.csv", drape::summaryCsv(rows));
  }
  return 0;
}

// --- gradcheck -----------------------------------------------------------

struct GradcheckArgs {
  Common common;
  double tolerance = 1e-4;
  double rasterTolerance = 1e-3;
  double step = 1e-5;
  int budget = 200;
  int hypotheses = 3;
};

int runGradcheck(const GradcheckArgs& a) {
  const drape::CheckScene scene = drape::checkScene(a.common.seed, a.hypotheses);
  struct Check {
    const char* name;
    drape::LossWeights weights;
    double tolerance;
  };
  drape::LossWeights cloth;
  cloth.mask = cloth.normal = 0.0;
  drape::LossWeights image;
  image.edge = image.face = image.angle = image.collision = 0.0;
  const Check checks[] = {{"objective", drape::LossWeights{}, a.tolerance},
                          {"cloth terms", cloth, a.tolerance},
                          {"image terms", image, a.rasterTolerance}};

  std::printf("scene: %d garment vertices, %dx%d images, %d hypotheses\n", scene.rig.vertexCount(),
              scene.frame.camera.width, scene.frame.camera.height, a.hypotheses);
  std::string csv = "check,param,index,analytic,numeric,rel_err\n";
  bool allPass = true;
  for (const Check& c : checks) {
    drape::ParamSet params = drape::trainableParams(scene.net, scene.rig);
    drape::GradcheckOptions options;
    options.step = a.step;
    options.tolerance = c.tolerance;
    options.budget = a.budget;
    options.seed = a.common.seed;
    const auto loss = drape::frameObjective(scene.frame, scene.net, scene.rig, scene.body, c.weights, scene.sharpness);
    const drape::GradcheckReport r = drape::gradcheck(loss, params, options);

    std::map<std::string, std::pair<int, double>> perParam;
    for (const auto& e : r.entries) {
      auto& [count, worst] = perParam[e.param];
      ++count;
      worst = std::max(worst, e.relErr);
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.17g,%.17g,%.17g\n", c.name, e.param.c_str(), e.index, e.analytic,
                    e.numeric, e.relErr);
      csv += buf;
    }
    std::printf("\n%s (tolerance %g)\n  %-24s %8s %14s\n", c.name, c.tolerance, "param", "checked", "max rel err");
    for (const auto& p : params) {
      const auto it = perParam.find(p.name);
      if (it == perParam.end()) continue;
      std::printf("  %-24s %8d %14.3e\n", p.name.c_str(), it->second.first, it->second.second);
    }
    std::printf("  max %.3e at %s: %s\n", r.maxRelErr, r.worstParam.c_str(), r.pass ? "PASS" : "FAIL");
    allPass = allPass && r.pass;
  }
  if (!a.common.outDir.empty()) {
    fs::create_directories(a.common.outDir);
    writeText(fs::path(a.common.outDir) / "gradcheck.csv", csv);
  }
  return allPass ? 0 : 1;
}

// --- render --------------------------------------------------------------

struct RenderArgs {
  Common common;
  std::string mesh;
  std::string kind = "normal";
  int size = 128;
  std::vector<double> camera;
  double sharpness = drape::kDefaultSharpness;
  std::string name;
};

int runRender(const RenderArgs& a) {
  const drape::TriMesh mesh = drape::loadObj(a.mesh);
  drape::Camera cam;
  if (a.camera.empty()) {
    cam = drape::frameCamera(mesh, a.size);
  } else {
    cam.s = a.camera[0];
    cam.tx = a.camera[1];
    cam.ty = a.camera[2];
    cam.width = cam.height = a.size;
  }
  drape::Image img;
  if (a.kind == "mask") {
    img = drape::rasterizeSilhouette(mesh, cam, a.sharpness);
  } else if (a.kind == "normal") {
    img = drape::rasterizeNormals(mesh, cam, a.sharpness);
  } else {
    // Pseudo-colors: rest coordinates scaled into the unit cube.
    const Eigen::RowVector3d lo = mesh.vertices.colwise().minCoeff();
    const Eigen::RowVector3d span = (mesh.vertices.colwise().maxCoeff() - lo).cwiseMax(1e-12);
    drape::MatrixX desc(mesh.vertices.rows(), 3);
    for (Eigen::Index i = 0; i < desc.rows(); ++i) {
      desc.row(i) = (mesh.vertices.row(i) - lo).cwiseQuotient(span);
    }
    img = drape::rasterizeDescriptors(mesh, desc, cam);
    img.kind = drape::ImageKind::Rgb;
  }
  const fs::path out = fs::path(a.common.outDir) / (a.name.empty() ? a.kind + ".png" : a.name);
  fs::create_directories(out.parent_path());
  drape::writePng(img, out);
  std::printf("render: %s %dx%d (s %.6g, tx %.6g, ty %.6g) -> %s\n", a.kind.c_str(), cam.width, cam.height, cam.s,
              cam.tx, cam.ty, out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-driven garment deformation: synthesize data, train, animate, evaluate."};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", "drape 0.1.0");
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic sequence with ground-truth garments");
  addCommon(s, synth.common, "Output sequence directory (required)");
  s->add_option("--frames", synth.config.frames, "Number of frames")->check(CLI::PositiveNumber);
  s->add_option("--pose-amplitude", synth.config.poseAmplitude, "Scale of the joint trajectories");
  s->add_option("--wrinkle-amplitude", synth.config.wrinkleAmplitude, "Peak wrinkle displacement in meters");
  s->add_option("--image-size", synth.config.imageSize, "Square image size in pixels")->check(CLI::PositiveNumber);
  s->add_option("--sharpness", synth.config.sharpness, "Soft rasterizer sharpness (NDC units)");
  s->add_option("--train-fraction", synth.config.trainFraction, "Fraction of frames in the training split");
  s->add_option("--garment", synth.garment, "Bundled garment template")->check(CLI::IsMember({"shirt", "skirt"}));

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the deformation network on a sequence");
  addCommon(t, train.common, "Checkpoint and log directory (required)");
  t->add_option("--data", train.data, "Sequence directory (poses/, masks/, normals/, body/, template/)")
      ->check(CLI::ExistingDirectory);
  t->add_option("--epochs", train.config.epochs, "Training epochs")->check(CLI::PositiveNumber);
  t->add_option("--batch-size", train.config.batchSize, "Frames per optimizer step")->check(CLI::PositiveNumber);
  t->add_option("--lr", train.config.lr, "Adam learning rate");
  t->add_option("--precision", train.precision, "Parameter precision")->check(CLI::IsMember({"double", "single"}));
  t->add_option("--optimize-blend-weights", train.config.optimizeBlendWeights, "Train the garment blend weights");
  t->add_option("--sharpness", train.config.sharpness, "Soft rasterizer sharpness (NDC units)");
  t->add_option("--train-fraction", train.trainFraction, "Fraction of frames in the training split");
  t->add_option("--lambda-mask", train.config.weights.mask, "Silhouette term weight");
  t->add_option("--lambda-normal", train.config.weights.normal, "Normal-map term weight");
  t->add_option("--lambda-edge", train.config.weights.edge, "Edge-length term weight");
  t->add_option("--lambda-face", train.config.weights.face, "Face-normal Laplacian term weight");
  t->add_option("--lambda-angle", train.config.weights.angle, "Dihedral-angle term weight");
  t->add_option("--lambda-collision", train.config.weights.collision, "Collision term weight");
  t->add_option("--epsilon", train.config.weights.epsilon, "Collision offset in meters");
  t->add_option("--collision-radius", train.config.weights.collisionRadius,
                "Body vertices farther than this from the garment are not tested (meters)");
  t->add_option("--hypotheses", train.net.hypothesisCount, "Number of displacement hypotheses (1-6)");
  t->add_option("--embedding-widths", train.net.embeddingWidths, "Pose-embedding layer widths");
  t->add_option("--fusion-hidden", train.net.fusionHidden, "Hidden width of the fusion MLP");
  t->add_option("--init-std", train.net.initStd, "Standard deviation of the truncated-normal initialization");

  AnimateArgs anim;
  auto* m = app.add_subcommand("animate", "Drive a trained garment with a pose sequence");
  addCommon(m, anim.common, "Directory for the NNNN.obj meshes (required)");
  m->add_option("--checkpoint", anim.checkpoint, "Trained checkpoint (.bin)")->check(CLI::ExistingFile);
  m->add_option("--data", anim.data, "Sequence directory providing body/, template/ and poses/")
      ->check(CLI::ExistingDirectory);
  m->add_option("--split", anim.split, "Frames to animate from the sequence")
      ->check(CLI::IsMember({"all", "train", "test"}));
  m->add_option("--random-frames", anim.randomFrames,
                "Animate a freshly sampled trajectory of this many frames instead of the sequence poses");
  m->add_option("--pose-amplitude", anim.poseAmplitude, "Trajectory scale for --random-frames");
  m->add_option("--train-fraction", anim.trainFraction, "Fraction of frames in the training split");

  EvalArgs eval;
  eval.common.seed = drape::kDefaultSampleSeed;
  auto* e = app.add_subcommand("eval", "Chamfer distance and CCV of predicted against ground-truth meshes");
  addCommon(e, eval.common, "Directory for metrics.csv and summary.csv (optional)");
  e->add_option("--pred", eval.pred, "Directory of predicted NNNN.obj meshes")->check(CLI::ExistingDirectory);
  e->add_option("--gt", eval.gt, "Directory of ground-truth NNNN.obj meshes")->check(CLI::ExistingDirectory);
  e->add_option("--data", eval.data, "Sequence directory whose split --split refers to")
      ->check(CLI::ExistingDirectory);
  e->add_option("--split", eval.split, "Frames to evaluate")->check(CLI::IsMember({"all", "train", "test"}));
  e->add_option("--sequence-id", eval.sequenceId, "Row label (default: name of the --gt directory, or of its parent when that is named gt)");
  e->add_option("--samples", eval.samples, "Surface samples per mesh")->check(CLI::PositiveNumber);
  e->add_option("--train-fraction", eval.trainFraction, "Fraction of frames in the training split");

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients on a small scene");
  addCommon(g, gc.common, "Directory for gradcheck.csv (optional)");
  g->add_option("--tolerance", gc.tolerance, "Maximum relative error for the objective and cloth terms");
  g->add_option("--raster-tolerance", gc.rasterTolerance, "Maximum relative error for the image terms");
  g->add_option("--step", gc.step, "Central-difference step");
  g->add_option("--budget", gc.budget, "Coordinates sampled per check")->check(CLI::PositiveNumber);
  g->add_option("--hypotheses", gc.hypotheses, "Number of displacement hypotheses (1-6)");

  RenderArgs rend;
  auto* r = app.add_subcommand("render", "Rasterize a mesh to PNG");
  addCommon(r, rend.common, "Output directory (required); --seed is accepted but unused");
  r->add_option("--mesh", rend.mesh, "OBJ mesh to render")->check(CLI::ExistingFile);
  r->add_option("--kind", rend.kind, "Image type")->check(CLI::IsMember({"mask", "normal", "descriptor"}));
  r->add_option("--size", rend.size, "Square image size in pixels")->check(CLI::PositiveNumber);
  r->add_option("--camera", rend.camera, "Weak-perspective camera s tx ty (default: fit the mesh)")->expected(3);
  r->add_option("--sharpness", rend.sharpness, "Soft rasterizer sharpness (NDC units)");
  r->add_option("--name", rend.name, "Output file name (default: <kind>.png)");

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (sub == s) {
      applyConfig(*s, synth.common.config);
      require(*s, {"--out-dir"});
    } else if (sub == t) {
      applyConfig(*t, train.common.config);
      require(*t, {"--data", "--out-dir"});
    } else if (sub == m) {
      applyConfig(*m, anim.common.config);
      require(*m, {"--checkpoint", "--data", "--out-dir"});
    } else if (sub == e) {
      applyConfig(*e, eval.common.config);
      require(*e, {"--pred", "--gt"});
    } else if (sub == g) {
      applyConfig(*g, gc.common.config);
    } else {
      applyConfig(*r, rend.common.config);
      require(*r, {"--mesh", "--out-dir"});
    }
  } catch (const CLI::Success& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == s) return runSynth(synth);
    if (sub == t) return runTrain(train);
    if (sub == m) return runAnimate(anim);
    if (sub == e) return runEval(eval);
    if (sub == g) return runGradcheck(gc);
    return runRender(rend);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "drape: error: %s\n", ex.what());
    return 1;
  }
}
