#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "helpers.hpp"

namespace {

namespace fs = std::filesystem;
using drape::test::TempDir;

struct Result {
  int code = -1;
  std::string output;
};

Result drape(const std::string& args) {
  const std::string cmd = std::string("\"") + DRAPE_CLI_PATH + "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void writeText(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string readText(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One small synthetic sequence shared by the tests that need data.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    const Result r = drape("synth --frames 5 --image-size 16 --sharpness 0.1 --seed 3 --out-dir " + q(data()));
    ASSERT_EQ(r.code, 0) << r.output;
  }
  static void TearDownTestSuite() { delete dir_; }
  static fs::path root() { return dir_->path(); }
  static fs::path data() { return dir_->path() / "seq"; }

 private:
  static inline TempDir* dir_ = nullptr;
};

TEST(CliUsage, NoArgumentsIsUsageError) {
  const Result r = drape("");
  EXPECT_EQ(r.code, 2) << r.output;
}

TEST(CliUsage, HelpDocumentsEveryFlag) {
  const Result top = drape("--help");
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"synth", "train", "animate", "eval", "gradcheck", "render"}) {
    EXPECT_NE(top.output.find(sub), std::string::npos) << sub;
  }
  const Result train = drape("train --help");
  EXPECT_EQ(train.code, 0);
  for (const char* flag : {"--config", "--seed", "--out-dir", "--data", "--epochs", "--batch-size", "--lr",
                           "--precision", "--optimize-blend-weights", "--lambda-mask", "--lambda-normal",
                           "--lambda-edge", "--lambda-face", "--lambda-angle", "--lambda-collision", "--epsilon",
                           "--hypotheses", "--embedding-widths", "--fusion-hidden", "--init-std"}) {
    EXPECT_NE(train.output.find(flag), std::string::npos) << flag;
  }
  const Result gc = drape("gradcheck --help");
  EXPECT_EQ(gc.code, 0);
  for (const char* flag : {"--tolerance", "--raster-tolerance", "--step", "--budget", "--hypotheses"}) {
    EXPECT_NE(gc.output.find(flag), std::string::npos) << flag;
  }
}

TEST(CliUsage, UnknownFlagIsUsageError) {
  const Result r = drape("synth --frames 3 --bogus 1 --out-dir /tmp/x");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("bogus"), std::string::npos) << r.output;
  EXPECT_EQ(drape("explode").code, 2);
}

TEST(CliUsage, MissingRequiredAndBadValues) {
  EXPECT_EQ(drape("synth --frames 3").code, 2);
  EXPECT_EQ(drape("synth --frames zero --out-dir /tmp/x").code, 2);
  EXPECT_EQ(drape("render --mesh /nonexistent.obj --out-dir /tmp/x").code, 2);
}

TEST(CliUsage, ConfigFileErrors) {
  TempDir dir;
  writeText(dir / "bad.json", R"({"frames": 3, "colour": "red"})");
  const Result unknown = drape("synth --config " + q(dir / "bad.json") + " --out-dir " + q(dir / "o"));
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.output.find("colour"), std::string::npos) << unknown.output;
  writeText(dir / "broken.json", "{frames: ");
  EXPECT_EQ(drape("synth --config " + q(dir / "broken.json") + " --out-dir " + q(dir / "o")).code, 2);
}

TEST_F(Cli, SynthWritesSequence) {
  for (const char* f : {"poses/0000.json", "masks/0004.png", "normals/0004.png", "gt/0004.obj", "template/garment.obj",
                        "synth_config.json"}) {
    EXPECT_TRUE(fs::exists(data() / f)) << f;
  }
  EXPECT_FALSE(fs::exists(data() / "poses" / "0005.json"));
}

TEST_F(Cli, ConfigWithFlagOverrideTrainsOneEpoch) {
  const fs::path cfg = root() / "train.json";
  writeText(cfg, R"({"epochs": 4, "batch_size": 2, "embedding_widths": [8, 8], "fusion_hidden": 4,
                     "sharpness": 0.1, "lr": 0.001})");
  const fs::path out = root() / "run";
  const Result r = drape("train --config " + q(cfg) + " --epochs 1 --data " + q(data()) + " --out-dir " + q(out));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(out / "ckpt_epoch1.bin"));
  EXPECT_FALSE(fs::exists(out / "ckpt_epoch2.bin"));
  EXPECT_TRUE(fs::exists(out / "best.bin"));
  const std::string log = readText(out / "loss_log.csv");
  EXPECT_EQ(log.rfind("step,total,mask,normal,edge,face,angle,collision\n", 0), 0u);
  // 4 training frames in batches of 2.
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);
  const std::string saved = readText(out / "train_config.json");
  EXPECT_NE(saved.find("\"epochs\":1"), std::string::npos) << saved;
  EXPECT_NE(saved.find("\"batch_size\":2"), std::string::npos) << saved;

  const fs::path meshes = root() / "anim";
  const Result a = drape("animate --checkpoint " + q(out / "best.bin") + " --data " + q(data()) + " --split test" +
                         " --out-dir " + q(meshes));
  ASSERT_EQ(a.code, 0) << a.output;
  int count = 0;
  for (const auto& e : fs::directory_iterator(meshes)) count += e.path().extension() == ".obj";
  EXPECT_EQ(count, 1);

  const fs::path all = root() / "anim_all";
  ASSERT_EQ(drape("animate --checkpoint " + q(out / "best.bin") + " --data " + q(data()) + " --out-dir " + q(all)).code,
            0);
  const fs::path metrics = root() / "metrics";
  const Result e = drape("eval --pred " + q(all) + " --gt " + q(data() / "gt") + " --samples 500 --out-dir " +
                         q(metrics));
  ASSERT_EQ(e.code, 0) << e.output;
  EXPECT_NE(e.output.find("seq CD"), std::string::npos) << e.output;
  const std::string perFrame = readText(metrics / "metrics.csv");
  EXPECT_EQ(perFrame.rfind("sequence_id,frame,CD_cm,CCV_cm\nseq,0,", 0), 0u) << perFrame;
  EXPECT_EQ(readText(metrics / "summary.csv").rfind("subject,CD_cm,CCV_cm\nseq,", 0), 0u);

  const Result random = drape("animate --checkpoint " + q(out / "best.bin") + " --data " + q(data()) +
                              " --random-frames 2 --out-dir " + q(root() / "anim_random"));
  EXPECT_EQ(random.code, 0) << random.output;
  EXPECT_TRUE(fs::exists(root() / "anim_random" / "0001.obj"));
}

TEST_F(Cli, EvalMismatchedCountsIsRuntimeError) {
  const fs::path few = root() / "few";
  fs::create_directories(few);
  fs::copy_file(data() / "gt" / "0000.obj", few / "0000.obj");
  const Result r = drape("eval --pred " + q(few) + " --gt " + q(data() / "gt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("mismatch"), std::string::npos) << r.output;
}

TEST_F(Cli, EvalIdenticalIsZero) {
  const Result r = drape("eval --pred " + q(data() / "gt") + " --gt " + q(data() / "gt") + " --samples 500");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("seq CD 0.000"), std::string::npos) << r.output;
}

TEST_F(Cli, TrainOnMissingDataIsRuntimeError) {
  const fs::path empty = root() / "empty";
  fs::create_directories(empty);
  const Result r = drape("train --data " + q(empty) + " --out-dir " + q(root() / "never"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("error"), std::string::npos) << r.output;
}

TEST_F(Cli, RenderWritesPng) {
  const Result r = drape("render --mesh " + q(data() / "gt" / "0002.obj") + " --kind mask --size 24 --out-dir " +
                         q(root() / "img"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(root() / "img" / "mask.png"));
  const Result d = drape("render --mesh " + q(data() / "gt" / "0002.obj") +
                         " --kind descriptor --camera 1 0 0 --size 24 --name d.png --out-dir " + q(root() / "img"));
  ASSERT_EQ(d.code, 0) << d.output;
  EXPECT_TRUE(fs::exists(root() / "img" / "d.png"));
  EXPECT_EQ(drape("render --mesh " + q(data() / "gt" / "0002.obj") + " --kind depth --out-dir " + q(root())).code, 2);
}

TEST(CliGradcheck, DefaultScenePasses) {
  TempDir dir;
  const Result r = drape("gradcheck --tolerance 1e-4 --budget 60 --out-dir " + q(dir.path()));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(readText(dir / "gradcheck.csv").rfind("check,param,index,analytic,numeric,rel_err\n", 0), 0u);
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos) << r.output;
}

TEST(CliGradcheck, ImpossibleToleranceFails) {
  const Result r = drape("gradcheck --tolerance 1e-14 --raster-tolerance 1e-14 --budget 10");
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_NE(r.output.find("FAIL"), std::string::npos);
}

}  // namespace
