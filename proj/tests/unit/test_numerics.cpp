#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "drape/geometry_ops.hpp"
#include "drape/gradcheck.hpp"
#include "drape/loss.hpp"
#include "drape/ops.hpp"
#include "drape/optim.hpp"
#include "drape/procedural.hpp"
#include "drape/render.hpp"
#include "drape/synthetic.hpp"
#include "drape/train.hpp"
#include "helpers.hpp"

using namespace drape;

namespace {

std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = u(rng);
  return out;
}

std::vector<double> flat(const Points& p) { return {p.data(), p.data() + p.size()}; }

/// Reduces any node to a scalar through a fixed random projection, so the
/// check covers the full Jacobian rather than only its column sums.
ad::Var project(ad::Var out, std::uint64_t seed) {
  ad::Tape& tape = out.tape();
  const ad::Var w = tape.constant(uniform(out.size(), seed, 0.5, 1.5), out.shape());
  return ad::sum(ad::mul(out, w));
}

using Body = std::function<ad::Var(std::span<const ad::Var>)>;

GradcheckReport check(ParamSet params, const Body& body, double step = 1e-5, int budget = 400) {
  const TapedLoss loss = [&](ad::Tape&, std::span<const ad::Var> vars) { return project(body(vars), 99); };
  GradcheckOptions o;
  o.step = step;
  o.tolerance = 1e-6;
  o.budget = budget;
  return gradcheck(loss, params, o);
}

std::string worst(const GradcheckReport& r) {
  for (const GradcheckEntry& e : r.entries) {
    if (e.relErr == r.maxRelErr) {
      return "[" + std::to_string(e.index) + "] analytic " + std::to_string(e.analytic) + " numeric " +
             std::to_string(e.numeric);
    }
  }
  return {};
}

#define EXPECT_ADJOINT(report)                                                                       \
  do {                                                                                               \
    const GradcheckReport r_ = (report);                                                             \
    EXPECT_TRUE(r_.pass) << "max rel err " << r_.maxRelErr << " in " << r_.worstParam << worst(r_); \
    EXPECT_FALSE(r_.entries.empty());                                                                \
  } while (0)

/// Values bounded away from the rectifier kink.
std::vector<double> awayFromZero(std::size_t n, std::uint64_t seed) {
  auto v = uniform(n, seed, 0.1, 1.0);
  std::mt19937_64 rng(seed + 1);
  for (double& x : v) {
    if (rng() % 2) x = -x;
  }
  return v;
}

Points bumpySphere(std::uint64_t seed) {
  const TriMesh s = procedural::icosphere(1);
  return s.vertices + test::randomPoints(s.vertexCount(), seed, 0.05);
}

ad::Var asVar(ad::Tape& tape, const Points& p) {
  return tape.constant(flat(p), ad::Shape{static_cast<std::size_t>(p.rows()), 3});
}

}  // namespace

TEST(Backward, SumOfSquaresGivesTwiceP) {
  ParamSet params;
  params.add("p", {4}, {1.0, -2.0, 0.5, 3.0});
  ad::Tape tape;
  const auto vars = bindParams(tape, params);
  tape.backward(ad::sumSquares(vars[0]));
  EXPECT_EQ(tape.gradient(vars[0]), (std::vector<double>{2.0, -4.0, 1.0, 6.0}));
}

TEST(Backward, ConstantAndUnreachableGiveZero) {
  ParamSet params;
  params.add("used", {2}, {1.0, 2.0});
  params.add("unused", {3}, {1.0, 2.0, 3.0});
  ad::Tape tape;
  const auto vars = bindParams(tape, params);
  tape.backward(tape.scalar(5.0));
  EXPECT_EQ(collectGradients(tape, vars).grads[0], (std::vector<double>{0.0, 0.0}));
  tape.backward(ad::sum(vars[0]));
  const GradRecord g = collectGradients(tape, vars);
  EXPECT_EQ(g.grads[0], (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(g.grads[1], (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Backward, NonScalarRootRejected) {
  ParamSet params;
  params.add("p", {2}, {1.0, 2.0});
  ad::Tape tape;
  const auto vars = bindParams(tape, params);
  EXPECT_THROW(tape.backward(vars[0]), Error);
  ad::Tape other;
  EXPECT_THROW(other.backward(ad::sum(vars[0])), Error);
}

TEST(Backward, RepeatedSweepIsBitwiseIdentical) {
  ParamSet params;
  params.add("w", {4, 3}, uniform(12, 1));
  params.add("x", {2, 4}, uniform(8, 2));
  ad::Tape tape;
  const auto vars = bindParams(tape, params);
  const ad::Var loss = ad::l2Norm(ad::relu(ad::dense(vars[1], vars[0], ad::Var{})));
  tape.backward(loss);
  const GradRecord first = collectGradients(tape, vars);
  tape.backward(loss);
  const GradRecord second = collectGradients(tape, vars);
  EXPECT_EQ(first.grads, second.grads);
}

TEST(Backward, GradientOfSumIsSumOfGradients) {
  ParamSet params;
  params.add("p", {5}, uniform(5, 3));
  auto gradOf = [&](int which) {
    ad::Tape tape;
    const auto vars = bindParams(tape, params);
    const ad::Var f = ad::sumSquares(vars[0]);
    const ad::Var g = ad::l2Norm(ad::scale(vars[0], 3.0));
    const ad::Var root = which == 0 ? f : which == 1 ? g : ad::add(f, g);
    tape.backward(root);
    return collectGradients(tape, vars).grads[0];
  };
  const auto a = gradOf(0);
  const auto b = gradOf(1);
  const auto ab = gradOf(2);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(ab[i], a[i] + b[i], 1e-15);
}

TEST(Backward, SharedNodeAccumulates) {
  ParamSet params;
  params.add("p", {1}, {3.0});
  ad::Tape tape;
  const auto vars = bindParams(tape, params);
  // p * p + p: d/dp = 2p + 1 = 7.
  tape.backward(ad::sum(ad::add(ad::mul(vars[0], vars[0]), vars[0])));
  EXPECT_EQ(tape.gradient(vars[0]), std::vector<double>{7.0});
}

TEST(Adjoint, ElementwiseOps) {
  ParamSet params;
  params.add("a", {3, 4}, awayFromZero(12, 10));
  params.add("b", {3, 4}, awayFromZero(12, 11));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::add(v[0], v[1]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::sub(v[0], v[1]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::scale(v[0], -2.5); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::mul(v[0], v[1]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::relu(v[0]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::reshape(v[1], ad::Shape{2, 6}); }));
}

TEST(Adjoint, Reductions) {
  ParamSet params;
  params.add("a", {7}, uniform(7, 12));
  params.add("b", {1}, {0.3});
  params.add("c", {1}, {-1.7});
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::sum(v[0]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::sumSquares(v[0]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::l2Norm(v[0]); }));
  EXPECT_ADJOINT(check(params, [](auto v) {
    const std::vector<ad::Var> s{v[1], v[2], ad::sum(v[0])};
    const std::vector<double> w{2.0, -0.5, 0.25};
    return ad::linearCombination(s, w);
  }));
}

TEST(Adjoint, L2NormAtOriginIsZero) {
  ParamSet params;
  params.add("z", {3}, {0.0, 0.0, 0.0});
  ad::Tape tape;
  const auto vars = bindParams(tape, params);
  tape.backward(ad::l2Norm(vars[0]));
  EXPECT_EQ(tape.gradient(vars[0]), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Adjoint, DenseAndConcat) {
  ParamSet params;
  params.add("x", {4, 5}, uniform(20, 13));
  params.add("w", {5, 3}, uniform(15, 14));
  params.add("b", {3}, uniform(3, 15));
  params.add("y", {4, 2}, uniform(8, 16));
  params.add("v", {5}, uniform(5, 17));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::dense(v[0], v[1], v[2]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::dense(v[4], v[1], v[2]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::dense(v[0], v[1], ad::Var{}); }));
  EXPECT_ADJOINT(check(params, [](auto v) {
    const std::vector<ad::Var> blocks{v[0], v[3]};
    return ad::concatColumns(blocks);
  }));
  EXPECT_ADJOINT(check(params, [](auto v) {
    const std::vector<ad::Var> parts{v[2], v[3], v[1]};
    return ad::concatFlat(parts);
  }));
}

TEST(Adjoint, Rodrigues) {
  ParamSet params;
  params.add("aa", {5, 3}, uniform(15, 18, -1.5, 1.5));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::rodrigues(v[0]); }));
  ParamSet tiny;
  tiny.add("aa", {2, 3}, {1e-9, -2e-9, 5e-10, 0.0, 0.0, 0.0});
  EXPECT_ADJOINT(check(tiny, [](auto v) { return ad::rodrigues(v[0]); }, 1e-7));
}

TEST(Adjoint, RodriguesMatchesEigen) {
  const auto aa = uniform(12, 19, -2.0, 2.0);
  ad::Tape tape;
  const ad::Var r = ad::rodrigues(tape.constant(aa, ad::Shape{4, 3}));
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec3 w(aa[3 * k], aa[3 * k + 1], aa[3 * k + 2]);
    const Mat3 oracle = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
    for (int e = 0; e < 9; ++e) EXPECT_NEAR(r.value()[9 * k + static_cast<std::size_t>(e)], oracle(e / 3, e % 3), 1e-15);
  }
}

TEST(Adjoint, ForwardKinematics) {
  const std::vector<Index> parents{-1, 0, 1, 0, 3};
  ParamSet params;
  params.add("aa", {5, 3}, uniform(15, 20));
  params.add("joints", {5, 3}, uniform(15, 21));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::forwardKinematics(ad::rodrigues(v[0]), v[1], parents); }));
}

TEST(Adjoint, LinearBlendSkinning) {
  ParamSet params;
  params.add("v", {6, 3}, uniform(18, 22));
  params.add("w", {6, 4}, uniform(24, 23, 0.0, 1.0));
  params.add("a", {4, 12}, uniform(48, 24));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::linearBlendSkinning(v[0], v[1], v[2]); }));
}

TEST(Adjoint, MeshQuantities) {
  const TriMesh sphere = procedural::icosphere(1);
  const TopologyCache topo = buildTopology(sphere);
  ParamSet params;
  params.add("v", {static_cast<std::size_t>(sphere.vertexCount()), 3}, flat(bumpySphere(25)));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::edgeLengths(v[0], topo.edges); }));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::faceNormals(v[0], sphere.faces); }));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::vertexNormals(v[0], sphere.faces); }));
  EXPECT_ADJOINT(check(params, [&](auto v) {
    return ad::dihedralAngles(ad::faceNormals(v[0], sphere.faces), topo.dihedralPairs);
  }));
  EXPECT_ADJOINT(check(params, [&](auto v) {
    return ad::faceLaplacian(ad::faceNormals(v[0], sphere.faces), topo.faceAdjacency);
  }));
}

TEST(Adjoint, CollisionPenalty) {
  // Body: a jittered plane with +z normals. Garment: a sparser grid, some
  // vertices below the plane, some within ε above it, some beyond.
  const Points body = procedural::grid(6, 6, 0.1, 0.1).vertices + test::randomPoints(49, 26, 0.001);
  std::vector<Vec3> normals(49, Vec3(0, 0, 1));
  Points garment = procedural::grid(3, 3, 0.1, 0.1).vertices;
  garment.col(0).array() += 0.004;
  garment.col(1).array() += 0.003;
  const auto z = uniform(16, 27, -0.003, 0.006);
  for (Index i = 0; i < 16; ++i) garment(i, 2) = z[static_cast<std::size_t>(i)];
  ParamSet params;
  params.add("g", {16, 3}, flat(garment));
  ad::CollisionSettings s;
  ad::Tape probe;
  const double value = ad::collisionPenalty(asVar(probe, garment), body, normals, s).item();
  EXPECT_GT(value, 0.0);
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::collisionPenalty(v[0], body, normals, s); }));
}

TEST(Adjoint, Rasterizers) {
  TriMesh m;
  m.vertices.resize(4, 3);
  m.vertices << -0.5, -0.4, 0.1, 0.45, -0.5, 0.0, 0.0, 0.55, 0.2, 0.6, 0.5, -0.1;
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 1, 3, 2;
  Camera cam;
  cam.width = cam.height = 12;
  const double sharpness = 0.2;  // wider than a pixel, so FD stays accurate
  ParamSet params;
  params.add("v", {4, 3}, flat(m.vertices));
  params.add("n", {4, 3}, flat(test::randomPoints(4, 28)));
  params.add("d", {4, 2}, uniform(8, 29));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::rasterizeSilhouette(v[0], m.faces, cam, sharpness); }));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::rasterizeNormals(v[0], v[1], m.faces, cam, sharpness); }));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::rasterizeDescriptors(v[2], m.vertices, m.faces, cam); }));
}

TEST(Adjoint, ImageTerms) {
  ParamSet params;
  // A ramp keeps image gradients well away from zero at every pyramid level,
  // where the smoothed magnitude has curvature of order 1/e.
  auto img = uniform(192, 30, 0.0, 0.02);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) {
      for (std::size_t c = 0; c < 3; ++c) img[(y * 8 + x) * 3 + c] += 0.1 * x + 0.04 * (c + 1) * y;
    }
  }
  params.add("img", {8, 8, 3}, img);
  params.add("mask", {8, 8}, uniform(64, 31, 0.0, 1.0));
  Image gtMask(8, 8, 1, ImageKind::Mask);
  gtMask.data = uniform(64, 32, 0.0, 1.0);
  Image gtNormal(8, 8, 3, ImageKind::Normal);
  gtNormal.data = uniform(192, 33, 0.0, 1.0);
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::maskTerm(v[1], gtMask); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::pyramidDown(v[0]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::gradientMagnitude(v[0]); }));
  EXPECT_ADJOINT(check(params, [](auto v) { return ad::featureTransform(v[0]); }));
  EXPECT_ADJOINT(check(params, [&](auto v) { return ad::normalTerm(v[0], gtMask, gtNormal); }));
}

TEST(Adam, ZeroGradientLeavesParametersButCountsStep) {
  ParamSet params;
  params.add("p", {3}, {1.0, -2.0, 3.0});
  AdamState state = AdamState::zerosLike(params);
  adamStep(params, GradRecord::zerosLike(params), state, 1e-4);
  EXPECT_EQ(params[0].value, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepClosedForm) {
  ParamSet params;
  params.add("p", {1}, {0.5});
  AdamState state = AdamState::zerosLike(params);
  GradRecord g = GradRecord::zerosLike(params);
  g.grads[0][0] = 1.0;
  adamStep(params, g, state, 1e-4);
  // m̂ = 1, v̂ = 1, Δ = lr / (1 + eps).
  EXPECT_NEAR(0.5 - params[0].value[0], 1e-4 / (1.0 + 1e-8), 1e-16);
}

TEST(Adam, TwoIdenticalStepsHaveEqualMagnitude) {
  ParamSet params;
  params.add("p", {1}, {0.0});
  AdamState state = AdamState::zerosLike(params);
  GradRecord g = GradRecord::zerosLike(params);
  g.grads[0][0] = 1.0;
  adamStep(params, g, state, 1e-4);
  const double first = -params[0].value[0];
  adamStep(params, g, state, 1e-4);
  const double second = -params[0].value[0] - first;
  EXPECT_GT(first, 0.0);
  EXPECT_GT(second, 0.0);
  EXPECT_NEAR(second / first, 1.0, 0.01);
}

TEST(Adam, SignFlipGivesEqualMagnitude) {
  for (double grad : {0.3, 1e-3, 42.0}) {
    ParamSet a;
    a.add("p", {1}, {0.0});
    ParamSet b = a;
    AdamState sa = AdamState::zerosLike(a);
    AdamState sb = AdamState::zerosLike(b);
    GradRecord ga = GradRecord::zerosLike(a);
    GradRecord gb = GradRecord::zerosLike(b);
    ga.grads[0][0] = grad;
    gb.grads[0][0] = -grad;
    adamStep(a, ga, sa, 1e-3);
    adamStep(b, gb, sb, 1e-3);
    EXPECT_EQ(std::abs(a[0].value[0]), std::abs(b[0].value[0]));
    EXPECT_GT(std::abs(a[0].value[0]), 0.0);
  }
}

TEST(Adam, NonFiniteGradientNamesParameterAndLeavesState) {
  ParamSet params;
  params.add("first", {1}, {1.0});
  params.add("second", {2}, {1.0, 2.0});
  AdamState state = AdamState::zerosLike(params);
  GradRecord g = GradRecord::zerosLike(params);
  g.grads[0][0] = 1.0;
  g.grads[1][1] = std::nan("");
  try {
    adamStep(params, g, state, 1e-4);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("second"), std::string::npos) << e.what();
  }
  EXPECT_EQ(params[0].value[0], 1.0);
  EXPECT_EQ(state.step, 0);
}

TEST(ParamSetTest, NamesAreUniqueAndShapesChecked) {
  ParamSet p;
  p.add("a", {2, 2}, std::vector<double>(4, 0.0));
  EXPECT_THROW(p.add("a", {1}, {0.0}), Error);
  EXPECT_THROW(p.add("b", {3}, {0.0}), Error);
  EXPECT_THROW(static_cast<void>(p.at("missing")), Error);
  EXPECT_EQ(p.scalarCount(), 4u);
}

TEST(Gradcheck, QuadraticBowl) {
  ParamSet params;
  params.add("x", {6}, uniform(6, 40));
  const std::vector<double> scales{1.0, 2.0, 3.0, 0.5, 10.0, 0.1};
  const TapedLoss loss = [&](ad::Tape& tape, std::span<const ad::Var> v) {
    return ad::sum(ad::mul(ad::mul(v[0], v[0]), tape.constant(scales, ad::Shape{6})));
  };
  const GradcheckReport r = gradcheck(loss, params);
  EXPECT_LT(r.maxRelErr, 1e-8);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.entries.size(), 6u);
}

TEST(Gradcheck, LinearFunctionIsExactToRounding) {
  ParamSet params;
  params.add("x", {5}, uniform(5, 41));
  const TapedLoss loss = [](ad::Tape& tape, std::span<const ad::Var> v) {
    return ad::sum(ad::mul(v[0], tape.constant(std::vector<double>{1, -2, 3, 0.5, 4}, ad::Shape{5})));
  };
  const GradcheckReport r = gradcheck(loss, params);
  EXPECT_LT(r.maxRelErr, 1e-9);
}

TEST(Gradcheck, DetectsAWrongAdjoint) {
  ParamSet params;
  params.add("x", {3}, {0.5, 1.0, 1.5});
  const TapedLoss loss = [](ad::Tape& tape, std::span<const ad::Var> v) {
    const ad::Var x = v[0];
    std::vector<double> out{0.0};
    for (double e : x.value()) out[0] += e * e;
    // Claims d/dx = x instead of 2x.
    return tape.record(std::move(out), ad::Shape{1}, {x}, [x](std::span<const double> g, ad::Tape& t) {
      std::vector<double> gx(x.value().begin(), x.value().end());
      for (double& e : gx) e *= g[0];
      t.accumulate(x, gx);
    });
  };
  const GradcheckReport r = gradcheck(loss, params);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.worstParam, "x");
  EXPECT_NEAR(r.maxRelErr, 0.5, 1e-6);
}

TEST(Gradcheck, BudgetSamplingIsDeterministicAndRestoresParams) {
  ParamSet params;
  params.add("a", {300}, uniform(300, 42));
  params.add("b", {2}, {1.0, 2.0});
  const ParamSet before = params;
  const TapedLoss loss = [](ad::Tape&, std::span<const ad::Var> v) {
    return ad::add(ad::sumSquares(v[0]), ad::sumSquares(v[1]));
  };
  GradcheckOptions o;
  o.budget = 20;
  const GradcheckReport r1 = gradcheck(loss, params, o);
  const GradcheckReport r2 = gradcheck(loss, params, o);
  ASSERT_EQ(r1.entries.size(), 20u);
  bool sawB = false;
  for (std::size_t i = 0; i < r1.entries.size(); ++i) {
    EXPECT_EQ(r1.entries[i].param, r2.entries[i].param);
    EXPECT_EQ(r1.entries[i].index, r2.entries[i].index);
    sawB = sawB || r1.entries[i].param == "b";
  }
  EXPECT_TRUE(sawB) << "every tensor gets at least one coordinate";
  for (std::size_t i = 0; i < params.size(); ++i) EXPECT_EQ(params[i].value, before[i].value);
}

TEST(Gradcheck, FullObjectiveOnFiftyVertexRig) {
  CheckScene scene = checkScene(0);
  ASSERT_EQ(scene.rig.vertexCount(), 50);
  const TapedLoss loss = frameObjective(scene.frame, scene.net, scene.rig, scene.body, LossWeights{}, scene.sharpness);
  ParamSet params = trainableParams(scene.net, scene.rig);
  GradcheckOptions o;
  o.budget = 120;
  o.tolerance = 1e-4;
  const GradcheckReport r = gradcheck(loss, params, o);
  EXPECT_TRUE(r.pass) << "max rel err " << r.maxRelErr << " in " << r.worstParam;
}
