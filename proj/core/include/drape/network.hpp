#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drape/autodiff.hpp"
#include "drape/garment.hpp"
#include "drape/optim.hpp"

namespace drape {

struct NetConfig {
  int hypothesisCount = 3;
  std::vector<int> embeddingWidths{256, 256, 512, 512};
  int fusionHidden = 32;
  double initStd = 0.02;
  std::uint64_t seed = 0;

  /// Throws on hypothesisCount outside 1..6 or non-positive widths.
  void validate() const;
  [[nodiscard]] int embeddingSize() const { return embeddingWidths.back(); }
};

inline constexpr int kMaxHypotheses = 6;

/// Pose embedding MLP, residual hypothesis fields and per-vertex fusion MLP.
///
/// Parameter layout in `params`:
///   mlp1.{l}.weight [in x out], mlp1.{l}.bias [out]
///   hyp.{k}.G [x x N x 3], hyp.{k}.b [N x 3]
///   mlp2.0.weight [3h x hidden], mlp2.0.bias [hidden]
///   mlp2.1.weight [hidden x 3], mlp2.1.bias [3]
struct DeformationNet {
  NetConfig config;
  Index vertexCount = 0;
  ParamSet params;

  /// Throws if the layout does not match config and vertexCount, or if any
  /// value is non-finite.
  void validate() const;
};

/// Weights from a normal distribution truncated at ±2·initStd, biases zero.
DeformationNet initParams(const NetConfig& config, Index vertexCount);

/// Empty parameter layout with every tensor zero.
DeformationNet zeroParams(const NetConfig& config, Index vertexCount);

/// Bound view of the network's parameters on a tape, in ParamSet order.
struct NetVars {
  const NetConfig* config = nullptr;
  Index vertexCount = 0;
  std::span<const ad::Var> vars;
};

namespace ad {

/// X = relu(mlp1(θ)). theta has shape [72].
Var embedPose(const NetVars& net, Var theta);
/// D_1 = relu(X G_1 + b_1), D_k = relu(D_{k-1} + X G_k + b_k); each [N x 3].
std::vector<Var> hypothesize(const NetVars& net, Var embedding);
/// Per-vertex mlp2 over the concatenated hypotheses. [N x 3]
Var fuse(const NetVars& net, std::span<const Var> hypotheses);
Var predictDisplacement(const NetVars& net, Var theta);

}  // namespace ad

std::vector<double> embedPose(const DeformationNet& net, std::span<const double> theta);
std::vector<Points> hypothesize(const DeformationNet& net, std::span<const double> embedding);
Displacement fuse(const DeformationNet& net, std::span<const Points> hypotheses);
/// Pure function of (parameters, θ); runs the same code as the taped path.
Displacement predictDisplacement(const DeformationNet& net, std::span<const double> theta);

}  // namespace drape
