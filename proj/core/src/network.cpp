#include "drape/network.hpp"

#include <cmath>
#include <random>

#include "drape/ops.hpp"

namespace drape {

namespace {

std::string layerName(const char* block, int index, const char* field) {
  return std::string(block) + "." + std::to_string(index) + "." + field;
}

struct Layout {
  std::string name;
  ad::Shape shape;
  bool weight;
};

std::vector<Layout> layout(const NetConfig& c, Index n) {
  std::vector<Layout> out;
  std::size_t in = kPoseDim;
  for (std::size_t l = 0; l < c.embeddingWidths.size(); ++l) {
    const auto w = static_cast<std::size_t>(c.embeddingWidths[l]);
    out.push_back({layerName("mlp1", static_cast<int>(l), "weight"), {in, w}, true});
    out.push_back({layerName("mlp1", static_cast<int>(l), "bias"), {w}, false});
    in = w;
  }
  const auto x = static_cast<std::size_t>(c.embeddingSize());
  const auto nv = static_cast<std::size_t>(n);
  for (int k = 0; k < c.hypothesisCount; ++k) {
    out.push_back({layerName("hyp", k, "G"), {x, nv, 3}, true});
    out.push_back({layerName("hyp", k, "b"), {nv, 3}, false});
  }
  const auto h = static_cast<std::size_t>(c.fusionHidden);
  out.push_back({"mlp2.0.weight", {3 * static_cast<std::size_t>(c.hypothesisCount), h}, true});
  out.push_back({"mlp2.0.bias", {h}, false});
  out.push_back({"mlp2.1.weight", {h, 3}, true});
  out.push_back({"mlp2.1.bias", {3}, false});
  return out;
}

/// Index of the first hypothesis tensor in the layout.
std::size_t hypOffset(const NetConfig& c) { return 2 * c.embeddingWidths.size(); }
std::size_t fusionOffset(const NetConfig& c) {
  return hypOffset(c) + 2 * static_cast<std::size_t>(c.hypothesisCount);
}

void checkVars(const NetVars& net) {
  if (net.config == nullptr) throw Error("network: missing config");
  const std::size_t expected = fusionOffset(*net.config) + 4;
  if (net.vars.size() != expected) {
    throw Error("network: expected " + std::to_string(expected) + " parameter tensors, got " +
                std::to_string(net.vars.size()));
  }
}

NetVars view(const DeformationNet& net, const std::vector<ad::Var>& vars) {
  return NetVars{&net.config, net.vertexCount, vars};
}

}  // namespace

void NetConfig::validate() const {
  if (hypothesisCount < 1 || hypothesisCount > kMaxHypotheses) {
    throw Error("hypothesis_count must be in 1.." + std::to_string(kMaxHypotheses) + ", got " +
                std::to_string(hypothesisCount));
  }
  if (embeddingWidths.empty()) throw Error("embedding_widths must not be empty");
  for (int w : embeddingWidths) {
    if (w <= 0) throw Error("embedding widths must be positive");
  }
  if (fusionHidden <= 0) throw Error("fusion_hidden must be positive");
  if (!(initStd >= 0.0) || !std::isfinite(initStd)) throw Error("init_std must be finite and >= 0");
}

void DeformationNet::validate() const {
  config.validate();
  if (vertexCount <= 0) throw Error("network vertex count must be positive");
  const auto expected = layout(config, vertexCount);
  if (expected.size() != params.size()) {
    throw Error("network has " + std::to_string(params.size()) + " tensors, expected " +
                std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (params[i].name != expected[i].name || params[i].shape != expected[i].shape) {
      throw Error("network tensor " + std::to_string(i) + " is '" + params[i].name + "' " +
                  ad::shapeString(params[i].shape) + ", expected '" + expected[i].name + "' " +
                  ad::shapeString(expected[i].shape));
    }
    for (double v : params[i].value) {
      if (!std::isfinite(v)) throw Error("non-finite value in parameter '" + params[i].name + "'");
    }
  }
}

DeformationNet zeroParams(const NetConfig& config, Index vertexCount) {
  config.validate();
  if (vertexCount <= 0) throw Error("network vertex count must be positive");
  DeformationNet net{config, vertexCount, {}};
  for (const Layout& l : layout(config, vertexCount)) {
    net.params.add(l.name, l.shape, std::vector<double>(ad::numel(l.shape), 0.0));
  }
  return net;
}

DeformationNet initParams(const NetConfig& config, Index vertexCount) {
  DeformationNet net = zeroParams(config, vertexCount);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto ls = layout(config, vertexCount);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (!ls[i].weight) continue;
    for (double& w : net.params[i].value) {
      double z = normal(rng);
      while (std::abs(z) > 2.0) z = normal(rng);
      w = config.initStd * z;
    }
  }
  return net;
}

namespace ad {

Var embedPose(const NetVars& net, Var theta) {
  checkVars(net);
  if (theta.size() != static_cast<std::size_t>(kPoseDim)) {
    throw Error("embed_pose: theta must have " + std::to_string(kPoseDim) + " values, got " +
                std::to_string(theta.size()));
  }
  for (double v : theta.value()) {
    if (!std::isfinite(v)) throw Error("embed_pose: non-finite theta");
  }
  Var h = theta;
  for (std::size_t l = 0; l < net.config->embeddingWidths.size(); ++l) {
    h = relu(dense(h, net.vars[2 * l], net.vars[2 * l + 1]));
  }
  return h;
}

std::vector<Var> hypothesize(const NetVars& net, Var embedding) {
  checkVars(net);
  const auto x = static_cast<std::size_t>(net.config->embeddingSize());
  if (embedding.size() != x) {
    throw Error("hypothesize: embedding has " + std::to_string(embedding.size()) + " values, expected " +
                std::to_string(x));
  }
  const auto n = static_cast<std::size_t>(net.vertexCount);
  const std::size_t base = hypOffset(*net.config);
  std::vector<Var> out;
  for (int k = 0; k < net.config->hypothesisCount; ++k) {
    Var g = reshape(net.vars[base + 2 * static_cast<std::size_t>(k)], Shape{x, 3 * n});
    Var b = reshape(net.vars[base + 2 * static_cast<std::size_t>(k) + 1], Shape{3 * n});
    Var pre = reshape(dense(embedding, g, b), Shape{n, 3});
    if (k > 0) pre = add(out.back(), pre);
    out.push_back(relu(pre));
  }
  return out;
}

Var fuse(const NetVars& net, std::span<const Var> hypotheses) {
  checkVars(net);
  if (hypotheses.size() != static_cast<std::size_t>(net.config->hypothesisCount)) {
    throw Error("fuse: expected " + std::to_string(net.config->hypothesisCount) + " hypotheses, got " +
                std::to_string(hypotheses.size()));
  }
  const auto n = static_cast<std::size_t>(net.vertexCount);
  for (const Var& d : hypotheses) {
    if (d.shape() != Shape{n, 3}) throw Error("fuse: hypothesis shape " + shapeString(d.shape()));
  }
  const std::size_t base = fusionOffset(*net.config);
  Var stacked = hypotheses.size() == 1 ? hypotheses[0] : concatColumns(hypotheses);
  Var hidden = relu(dense(stacked, net.vars[base], net.vars[base + 1]));
  return dense(hidden, net.vars[base + 2], net.vars[base + 3]);
}

Var predictDisplacement(const NetVars& net, Var theta) {
  const Var x = embedPose(net, theta);
  const auto d = hypothesize(net, x);
  return fuse(net, d);
}

}  // namespace ad

std::vector<double> embedPose(const DeformationNet& net, std::span<const double> theta) {
  ad::Tape tape;
  const auto vars = bindConstants(tape, net.params);
  const auto x = ad::embedPose(view(net, vars), tape.constant(theta, ad::Shape{theta.size()}));
  return {x.value().begin(), x.value().end()};
}

namespace {

Points toPoints(std::span<const double> flat) {
  Points p(static_cast<Index>(flat.size() / 3), 3);
  std::copy(flat.begin(), flat.end(), p.data());
  return p;
}

}  // namespace

std::vector<Points> hypothesize(const DeformationNet& net, std::span<const double> embedding) {
  ad::Tape tape;
  const auto vars = bindConstants(tape, net.params);
  const auto d = ad::hypothesize(view(net, vars), tape.constant(embedding, ad::Shape{embedding.size()}));
  std::vector<Points> out;
  for (const auto& v : d) out.push_back(toPoints(v.value()));
  return out;
}

Displacement fuse(const DeformationNet& net, std::span<const Points> hypotheses) {
  ad::Tape tape;
  const auto vars = bindConstants(tape, net.params);
  std::vector<ad::Var> d;
  for (const Points& p : hypotheses) {
    d.push_back(tape.constant(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                              ad::Shape{static_cast<std::size_t>(p.rows()), 3}));
  }
  return toPoints(ad::fuse(view(net, vars), d).value());
}

Displacement predictDisplacement(const DeformationNet& net, std::span<const double> theta) {
  ad::Tape tape;
  const auto vars = bindConstants(tape, net.params);
  const auto out = ad::predictDisplacement(view(net, vars), tape.constant(theta, ad::Shape{theta.size()}));
  return toPoints(out.value());
}

}  // namespace drape
