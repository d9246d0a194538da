#include "drape/autodiff.hpp"

#include <algorithm>
#include <sstream>

namespace drape::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << "]";
  return os.str();
}

std::span<const double> Var::value() const { return tape_->nodes_[id_].value; }
const Shape& Var::shape() const { return tape_->nodes_[id_].shape; }
bool Var::requiresGrad() const { return tape_->nodes_[id_].requiresGrad; }

double Var::item() const {
  const auto v = value();
  if (v.size() != 1) throw Error("item() on a node of shape " + shapeString(shape()));
  return v[0];
}

Var Tape::push(Node node) {
  if (numel(node.shape) != node.value.size()) {
    throw Error("tape node value size " + std::to_string(node.value.size()) +
                " does not match shape " + shapeString(node.shape));
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::variable(std::span<const double> borrowed, Shape shape) {
  Node n;
  n.value = borrowed;
  n.shape = std::move(shape);
  n.requiresGrad = true;
  return push(std::move(n));
}

Var Tape::variable(std::vector<double> owned, Shape shape) {
  Node n;
  n.owned = std::move(owned);
  n.value = n.owned;
  n.shape = std::move(shape);
  n.requiresGrad = true;
  return push(std::move(n));
}

Var Tape::constant(std::span<const double> borrowed, Shape shape) {
  Node n;
  n.value = borrowed;
  n.shape = std::move(shape);
  return push(std::move(n));
}

Var Tape::constant(std::vector<double> owned, Shape shape) {
  Node n;
  n.owned = std::move(owned);
  n.value = n.owned;
  n.shape = std::move(shape);
  return push(std::move(n));
}

Var Tape::record(std::vector<double> value, Shape shape, std::initializer_list<Var> inputs,
                 Backprop backprop) {
  return record(std::move(value), std::move(shape), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backprop));
}

Var Tape::record(std::vector<double> value, Shape shape, std::span<const Var> inputs,
                 Backprop backprop) {
  Node n;
  n.owned = std::move(value);
  n.value = n.owned;
  n.shape = std::move(shape);
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw Error("operation mixes nodes from different tapes");
    n.requiresGrad = n.requiresGrad || nodes_[in.id_].requiresGrad;
  }
  if (n.requiresGrad) n.backprop = std::move(backprop);
  return push(std::move(n));
}

std::span<double> Tape::gradBuffer(Var target) {
  Node& n = nodes_[target.id_];
  if (!n.requiresGrad) return {};
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::accumulate(Var target, std::span<const double> g) {
  auto buf = gradBuffer(target);
  if (buf.empty()) return;
  if (g.size() != buf.size()) {
    throw Error("gradient size " + std::to_string(g.size()) + " does not match node size " +
                std::to_string(buf.size()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw Error("backward root belongs to another tape");
  if (nodes_[root.id_].value.size() != 1) {
    throw Error("backward needs a scalar root, got shape " + shapeString(nodes_[root.id_].shape));
  }
  for (auto& n : nodes_) {
    n.grad.clear();
  }
  if (!nodes_[root.id_].requiresGrad) return;
  nodes_[root.id_].grad.assign(1, 1.0);
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backprop || n.grad.empty()) continue;
    n.backprop(n.grad, *this);
  }
}

std::vector<double> Tape::gradient(Var v) const {
  const Node& n = nodes_[v.id_];
  if (n.grad.empty()) return std::vector<double>(n.value.size(), 0.0);
  return n.grad;
}

}  // namespace drape::ad
