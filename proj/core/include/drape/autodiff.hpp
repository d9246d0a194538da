#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "drape/common.hpp"

/// Tensor-level reverse-mode differentiation.
///
/// A Tape records every operation of one forward evaluation. Each recorded
/// node keeps its value and, when any input requires a gradient, an adjoint
/// closure that maps the node's upstream gradient onto its inputs. Operations
/// are coarse (a dense layer, a whole skinning pass, a full rasterization) so
/// the tape stays short and every adjoint is written by hand.
namespace drape::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shapeString(const Shape& shape);

class Tape;

/// Handle to a tape node. Cheap to copy; valid while its Tape lives.
class Var {
 public:
  Var() = default;

  [[nodiscard]] std::span<const double> value() const;
  [[nodiscard]] const Shape& shape() const;
  [[nodiscard]] std::size_t size() const { return value().size(); }
  /// Value of a single-element node.
  [[nodiscard]] double item() const;
  [[nodiscard]] bool requiresGrad() const;
  [[nodiscard]] Tape& tape() const { return *tape_; }
  [[nodiscard]] std::uint32_t id() const { return id_; }
  [[nodiscard]] bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Adjoint of one recorded op. Receives the gradient flowing into the op's
/// output and accumulates into its inputs through `Tape::accumulate`.
using Backprop = std::function<void(std::span<const double> upstream, Tape& tape)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf viewing caller-owned storage; the storage must outlive
  /// the tape.
  Var variable(std::span<const double> borrowed, Shape shape);
  Var variable(std::vector<double> owned, Shape shape);
  /// Non-trainable leaf.
  Var constant(std::span<const double> borrowed, Shape shape);
  Var constant(std::vector<double> owned, Shape shape);
  Var scalar(double v) { return constant(std::vector<double>{v}, Shape{1}); }

  /// Records an operation result. The adjoint is kept only if some input
  /// requires a gradient.
  Var record(std::vector<double> value, Shape shape, std::initializer_list<Var> inputs,
             Backprop backprop);
  Var record(std::vector<double> value, Shape shape, std::span<const Var> inputs,
             Backprop backprop);

  /// Adds `g` into the gradient of `target` (no-op for constants).
  void accumulate(Var target, std::span<const double> g);
  /// Mutable gradient buffer of `target`, allocated on first use; empty for
  /// constants. Adjoints use this to scatter sparse contributions.
  std::span<double> gradBuffer(Var target);

  /// Reverse sweep from a single-element root. Clears previous gradients
  /// first, so repeated calls produce identical results.
  void backward(Var root);

  /// Gradient of `v` from the last backward pass (zeros if unreached).
  [[nodiscard]] std::vector<double> gradient(Var v) const;

  [[nodiscard]] std::size_t nodeCount() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    std::vector<double> owned;
    std::span<const double> value;
    Shape shape;
    bool requiresGrad = false;
    std::vector<double> grad;
    Backprop backprop;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
};

}  // namespace drape::ad
