#pragma once

#include <span>

#include "drape/autodiff.hpp"

/// Generic differentiable tensor operations.
namespace drape::ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
/// Elementwise product of equal-shaped tensors.
Var mul(Var a, Var b);
Var relu(Var a);
/// Same data, new shape (element counts must agree).
Var reshape(Var a, Shape shape);

/// Sum of all elements, shape [1].
Var sum(Var a);
/// Sum of squared elements, shape [1].
Var sumSquares(Var a);
/// Euclidean (Frobenius) norm, shape [1]. The adjoint at the origin is 0.
Var l2Norm(Var a);
/// Σ w_i · s_i over single-element nodes.
Var linearCombination(std::span<const Var> scalars, std::span<const double> weights);

/// Row-batched affine layer: x [R x in] (or [in]), w [in x out], b [out]
/// (may be invalid for no bias). Result [R x out].
Var dense(Var x, Var w, Var b);

/// Concatenates [R x c_k] blocks along columns.
Var concatColumns(std::span<const Var> blocks);
/// Flattens and concatenates arbitrary tensors into one vector.
Var concatFlat(std::span<const Var> parts);

}  // namespace drape::ad
