#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "drape/autodiff.hpp"
#include "drape/optim.hpp"

namespace drape {

/// Builds a scalar loss on `tape` from the bound parameters (ParamSet order).
using TapedLoss = std::function<ad::Var(ad::Tape& tape, std::span<const ad::Var> params)>;

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Coordinates compared; every coordinate when the set is smaller.
  int budget = 200;
  std::uint64_t seed = 0;
};

struct GradcheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relErr = 0.0;
};

struct GradcheckReport {
  double maxRelErr = 0.0;
  std::string worstParam;
  bool pass = true;
  std::vector<GradcheckEntry> entries;
};

/// Compares reverse-mode gradients with central differences
/// (f(p + h) - f(p - h)) / 2h on a deterministic sample of coordinates.
/// Relative error is |a - n| / max(|a|, |n|, 1e-8). `params` is restored.
GradcheckReport gradcheck(const TapedLoss& loss, ParamSet& params, const GradcheckOptions& options = {});

}  // namespace drape
