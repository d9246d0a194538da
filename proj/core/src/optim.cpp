#include "drape/optim.hpp"

#include <cmath>

namespace drape {

Param& ParamSet::add(std::string name, ad::Shape shape, std::vector<double> value) {
  if (contains(name)) throw Error("duplicate parameter name '" + name + "'");
  if (ad::numel(shape) != value.size()) {
    throw Error("parameter '" + name + "': " + std::to_string(value.size()) + " values for shape " +
                ad::shapeString(shape));
  }
  params_.push_back(Param{std::move(name), std::move(shape), std::move(value)});
  return params_.back();
}

bool ParamSet::contains(std::string_view name) const {
  for (const Param& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

std::size_t ParamSet::indexOf(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw Error("no parameter named '" + std::string(name) + "'");
}

Param& ParamSet::at(std::string_view name) { return params_[indexOf(name)]; }
const Param& ParamSet::at(std::string_view name) const { return params_[indexOf(name)]; }

std::size_t ParamSet::scalarCount() const {
  std::size_t n = 0;
  for (const Param& p : params_) n += p.value.size();
  return n;
}

GradRecord GradRecord::zerosLike(const ParamSet& params) {
  GradRecord r;
  for (const Param& p : params) r.grads.emplace_back(p.value.size(), 0.0);
  return r;
}

void GradRecord::add(const GradRecord& other) {
  if (other.grads.size() != grads.size()) throw Error("gradient records differ in length");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (other.grads[i].size() != grads[i].size()) throw Error("gradient records differ in shape");
    for (std::size_t j = 0; j < grads[i].size(); ++j) grads[i][j] += other.grads[i][j];
  }
}

void GradRecord::scale(double factor) {
  for (auto& g : grads) {
    for (double& x : g) x *= factor;
  }
}

std::vector<ad::Var> bindParams(ad::Tape& tape, const ParamSet& params) {
  std::vector<ad::Var> vars;
  vars.reserve(params.size());
  for (const Param& p : params) vars.push_back(tape.variable(std::span<const double>(p.value), p.shape));
  return vars;
}

std::vector<ad::Var> bindConstants(ad::Tape& tape, const ParamSet& params) {
  std::vector<ad::Var> vars;
  vars.reserve(params.size());
  for (const Param& p : params) vars.push_back(tape.constant(std::span<const double>(p.value), p.shape));
  return vars;
}

GradRecord collectGradients(const ad::Tape& tape, std::span<const ad::Var> vars) {
  GradRecord r;
  r.grads.reserve(vars.size());
  for (const ad::Var& v : vars) r.grads.push_back(tape.gradient(v));
  return r;
}

AdamState AdamState::zerosLike(const ParamSet& params) {
  AdamState s;
  for (const Param& p : params) {
    s.m.emplace_back(p.value.size(), 0.0);
    s.v.emplace_back(p.value.size(), 0.0);
  }
  return s;
}

void adamStep(ParamSet& params, const GradRecord& grads, AdamState& state, double lr) {
  if (grads.grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw Error("adam: gradient/state layout does not match parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = grads.grads[i];
    if (g.size() != params[i].value.size() || state.m[i].size() != g.size() || state.v[i].size() != g.size()) {
      throw Error("adam: shape mismatch for parameter '" + params[i].name + "'");
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!std::isfinite(g[j])) {
        throw Error("adam: non-finite gradient in parameter '" + params[i].name + "' at element " +
                    std::to_string(j));
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value;
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads.grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

void roundToSingle(ParamSet& params) {
  for (Param& p : params) {
    for (double& x : p.value) x = static_cast<double>(static_cast<float>(x));
  }
}

}  // namespace drape
