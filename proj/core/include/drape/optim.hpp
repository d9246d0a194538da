#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drape/autodiff.hpp"

namespace drape {

/// One named trainable tensor, stored flat in row-major order.
struct Param {
  std::string name;
  ad::Shape shape;
  std::vector<double> value;
};

/// Ordered collection of uniquely named trainable tensors.
class ParamSet {
 public:
  /// Appends a tensor; throws if the name is taken or the size disagrees
  /// with the shape.
  Param& add(std::string name, ad::Shape shape, std::vector<double> value);

  [[nodiscard]] std::size_t size() const { return params_.size(); }
  [[nodiscard]] bool empty() const { return params_.empty(); }
  [[nodiscard]] Param& operator[](std::size_t i) { return params_[i]; }
  [[nodiscard]] const Param& operator[](std::size_t i) const { return params_[i]; }
  [[nodiscard]] bool contains(std::string_view name) const;
  /// Throws if absent.
  [[nodiscard]] Param& at(std::string_view name);
  [[nodiscard]] const Param& at(std::string_view name) const;
  [[nodiscard]] std::size_t indexOf(std::string_view name) const;
  /// Total number of scalars.
  [[nodiscard]] std::size_t scalarCount() const;

  [[nodiscard]] auto begin() { return params_.begin(); }
  [[nodiscard]] auto end() { return params_.end(); }
  [[nodiscard]] auto begin() const { return params_.begin(); }
  [[nodiscard]] auto end() const { return params_.end(); }

 private:
  std::vector<Param> params_;
};

/// Gradients aligned index-for-index with a ParamSet.
struct GradRecord {
  std::vector<std::vector<double>> grads;

  static GradRecord zerosLike(const ParamSet& params);
  /// this += other (same layout).
  void add(const GradRecord& other);
  void scale(double factor);
};

/// Registers every parameter as a trainable leaf borrowing its storage.
std::vector<ad::Var> bindParams(ad::Tape& tape, const ParamSet& params);
/// Same, as non-trainable constants.
std::vector<ad::Var> bindConstants(ad::Tape& tape, const ParamSet& params);
/// Reads the gradients of bound parameters after `tape.backward`.
GradRecord collectGradients(const ad::Tape& tape, std::span<const ad::Var> vars);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zerosLike(const ParamSet& params);
};

/// One bias-corrected Adam update. Throws on a non-finite gradient, naming
/// the parameter, before anything is modified.
void adamStep(ParamSet& params, const GradRecord& grads, AdamState& state, double lr);

/// Rounds every parameter value to the nearest float.
void roundToSingle(ParamSet& params);

}  // namespace drape
