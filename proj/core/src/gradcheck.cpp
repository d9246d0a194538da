#include "drape/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace drape {

namespace {

double evaluate(const TapedLoss& loss, const ParamSet& params) {
  ad::Tape tape;
  const auto vars = bindConstants(tape, params);
  const ad::Var out = loss(tape, vars);
  if (out.size() != 1) throw Error("gradcheck: loss is not a scalar");
  return out.item();
}

/// (tensor, element) pairs: one random element per tensor, then uniform
/// draws without replacement over all scalars.
std::vector<std::pair<std::size_t, std::size_t>> sampleCoordinates(const ParamSet& params, int budget,
                                                                   std::uint64_t seed) {
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const Param& p : params) {
    offsets.push_back(total);
    total += p.value.size();
  }
  auto locate = [&](std::size_t flat) {
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
    const auto t = static_cast<std::size_t>(it - offsets.begin()) - 1;
    return std::pair{t, flat - offsets[t]};
  };
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (total <= static_cast<std::size_t>(std::max(budget, 0))) {
    for (std::size_t f = 0; f < total; ++f) out.push_back(locate(f));
    return out;
  }
  std::mt19937_64 rng(seed);
  std::set<std::size_t> chosen;
  for (std::size_t t = 0; t < params.size() && chosen.size() < static_cast<std::size_t>(budget); ++t) {
    if (params[t].value.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, params[t].value.size() - 1);
    chosen.insert(offsets[t] + pick(rng));
  }
  std::uniform_int_distribution<std::size_t> any(0, total - 1);
  while (chosen.size() < static_cast<std::size_t>(budget)) chosen.insert(any(rng));
  for (std::size_t f : chosen) out.push_back(locate(f));
  return out;
}

}  // namespace

GradcheckReport gradcheck(const TapedLoss& loss, ParamSet& params, const GradcheckOptions& options) {
  if (!(options.step > 0.0)) throw Error("gradcheck: step must be positive");
  GradRecord analytic;
  {
    ad::Tape tape;
    const auto vars = bindParams(tape, params);
    const ad::Var out = loss(tape, vars);
    tape.backward(out);
    analytic = collectGradients(tape, vars);
  }

  GradcheckReport report;
  for (const auto& [t, i] : sampleCoordinates(params, options.budget, options.seed)) {
    double& x = params[t].value[i];
    const double saved = x;
    x = saved + options.step;
    const double up = evaluate(loss, params);
    x = saved - options.step;
    const double down = evaluate(loss, params);
    x = saved;

    GradcheckEntry e;
    e.param = params[t].name;
    e.index = i;
    e.analytic = analytic.grads[t][i];
    e.numeric = (up - down) / (2.0 * options.step);
    const double denom = std::max({std::abs(e.analytic), std::abs(e.numeric), 1e-8});
    e.relErr = std::abs(e.analytic - e.numeric) / denom;
    if (!std::isfinite(e.relErr)) e.relErr = std::numeric_limits<double>::infinity();
    if (report.entries.empty() || e.relErr > report.maxRelErr) {
      report.maxRelErr = e.relErr;
      report.worstParam = e.param;
    }
    report.entries.push_back(std::move(e));
  }
  report.pass = report.maxRelErr < options.tolerance;
  return report;
}

}  // namespace drape
