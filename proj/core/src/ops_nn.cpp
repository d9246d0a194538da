#include "drape/ops.hpp"

#include <cmath>

namespace drape::ad {

namespace {

void requireSameShape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(std::string(op) + ": shape mismatch " + shapeString(a.shape()) + " vs " +
                shapeString(b.shape()));
  }
}

}  // namespace

Var add(Var a, Var b) {
  requireSameShape(a, b, "add");
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return a.tape().record(std::move(out), a.shape(), {a, b}, [a, b](std::span<const double> g, Tape& t) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  requireSameShape(a, b, "sub");
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return a.tape().record(std::move(out), a.shape(), {a, b}, [a, b](std::span<const double> g, Tape& t) {
    t.accumulate(a, g);
    auto gb = t.gradBuffer(b);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
  });
}

Var scale(Var a, double factor) {
  const auto av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * av[i];
  return a.tape().record(std::move(out), a.shape(), {a}, [a, factor](std::span<const double> g, Tape& t) {
    auto ga = t.gradBuffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * g[i];
  });
}

Var mul(Var a, Var b) {
  requireSameShape(a, b, "mul");
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return a.tape().record(std::move(out), a.shape(), {a, b}, [a, b](std::span<const double> g, Tape& t) {
    const auto av = a.value();
    const auto bv = b.value();
    auto ga = t.gradBuffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
    auto gb = t.gradBuffer(b);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var relu(Var a) {
  const auto av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  return a.tape().record(std::move(out), a.shape(), {a}, [a](std::span<const double> g, Tape& t) {
    const auto av = a.value();
    auto ga = t.gradBuffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (av[i] > 0.0) ga[i] += g[i];
    }
  });
}

Var reshape(Var a, Shape shape) {
  if (numel(shape) != a.size()) {
    throw Error("reshape " + shapeString(a.shape()) + " -> " + shapeString(shape));
  }
  const auto av = a.value();
  return a.tape().record(std::vector<double>(av.begin(), av.end()), std::move(shape), {a},
                         [a](std::span<const double> g, Tape& t) { t.accumulate(a, g); });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value()) s += v;
  return a.tape().record({s}, Shape{1}, {a}, [a](std::span<const double> g, Tape& t) {
    auto ga = t.gradBuffer(a);
    for (double& x : ga) x += g[0];
  });
}

Var sumSquares(Var a) {
  double s = 0.0;
  for (double v : a.value()) s += v * v;
  return a.tape().record({s}, Shape{1}, {a}, [a](std::span<const double> g, Tape& t) {
    const auto av = a.value();
    auto ga = t.gradBuffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * av[i] * g[0];
  });
}

Var l2Norm(Var a) {
  double s = 0.0;
  for (double v : a.value()) s += v * v;
  const double norm = std::sqrt(s);
  return a.tape().record({norm}, Shape{1}, {a}, [a, norm](std::span<const double> g, Tape& t) {
    if (!(norm > 0.0)) return;
    const auto av = a.value();
    auto ga = t.gradBuffer(a);
    const double k = g[0] / norm;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += k * av[i];
  });
}

Var linearCombination(std::span<const Var> scalars, std::span<const double> weights) {
  if (scalars.empty() || scalars.size() != weights.size()) {
    throw Error("linearCombination: need matching, non-empty scalar and weight lists");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) total += weights[i] * scalars[i].item();
  std::vector<Var> ins(scalars.begin(), scalars.end());
  std::vector<double> ws(weights.begin(), weights.end());
  return scalars[0].tape().record({total}, Shape{1}, scalars,
                                  [ins, ws](std::span<const double> g, Tape& t) {
                                    for (std::size_t i = 0; i < ins.size(); ++i) {
                                      const double gi = ws[i] * g[0];
                                      t.accumulate(ins[i], std::span<const double>(&gi, 1));
                                    }
                                  });
}

Var dense(Var x, Var w, Var b) {
  const Shape& ws = w.shape();
  if (ws.size() != 2) throw Error("dense: weight must be 2-d, got " + shapeString(ws));
  const std::size_t in = ws[0];
  const std::size_t out = ws[1];
  const Shape& xs = x.shape();
  const bool batched = xs.size() == 2;
  if (!((batched && xs[1] == in) || (xs.size() == 1 && xs[0] == in))) {
    throw Error("dense: input " + shapeString(xs) + " incompatible with weight " +
                shapeString(ws));
  }
  const std::size_t rows = batched ? xs[0] : 1;
  const bool hasBias = b.valid();
  if (hasBias && b.size() != out) {
    throw Error("dense: bias " + shapeString(b.shape()) + " does not match output width " +
                std::to_string(out));
  }

  const auto xv = x.value();
  const auto wv = w.value();
  std::vector<double> y(rows * out, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = y.data() + r * out;
    if (hasBias) {
      const auto bv = b.value();
      for (std::size_t o = 0; o < out; ++o) yr[o] = bv[o];
    }
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xv[r * in + i];
      if (xi == 0.0) continue;
      const double* wr = wv.data() + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
    }
  }

  Shape shape = batched ? Shape{rows, out} : Shape{out};
  std::vector<Var> inputs{x, w};
  if (hasBias) inputs.push_back(b);
  return x.tape().record(
      std::move(y), std::move(shape), inputs,
      [x, w, b, rows, in, out, hasBias](std::span<const double> g, Tape& t) {
        const auto xv = x.value();
        const auto wv = w.value();
        auto gx = t.gradBuffer(x);
        if (!gx.empty()) {
          for (std::size_t r = 0; r < rows; ++r) {
            const double* gr = g.data() + r * out;
            for (std::size_t i = 0; i < in; ++i) {
              const double* wr = wv.data() + i * out;
              double acc = 0.0;
              for (std::size_t o = 0; o < out; ++o) acc += gr[o] * wr[o];
              gx[r * in + i] += acc;
            }
          }
        }
        auto gw = t.gradBuffer(w);
        if (!gw.empty()) {
          for (std::size_t r = 0; r < rows; ++r) {
            const double* gr = g.data() + r * out;
            for (std::size_t i = 0; i < in; ++i) {
              const double xi = xv[r * in + i];
              if (xi == 0.0) continue;
              double* gwr = gw.data() + i * out;
              for (std::size_t o = 0; o < out; ++o) gwr[o] += xi * gr[o];
            }
          }
        }
        if (hasBias) {
          auto gb = t.gradBuffer(b);
          if (!gb.empty()) {
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t o = 0; o < out; ++o) gb[o] += g[r * out + o];
            }
          }
        }
      });
}

Var concatColumns(std::span<const Var> blocks) {
  if (blocks.empty()) throw Error("concatColumns: no blocks");
  const std::size_t rows = blocks[0].shape().at(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& b : blocks) {
    if (b.shape().size() != 2 || b.shape()[0] != rows) {
      throw Error("concatColumns: block shape " + shapeString(b.shape()) + " incompatible");
    }
    widths.push_back(b.shape()[1]);
    total += b.shape()[1];
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto v = blocks[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < widths[k]; ++c) out[r * total + offset + c] = v[r * widths[k] + c];
    }
    offset += widths[k];
  }
  std::vector<Var> ins(blocks.begin(), blocks.end());
  return blocks[0].tape().record(
      std::move(out), Shape{rows, total}, blocks,
      [ins, widths, rows, total](std::span<const double> g, Tape& t) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < ins.size(); ++k) {
          auto gk = t.gradBuffer(ins[k]);
          if (!gk.empty()) {
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t c = 0; c < widths[k]; ++c) gk[r * widths[k] + c] += g[r * total + offset + c];
            }
          }
          offset += widths[k];
        }
      });
}

Var concatFlat(std::span<const Var> parts) {
  if (parts.empty()) throw Error("concatFlat: no parts");
  std::vector<double> out;
  std::vector<std::size_t> sizes;
  for (const Var& p : parts) {
    const auto v = p.value();
    out.insert(out.end(), v.begin(), v.end());
    sizes.push_back(v.size());
  }
  const std::size_t n = out.size();
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), Shape{n}, parts,
                                [ins, sizes](std::span<const double> g, Tape& t) {
                                  std::size_t offset = 0;
                                  for (std::size_t k = 0; k < ins.size(); ++k) {
                                    t.accumulate(ins[k], g.subspan(offset, sizes[k]));
                                    offset += sizes[k];
                                  }
                                });
}

}  // namespace drape::ad
