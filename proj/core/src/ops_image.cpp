#include <algorithm>
#include <array>
#include <cmath>

#include "drape/loss.hpp"
#include "drape/ops.hpp"

namespace drape::ad {

namespace {

struct Dims {
  std::size_t h, w, c;
};

Dims imageDims(Var image, const char* op) {
  const Shape& s = image.shape();
  if (s.size() == 2) return {s[0], s[1], 1};
  if (s.size() == 3) return {s[0], s[1], s[2]};
  throw Error(std::string(op) + ": expected an [H x W] or [H x W x C] image, got " + shapeString(s));
}

constexpr std::array<double, 5> kBinomial{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
constexpr double kGradientEps = 1e-3;

std::size_t clampIndex(long i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1));
}

}  // namespace

Var maskTerm(Var pred, const Image& gt) {
  const Dims d = imageDims(pred, "mask_term");
  if (d.h != static_cast<std::size_t>(gt.height) || d.w != static_cast<std::size_t>(gt.width) ||
      d.c != static_cast<std::size_t>(gt.channels)) {
    throw Error("mask_term: prediction " + shapeString(pred.shape()) + " vs target " + std::to_string(gt.height) +
                "x" + std::to_string(gt.width) + "x" + std::to_string(gt.channels));
  }
  Tape& t = pred.tape();
  return l2Norm(sub(pred, t.constant(std::vector<double>(gt.data), pred.shape())));
}

Var pyramidDown(Var image) {
  const Dims d = imageDims(image, "pyramid_down");
  const std::size_t ho = (d.h + 1) / 2;
  const std::size_t wo = (d.w + 1) / 2;
  const auto in = image.value();
  std::vector<double> out(ho * wo * d.c, 0.0);
  for (std::size_t i = 0; i < ho; ++i) {
    for (std::size_t j = 0; j < wo; ++j) {
      for (int a = 0; a < 5; ++a) {
        const std::size_t y = clampIndex(static_cast<long>(2 * i) + a - 2, d.h);
        for (int b = 0; b < 5; ++b) {
          const std::size_t x = clampIndex(static_cast<long>(2 * j) + b - 2, d.w);
          const double k = kBinomial[a] * kBinomial[b];
          for (std::size_t c = 0; c < d.c; ++c) out[(i * wo + j) * d.c + c] += k * in[(y * d.w + x) * d.c + c];
        }
      }
    }
  }
  Shape shape = image.shape().size() == 2 ? Shape{ho, wo} : Shape{ho, wo, d.c};
  return image.tape().record(std::move(out), std::move(shape), {image},
                             [image, d, ho, wo](std::span<const double> g, Tape& t) {
                               auto gi = t.gradBuffer(image);
                               for (std::size_t i = 0; i < ho; ++i) {
                                 for (std::size_t j = 0; j < wo; ++j) {
                                   for (int a = 0; a < 5; ++a) {
                                     const std::size_t y = clampIndex(static_cast<long>(2 * i) + a - 2, d.h);
                                     for (int b = 0; b < 5; ++b) {
                                       const std::size_t x = clampIndex(static_cast<long>(2 * j) + b - 2, d.w);
                                       const double k = kBinomial[a] * kBinomial[b];
                                       for (std::size_t c = 0; c < d.c; ++c) {
                                         gi[(y * d.w + x) * d.c + c] += k * g[(i * wo + j) * d.c + c];
                                       }
                                     }
                                   }
                                 }
                               }
                             });
}

Var gradientMagnitude(Var image) {
  const Dims d = imageDims(image, "gradient_magnitude");
  const auto in = image.value();
  const std::size_t n = d.h * d.w * d.c;
  std::vector<double> gx(n, 0.0);
  std::vector<double> gy(n, 0.0);
  std::vector<double> out(n, 0.0);
  for (std::size_t y = 0; y < d.h; ++y) {
    for (std::size_t x = 0; x < d.w; ++x) {
      for (std::size_t c = 0; c < d.c; ++c) {
        const std::size_t k = (y * d.w + x) * d.c + c;
        if (x + 1 < d.w) gx[k] = in[k + d.c] - in[k];
        if (y + 1 < d.h) gy[k] = in[k + d.w * d.c] - in[k];
        out[k] = std::sqrt(gx[k] * gx[k] + gy[k] * gy[k] + kGradientEps * kGradientEps) - kGradientEps;
      }
    }
  }
  return image.tape().record(
      std::move(out), image.shape(), {image},
      [image, d, gx = std::move(gx), gy = std::move(gy)](std::span<const double> g, Tape& t) {
        auto gi = t.gradBuffer(image);
        for (std::size_t y = 0; y < d.h; ++y) {
          for (std::size_t x = 0; x < d.w; ++x) {
            for (std::size_t c = 0; c < d.c; ++c) {
              const std::size_t k = (y * d.w + x) * d.c + c;
              const double mag = std::sqrt(gx[k] * gx[k] + gy[k] * gy[k] + kGradientEps * kGradientEps);
              const double sx = g[k] * gx[k] / mag;
              const double sy = g[k] * gy[k] / mag;
              if (x + 1 < d.w) {
                gi[k + d.c] += sx;
                gi[k] -= sx;
              }
              if (y + 1 < d.h) {
                gi[k + d.w * d.c] += sy;
                gi[k] -= sy;
              }
            }
          }
        }
      });
}

Var featureTransform(Var image) {
  std::vector<Var> parts;
  Var level = image;
  for (int l = 0; l < 4; ++l) {
    if (l > 0) level = pyramidDown(level);
    parts.push_back(level);
    parts.push_back(gradientMagnitude(level));
  }
  return concatFlat(parts);
}

Var normalTerm(Var predNormal, const Image& gtMask, const Image& gtNormal, const FeatureTransform& features) {
  const Image target = maskedNormal(gtMask, gtNormal);
  const Dims d = imageDims(predNormal, "normal_term");
  if (d.h != static_cast<std::size_t>(target.height) || d.w != static_cast<std::size_t>(target.width) ||
      d.c != static_cast<std::size_t>(target.channels)) {
    throw Error("normal_term: prediction " + shapeString(predNormal.shape()) + " vs target " +
                std::to_string(target.height) + "x" + std::to_string(target.width) + "x" +
                std::to_string(target.channels));
  }
  Tape& t = predNormal.tape();
  const Var gt = t.constant(std::vector<double>(target.data), predNormal.shape());
  return l2Norm(sub(features(predNormal), features(gt)));
}

}  // namespace drape::ad
