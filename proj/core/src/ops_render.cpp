#include <algorithm>
#include <array>
#include <cmath>

#include "drape/render.hpp"

namespace drape::ad {

namespace {

/// Faces contribute only where sd / sharpness > -kCutoff.
constexpr double kCutoff = 12.0;
/// Projected faces with smaller doubled NDC area carry no normals.
constexpr double kMinArea = 1e-14;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const double kFloor = sigmoid(-kCutoff);

using Vec2 = Eigen::Vector2d;

struct Projection {
  std::vector<Vec2> ndc;
  std::vector<double> z;
};

Projection projectNdc(std::span<const double> v, const Camera& cam) {
  const std::size_t n = v.size() / 3;
  Projection p;
  p.ndc.resize(n);
  p.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.ndc[i] = Vec2(cam.s * v[3 * i] + cam.tx, cam.s * v[3 * i + 1] + cam.ty);
    p.z[i] = v[3 * i + 2];
  }
  return p;
}

Vec2 pixelCenter(int px, int py, const Camera& cam) {
  return {2.0 * (px + 0.5) / cam.width - 1.0, 1.0 - 2.0 * (py + 0.5) / cam.height};
}

struct Box {
  int x0, x1, y0, y1;
  [[nodiscard]] bool empty() const { return x0 > x1 || y0 > y1; }
};

/// Pixels whose centers lie within `margin` (NDC) of the triangle's bbox.
Box pixelBox(const std::array<Vec2, 3>& p, double margin, const Camera& cam) {
  const double xmin = std::min({p[0].x(), p[1].x(), p[2].x()}) - margin;
  const double xmax = std::max({p[0].x(), p[1].x(), p[2].x()}) + margin;
  const double ymin = std::min({p[0].y(), p[1].y(), p[2].y()}) - margin;
  const double ymax = std::max({p[0].y(), p[1].y(), p[2].y()}) + margin;
  const double umin = (xmin + 1.0) * cam.width / 2.0;
  const double umax = (xmax + 1.0) * cam.width / 2.0;
  const double vmin = (1.0 - ymax) * cam.height / 2.0;
  const double vmax = (1.0 - ymin) * cam.height / 2.0;
  if (!std::isfinite(umin + umax + vmin + vmax)) return Box{1, 0, 1, 0};
  const double w = cam.width;
  const double h = cam.height;
  Box b;
  b.x0 = static_cast<int>(std::clamp(std::ceil(umin - 0.5), 0.0, w));
  b.x1 = static_cast<int>(std::clamp(std::floor(umax - 0.5), -1.0, w - 1.0));
  b.y0 = static_cast<int>(std::clamp(std::ceil(vmin - 0.5), 0.0, h));
  b.y1 = static_cast<int>(std::clamp(std::floor(vmax - 0.5), -1.0, h - 1.0));
  return b;
}

/// (b - a) x (q - a).
double edgeFn(const Vec2& a, const Vec2& b, const Vec2& q) {
  return (b.x() - a.x()) * (q.y() - a.y()) - (b.y() - a.y()) * (q.x() - a.x());
}

/// Signed distance of q to the triangle (positive inside) and raw
/// barycentrics. Gradients are w.r.t. (P0x, P0y, P1x, P1y, P2x, P2y).
struct Fragment {
  double sd = 0.0;
  std::array<double, 6> dsd{};
  std::array<double, 3> lambda{};
  double area2 = 0.0;
};

Fragment fragment(const std::array<Vec2, 3>& p, const Vec2& q) {
  Fragment f;
  f.area2 = edgeFn(p[0], p[1], p[2]);
  bool inside = false;
  if (std::abs(f.area2) > kMinArea) {
    f.lambda[0] = edgeFn(p[1], p[2], q) / f.area2;
    f.lambda[1] = edgeFn(p[2], p[0], q) / f.area2;
    f.lambda[2] = edgeFn(p[0], p[1], q) / f.area2;
    inside = f.lambda[0] >= 0.0 && f.lambda[1] >= 0.0 && f.lambda[2] >= 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int e = 0; e < 3; ++e) {
    const int ia = e;
    const int ib = (e + 1) % 3;
    const Vec2 ab = p[ib] - p[ia];
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((q - p[ia]).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 diff = q - (p[ia] + t * ab);
    const double d = diff.norm();
    if (d < best) {
      best = d;
      f.dsd.fill(0.0);
      if (d > 0.0) {
        const Vec2 u = diff / d;
        // Envelope: the closest-point parameter is stationary.
        f.dsd[2 * ia] = -(1.0 - t) * u.x();
        f.dsd[2 * ia + 1] = -(1.0 - t) * u.y();
        f.dsd[2 * ib] += -t * u.x();
        f.dsd[2 * ib + 1] += -t * u.y();
      }
    }
  }
  f.sd = inside ? best : -best;
  if (!inside) {
    for (double& g : f.dsd) g = -g;
  }
  return f;
}

/// d lambda_i / d(P0x, P0y, P1x, P1y, P2x, P2y) for raw barycentrics.
std::array<std::array<double, 6>, 3> lambdaJacobian(const std::array<Vec2, 3>& p, const Vec2& q,
                                                    const Fragment& f) {
  // E(a, b, q) partials: dE/da = (b.y - q.y, q.x - b.x), dE/db = (q.y - a.y, a.x - q.x).
  auto edgeGrad = [&](int ia, int ib, std::array<double, 6>& out) {
    const Vec2& a = p[ia];
    const Vec2& b = p[ib];
    out[2 * ia] += b.y() - q.y();
    out[2 * ia + 1] += q.x() - b.x();
    out[2 * ib] += q.y() - a.y();
    out[2 * ib + 1] += a.x() - q.x();
  };
  std::array<double, 6> dArea{};
  // Area is E(P0, P1, P2) with q = P2.
  dArea[0] = p[1].y() - p[2].y();
  dArea[1] = p[2].x() - p[1].x();
  dArea[2] = p[2].y() - p[0].y();
  dArea[3] = p[0].x() - p[2].x();
  dArea[4] = p[0].y() - p[1].y();
  dArea[5] = p[1].x() - p[0].x();
  std::array<std::array<double, 6>, 3> jac{};
  const std::array<std::array<int, 2>, 3> edges{{{1, 2}, {2, 0}, {0, 1}}};
  for (int i = 0; i < 3; ++i) {
    std::array<double, 6> dE{};
    edgeGrad(edges[i][0], edges[i][1], dE);
    for (int k = 0; k < 6; ++k) jac[i][k] = (dE[k] - f.lambda[i] * dArea[k]) / f.area2;
  }
  return jac;
}

struct Clamped {
  std::array<double, 3> b{};
  double sum = 0.0;
};

Clamped clampBarycentrics(const std::array<double, 3>& lambda) {
  Clamped c;
  for (int i = 0; i < 3; ++i) c.sum += std::max(lambda[i], 0.0);
  for (int i = 0; i < 3; ++i) c.b[i] = std::max(lambda[i], 0.0) / c.sum;
  return c;
}

std::array<Vec2, 3> faceNdc(const Projection& proj, const Faces& faces, Index f) {
  return {proj.ndc[faces(f, 0)], proj.ndc[faces(f, 1)], proj.ndc[faces(f, 2)]};
}

void checkInputs(Var vertices, const Faces& faces, const Camera& camera, double sharpness) {
  camera.validate();
  if (!(sharpness > 0.0)) throw Error("rasterize: sharpness must be positive");
  if (vertices.shape().size() != 2 || vertices.shape()[1] != 3) {
    throw Error("rasterize: vertices must be [N x 3], got " + shapeString(vertices.shape()));
  }
  const auto n = static_cast<Index>(vertices.shape()[0]);
  if (faces.size() > 0 && (faces.minCoeff() < 0 || faces.maxCoeff() >= n)) {
    throw Error("rasterize: face index out of range");
  }
}

/// Adds a gradient w.r.t. the NDC position of face corners onto world
/// vertex coordinates.
void scatterNdc(std::span<double> gv, const Faces& faces, Index f, const std::array<double, 6>& g, double s) {
  for (int c = 0; c < 3; ++c) {
    const auto v = static_cast<std::size_t>(faces(f, c));
    gv[3 * v] += s * g[2 * c];
    gv[3 * v + 1] += s * g[2 * c + 1];
  }
}

}  // namespace

Var rasterizeSilhouette(Var vertices, const Faces& faces, const Camera& camera, double sharpness) {
  checkInputs(vertices, faces, camera, sharpness);
  const std::size_t pixels = static_cast<std::size_t>(camera.width) * camera.height;
  const Projection proj = projectNdc(vertices.value(), camera);
  // Σ_f log(1 - D_f) per pixel.
  std::vector<double> logKeep(pixels, 0.0);
  const double margin = kCutoff * sharpness;
  for (Index f = 0; f < faces.rows(); ++f) {
    const auto p = faceNdc(proj, faces, f);
    const Box box = pixelBox(p, margin, camera);
    if (box.empty()) continue;
    for (int py = box.y0; py <= box.y1; ++py) {
      for (int px = box.x0; px <= box.x1; ++px) {
        const Fragment fr = fragment(p, pixelCenter(px, py, camera));
        const double x = fr.sd / sharpness;
        if (x <= -kCutoff) continue;
        logKeep[static_cast<std::size_t>(py) * camera.width + px] += std::log(sigmoid(-x) + kFloor);
      }
    }
  }
  std::vector<double> mask(pixels);
  for (std::size_t i = 0; i < pixels; ++i) mask[i] = -std::expm1(logKeep[i]);

  const Shape shape{static_cast<std::size_t>(camera.height), static_cast<std::size_t>(camera.width)};
  return vertices.tape().record(
      std::move(mask), shape, {vertices},
      [vertices, faces, camera, sharpness, logKeep = std::move(logKeep)](std::span<const double> g, Tape& t) {
        auto gv = t.gradBuffer(vertices);
        if (gv.empty()) return;
        const Projection proj = projectNdc(vertices.value(), camera);
        const double margin = kCutoff * sharpness;
        for (Index f = 0; f < faces.rows(); ++f) {
          const auto p = faceNdc(proj, faces, f);
          const Box box = pixelBox(p, margin, camera);
          if (box.empty()) continue;
          std::array<double, 6> acc{};
          for (int py = box.y0; py <= box.y1; ++py) {
            for (int px = box.x0; px <= box.x1; ++px) {
              const std::size_t pix = static_cast<std::size_t>(py) * camera.width + px;
              if (g[pix] == 0.0) continue;
              const Fragment fr = fragment(p, pixelCenter(px, py, camera));
              const double x = fr.sd / sharpness;
              if (x <= -kCutoff) continue;
              const double sx = sigmoid(x);
              const double keep = sigmoid(-x) + kFloor;
              // dA/dx = P / (1 - D) * D'(x).
              const double dAdx = std::exp(logKeep[pix]) / keep * sx * (1.0 - sx);
              const double k = g[pix] * dAdx / sharpness;
              for (int j = 0; j < 6; ++j) acc[j] += k * fr.dsd[j];
            }
          }
          scatterNdc(gv, faces, f, acc, camera.s);
        }
      });
}

Var rasterizeNormals(Var vertices, Var vertexNormals, const Faces& faces, const Camera& camera,
                     double sharpness) {
  checkInputs(vertices, faces, camera, sharpness);
  if (vertexNormals.shape() != vertices.shape()) {
    throw Error("rasterize_normals: normals " + shapeString(vertexNormals.shape()) + " vs vertices " +
                shapeString(vertices.shape()));
  }
  const std::size_t pixels = static_cast<std::size_t>(camera.width) * camera.height;
  const Projection proj = projectNdc(vertices.value(), camera);
  const auto nv = vertexNormals.value();
  const double gamma = sharpness;
  const double margin = kCutoff * sharpness;

  // Per pixel: Σ log(1 - D), running max log-weight, Σ w, Σ w n.
  std::vector<double> logKeep(pixels, 0.0);
  std::vector<double> maxLog(pixels, -std::numeric_limits<double>::infinity());
  std::vector<double> weightSum(pixels, 0.0);
  std::vector<double> accum(3 * pixels, 0.0);

  for (Index f = 0; f < faces.rows(); ++f) {
    const auto p = faceNdc(proj, faces, f);
    const Box box = pixelBox(p, margin, camera);
    if (box.empty()) continue;
    for (int py = box.y0; py <= box.y1; ++py) {
      for (int px = box.x0; px <= box.x1; ++px) {
        const Fragment fr = fragment(p, pixelCenter(px, py, camera));
        const double x = fr.sd / sharpness;
        if (x <= -kCutoff) continue;
        const std::size_t pix = static_cast<std::size_t>(py) * camera.width + px;
        logKeep[pix] += std::log(sigmoid(-x) + kFloor);
        if (std::abs(fr.area2) <= kMinArea) continue;
        const double d = sigmoid(x) - kFloor;
        if (!(d > 0.0)) continue;
        const Clamped c = clampBarycentrics(fr.lambda);
        double z = 0.0;
        std::array<double, 3> n{};
        for (int i = 0; i < 3; ++i) {
          const auto v = static_cast<std::size_t>(faces(f, i));
          z += c.b[i] * proj.z[v];
          for (int k = 0; k < 3; ++k) n[k] += c.b[i] * 0.5 * (nv[3 * v + k] + 1.0);
        }
        const double ell = std::log(d) + camera.s * z / gamma;
        if (ell > maxLog[pix]) {
          const double r = std::exp(maxLog[pix] - ell);
          weightSum[pix] *= r;
          for (int k = 0; k < 3; ++k) accum[3 * pix + k] *= r;
          maxLog[pix] = ell;
        }
        const double w = std::exp(ell - maxLog[pix]);
        weightSum[pix] += w;
        for (int k = 0; k < 3; ++k) accum[3 * pix + k] += w * n[k];
      }
    }
  }

  std::vector<double> out(3 * pixels, kNormalBackground);
  std::vector<double> coverage(pixels);
  std::vector<double> fg(3 * pixels, kNormalBackground);
  for (std::size_t pix = 0; pix < pixels; ++pix) {
    coverage[pix] = -std::expm1(logKeep[pix]);
    if (weightSum[pix] > 0.0) {
      for (int k = 0; k < 3; ++k) {
        fg[3 * pix + k] = accum[3 * pix + k] / weightSum[pix];
        out[3 * pix + k] = coverage[pix] * fg[3 * pix + k] + (1.0 - coverage[pix]) * kNormalBackground;
      }
    }
  }

  const Shape shape{static_cast<std::size_t>(camera.height), static_cast<std::size_t>(camera.width), 3};
  return vertices.tape().record(
      std::move(out), shape, {vertices, vertexNormals},
      [vertices, vertexNormals, faces, camera, sharpness, logKeep = std::move(logKeep),
       maxLog = std::move(maxLog), weightSum = std::move(weightSum), coverage = std::move(coverage),
       fg = std::move(fg)](std::span<const double> g, Tape& t) {
        auto gv = t.gradBuffer(vertices);
        auto gn = t.gradBuffer(vertexNormals);
        if (gv.empty() && gn.empty()) return;
        const std::size_t pixels = coverage.size();
        const Projection proj = projectNdc(vertices.value(), camera);
        const auto nv = vertexNormals.value();
        const double gamma = sharpness;
        const double margin = kCutoff * sharpness;

        // Pixel-level adjoints: dL/dA and dL/dfg.
        std::vector<double> gA(pixels, 0.0);
        std::vector<double> gFg(3 * pixels, 0.0);
        for (std::size_t pix = 0; pix < pixels; ++pix) {
          if (!(weightSum[pix] > 0.0)) continue;
          for (int k = 0; k < 3; ++k) {
            gA[pix] += g[3 * pix + k] * (fg[3 * pix + k] - kNormalBackground);
            gFg[3 * pix + k] = coverage[pix] * g[3 * pix + k];
          }
        }

        for (Index f = 0; f < faces.rows(); ++f) {
          const auto p = faceNdc(proj, faces, f);
          const Box box = pixelBox(p, margin, camera);
          if (box.empty()) continue;
          std::array<double, 6> accP{};
          std::array<double, 3> accZ{};
          std::array<std::array<double, 3>, 3> accN{};
          for (int py = box.y0; py <= box.y1; ++py) {
            for (int px = box.x0; px <= box.x1; ++px) {
              const std::size_t pix = static_cast<std::size_t>(py) * camera.width + px;
              if (!(weightSum[pix] > 0.0)) continue;
              const Vec2 q = pixelCenter(px, py, camera);
              const Fragment fr = fragment(p, q);
              const double x = fr.sd / sharpness;
              if (x <= -kCutoff) continue;
              const double sx = sigmoid(x);
              const double keep = sigmoid(-x) + kFloor;
              // Coverage path.
              double gD = gA[pix] * std::exp(logKeep[pix]) / keep;
              const double d = sx - kFloor;
              const bool shaded = std::abs(fr.area2) > kMinArea && d > 0.0;
              std::array<double, 3> gLambda{};
              if (shaded) {
                const Clamped c = clampBarycentrics(fr.lambda);
                double z = 0.0;
                std::array<double, 3> n{};
                std::array<std::array<double, 3>, 3> nenc{};
                for (int i = 0; i < 3; ++i) {
                  const auto v = static_cast<std::size_t>(faces(f, i));
                  z += c.b[i] * proj.z[v];
                  for (int k = 0; k < 3; ++k) {
                    nenc[i][k] = 0.5 * (nv[3 * v + k] + 1.0);
                    n[k] += c.b[i] * nenc[i][k];
                  }
                }
                // w / W and (w / W) / D without forming log(D) twice.
                const double depthTerm = std::exp(camera.s * z / gamma - maxLog[pix]) / weightSum[pix];
                const double share = d * depthTerm;
                double dot = 0.0;
                for (int k = 0; k < 3; ++k) dot += (n[k] - fg[3 * pix + k]) * gFg[3 * pix + k];
                const double gEll = share * dot;
                gD += depthTerm * dot;
                const double gz = gEll * camera.s / gamma;
                std::array<double, 3> gb{};
                for (int i = 0; i < 3; ++i) {
                  const auto v = static_cast<std::size_t>(faces(f, i));
                  accZ[i] += gz * c.b[i];
                  gb[i] += gz * proj.z[v];
                  for (int k = 0; k < 3; ++k) {
                    const double gnk = share * gFg[3 * pix + k];
                    gb[i] += gnk * nenc[i][k];
                    accN[i][k] += 0.5 * c.b[i] * gnk;
                  }
                }
                double bDot = 0.0;
                for (int i = 0; i < 3; ++i) bDot += gb[i] * c.b[i];
                for (int i = 0; i < 3; ++i) {
                  if (fr.lambda[i] > 0.0) gLambda[i] = (gb[i] - bDot) / c.sum;
                }
              }
              const double gx = gD * sx * (1.0 - sx);
              const double gsd = gx / sharpness;
              for (int j = 0; j < 6; ++j) accP[j] += gsd * fr.dsd[j];
              if (shaded && (gLambda[0] != 0.0 || gLambda[1] != 0.0 || gLambda[2] != 0.0)) {
                const auto jac = lambdaJacobian(p, q, fr);
                for (int i = 0; i < 3; ++i) {
                  for (int j = 0; j < 6; ++j) accP[j] += gLambda[i] * jac[i][j];
                }
              }
            }
          }
          if (!gv.empty()) {
            scatterNdc(gv, faces, f, accP, camera.s);
            for (int i = 0; i < 3; ++i) gv[3 * static_cast<std::size_t>(faces(f, i)) + 2] += accZ[i];
          }
          if (!gn.empty()) {
            for (int i = 0; i < 3; ++i) {
              for (int k = 0; k < 3; ++k) gn[3 * static_cast<std::size_t>(faces(f, i)) + k] += accN[i][k];
            }
          }
        }
      });
}

Var rasterizeDescriptors(Var descriptors, const Points& vertices, const Faces& faces, const Camera& camera) {
  camera.validate();
  const Shape& ds = descriptors.shape();
  if (ds.size() != 2 || ds[0] != static_cast<std::size_t>(vertices.rows())) {
    throw Error("rasterize_descriptors: descriptors " + shapeString(ds) + " do not match " +
                std::to_string(vertices.rows()) + " vertices");
  }
  const std::size_t channels = ds[1];
  if (channels == 0) throw Error("rasterize_descriptors: descriptors need at least one channel");
  if (faces.size() > 0 && (faces.minCoeff() < 0 || faces.maxCoeff() >= vertices.rows())) {
    throw Error("rasterize_descriptors: face index out of range");
  }
  const std::size_t pixels = static_cast<std::size_t>(camera.width) * camera.height;
  const Projection proj =
      projectNdc(std::span<const double>(vertices.data(), static_cast<std::size_t>(vertices.size())), camera);
  std::vector<double> depth(pixels, -std::numeric_limits<double>::infinity());
  std::vector<Index> winner(pixels, -1);
  std::vector<std::array<double, 3>> bary(pixels);
  for (Index f = 0; f < faces.rows(); ++f) {
    const auto p = faceNdc(proj, faces, f);
    const double area2 = edgeFn(p[0], p[1], p[2]);
    if (std::abs(area2) <= kMinArea) continue;
    const Box box = pixelBox(p, 0.0, camera);
    if (box.empty()) continue;
    for (int py = box.y0; py <= box.y1; ++py) {
      for (int px = box.x0; px <= box.x1; ++px) {
        const Vec2 q = pixelCenter(px, py, camera);
        const std::array<double, 3> l{edgeFn(p[1], p[2], q) / area2, edgeFn(p[2], p[0], q) / area2,
                                      edgeFn(p[0], p[1], q) / area2};
        if (l[0] < 0.0 || l[1] < 0.0 || l[2] < 0.0) continue;
        double z = 0.0;
        for (int i = 0; i < 3; ++i) z += l[i] * proj.z[faces(f, i)];
        const std::size_t pix = static_cast<std::size_t>(py) * camera.width + px;
        if (z > depth[pix]) {
          depth[pix] = z;
          winner[pix] = f;
          bary[pix] = l;
        }
      }
    }
  }
  const auto dv = descriptors.value();
  std::vector<double> out(pixels * channels, 0.0);
  for (std::size_t pix = 0; pix < pixels; ++pix) {
    const Index f = winner[pix];
    if (f < 0) continue;
    for (int i = 0; i < 3; ++i) {
      const auto v = static_cast<std::size_t>(faces(f, i));
      for (std::size_t c = 0; c < channels; ++c) out[pix * channels + c] += bary[pix][i] * dv[v * channels + c];
    }
  }
  const Shape shape{static_cast<std::size_t>(camera.height), static_cast<std::size_t>(camera.width), channels};
  return descriptors.tape().record(
      std::move(out), shape, {descriptors},
      [descriptors, faces, channels, winner = std::move(winner), bary = std::move(bary)](std::span<const double> g,
                                                                                        Tape& t) {
        auto gd = t.gradBuffer(descriptors);
        for (std::size_t pix = 0; pix < winner.size(); ++pix) {
          const Index f = winner[pix];
          if (f < 0) continue;
          for (int i = 0; i < 3; ++i) {
            const auto v = static_cast<std::size_t>(faces(f, i));
            for (std::size_t c = 0; c < channels; ++c) gd[v * channels + c] += bary[pix][i] * g[pix * channels + c];
          }
        }
      });
}

}  // namespace drape::ad
