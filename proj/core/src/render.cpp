#include "drape/render.hpp"

#include <cmath>

#include "drape/geometry_ops.hpp"

namespace drape {

void Camera::validate() const {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error("camera scale must be positive and finite");
  if (!std::isfinite(tx) || !std::isfinite(ty)) throw Error("camera translation must be finite");
  if (width < 1 || height < 1) throw Error("camera image size must be at least 1x1");
}

std::string_view toString(ImageKind kind) {
  switch (kind) {
    case ImageKind::Mask: return "mask";
    case ImageKind::Normal: return "normal";
    case ImageKind::Descriptor: return "descriptor";
    case ImageKind::Rgb: return "rgb";
  }
  return "unknown";
}

Image::Image(int width_, int height_, int channels_, ImageKind kind_, double fill)
    : width(width_), height(height_), channels(channels_), kind(kind_) {
  if (width < 0 || height < 0 || channels < 1) throw Error("invalid image dimensions");
  data.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

void Image::validate() const {
  if (data.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error("image buffer size does not match " + std::to_string(width) + "x" + std::to_string(height) +
                "x" + std::to_string(channels));
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw Error("image contains non-finite values");
    if (kind == ImageKind::Mask && (v < 0.0 || v > 1.0)) throw Error("mask value outside [0, 1]");
  }
}

Points project(const Points& points, const Camera& camera) {
  camera.validate();
  Points out(points.rows(), 3);
  for (Index i = 0; i < points.rows(); ++i) {
    out(i, 0) = (camera.s * points(i, 0) + camera.tx + 1.0) * camera.width / 2.0;
    out(i, 1) = (1.0 - (camera.s * points(i, 1) + camera.ty)) * camera.height / 2.0;
    out(i, 2) = points(i, 2);
  }
  return out;
}

namespace {

ad::Var constantPoints(ad::Tape& tape, const Points& p) {
  return tape.constant(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                       ad::Shape{static_cast<std::size_t>(p.rows()), 3});
}

Image fromVar(ad::Var v, const Camera& camera, int channels, ImageKind kind) {
  Image img;
  img.width = camera.width;
  img.height = camera.height;
  img.channels = channels;
  img.kind = kind;
  img.data.assign(v.value().begin(), v.value().end());
  return img;
}

}  // namespace

Image rasterizeSilhouette(const TriMesh& mesh, const Camera& camera, double sharpness) {
  ad::Tape tape;
  return fromVar(ad::rasterizeSilhouette(constantPoints(tape, mesh.vertices), mesh.faces, camera, sharpness),
                 camera, 1, ImageKind::Mask);
}

Image rasterizeNormals(const TriMesh& mesh, const Camera& camera, double sharpness) {
  camera.validate();
  if (mesh.faces.rows() == 0) {
    return Image(camera.width, camera.height, 3, ImageKind::Normal, kNormalBackground);
  }
  ad::Tape tape;
  const ad::Var v = constantPoints(tape, mesh.vertices);
  const ad::Var n = ad::vertexNormals(v, mesh.faces);
  return fromVar(ad::rasterizeNormals(v, n, mesh.faces, camera, sharpness), camera, 3, ImageKind::Normal);
}

Image rasterizeDescriptors(const TriMesh& mesh, const MatrixX& descriptors, const Camera& camera) {
  ad::Tape tape;
  const ad::Var d = tape.constant(
      std::span<const double>(descriptors.data(), static_cast<std::size_t>(descriptors.size())),
      ad::Shape{static_cast<std::size_t>(descriptors.rows()), static_cast<std::size_t>(descriptors.cols())});
  return fromVar(ad::rasterizeDescriptors(d, mesh.vertices, mesh.faces, camera), camera,
                 static_cast<int>(descriptors.cols()), ImageKind::Descriptor);
}

}  // namespace drape
