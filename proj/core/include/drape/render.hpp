#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "drape/autodiff.hpp"
#include "drape/mesh.hpp"

namespace drape {

/// Weak-perspective camera: scale plus 2D translation in normalized device
/// coordinates (NDC, [-1, 1] across the image, y up), and the image size.
struct Camera {
  double s = 1.0;
  double tx = 0.0;
  double ty = 0.0;
  int width = 128;
  int height = 128;

  void validate() const;
};

enum class ImageKind { Mask, Normal, Descriptor, Rgb };

std::string_view toString(ImageKind kind);

/// Row-major H x W x C grid of values, row 0 at the top of the image.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  ImageKind kind = ImageKind::Mask;
  std::vector<double> data;

  Image() = default;
  Image(int width, int height, int channels, ImageKind kind, double fill = 0.0);

  [[nodiscard]] double& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  [[nodiscard]] double at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  [[nodiscard]] std::size_t size() const { return data.size(); }
  /// Finite values; masks also within [0, 1].
  void validate() const;
  [[nodiscard]] bool sameDimensions(const Image& other) const {
    return width == other.width && height == other.height && channels == other.channels;
  }
};

/// Per point (u, v, depth): u = (s x + tx + 1) W / 2,
/// v = (1 - (s y + ty)) H / 2, depth = z (larger is nearer the camera).
Points project(const Points& points, const Camera& camera);

inline constexpr double kDefaultSharpness = 1e-2;
/// Background value of normal images (encodes the zero vector).
inline constexpr double kNormalBackground = 0.5;

/// Soft silhouette: per pixel 1 - Π_f (1 - D_f) with
/// D_f = max(0, sigmoid(sd_f / sharpness) - sigmoid(-12)), sd_f the signed
/// NDC distance from the pixel center to face f (positive inside).
Image rasterizeSilhouette(const TriMesh& mesh, const Camera& camera, double sharpness = kDefaultSharpness);

/// Soft normal map: coverage-blended, depth-softmax composite of
/// barycentric-interpolated vertex normals encoded as (n + 1) / 2 over a
/// 0.5 background.
Image rasterizeNormals(const TriMesh& mesh, const Camera& camera, double sharpness = kDefaultSharpness);

/// Hard z-buffered barycentric interpolation of per-vertex descriptors
/// (N x C, C >= 1). Background pixels are 0.
Image rasterizeDescriptors(const TriMesh& mesh, const MatrixX& descriptors, const Camera& camera);

namespace ad {

/// Differentiable silhouette of vertices [N x 3]; result [H x W].
Var rasterizeSilhouette(Var vertices, const Faces& faces, const Camera& camera, double sharpness);

/// Differentiable normal map; `vertexNormals` [N x 3] is usually
/// ad::vertexNormals(vertices). Result [H x W x 3].
Var rasterizeNormals(Var vertices, Var vertexNormals, const Faces& faces, const Camera& camera,
                     double sharpness);

/// Differentiable w.r.t. the descriptors only. Result [H x W x C].
Var rasterizeDescriptors(Var descriptors, const Points& vertices, const Faces& faces, const Camera& camera);

}  // namespace ad

/// 8-bit PNG: one channel is written as grayscale, three as RGB.
void writePng(const Image& image, const std::filesystem::path& path);
/// Values scaled to [0, 1]; grayscale loads as a Mask, RGB as a Normal
/// image. Alpha channels are dropped.
Image readPng(const std::filesystem::path& path);

}  // namespace drape
