#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace drape {

/// Raised for every recoverable failure in the library: malformed input,
/// shape mismatches, violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Index = std::int32_t;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// N x 3 point array, row-major so `.data()` is a flat xyz xyz ... buffer.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// F x 3 triangle index array.
using Faces = Eigen::Matrix<Index, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// Dense row-major matrix (blend weights, regressors, bases).
using MatrixX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Meters to centimeters, used only when reporting metrics.
inline constexpr double kCentimetersPerMeter = 100.0;

}  // namespace drape
