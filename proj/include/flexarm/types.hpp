#pragma once

#include <Eigen/Dense>

namespace flexarm {

// Planar task space: position (2) + orientation (1).
inline constexpr int kPosDim = 2;
inline constexpr int kTaskDim = 3;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Counter-clockwise quarter turn.
inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

}  // namespace flexarm
