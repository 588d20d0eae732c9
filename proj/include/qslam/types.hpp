// Copyright 2026 The qslam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace qslam {

template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vector10 = Eigen::Matrix<Scalar, 10, 1>;

using Matrix3d = Matrix3<double>;
using Matrix4d = Matrix4<double>;
using Vector3d = Vector3<double>;
using Vector10d = Vector10<double>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// {0,1} activation flags for the three canonical axes.
using AxisMask = Eigen::Array<int, 3, 1>;

enum class QuadricType { Point, Line, Plane, Cylinder, Cone, Ellipsoid };

inline const char* to_string(QuadricType type) {
  switch (type) {
    case QuadricType::Point: return "POINT";
    case QuadricType::Line: return "LINE";
    case QuadricType::Plane: return "PLANE";
    case QuadricType::Cylinder: return "CYLINDER";
    case QuadricType::Cone: return "CONE";
    case QuadricType::Ellipsoid: return "ELLIPSOID";
  }
  return "?";
}

inline bool quadric_type_from_string(const std::string& s, QuadricType& out) {
  if (s == "POINT") out = QuadricType::Point;
  else if (s == "LINE") out = QuadricType::Line;
  else if (s == "PLANE") out = QuadricType::Plane;
  else if (s == "CYLINDER") out = QuadricType::Cylinder;
  else if (s == "CONE") out = QuadricType::Cone;
  else if (s == "ELLIPSOID") out = QuadricType::Ellipsoid;
  else return false;
  return true;
}

constexpr std::array<QuadricType, 6> kAllQuadricTypes = {
    QuadricType::Point,    QuadricType::Line, QuadricType::Plane,
    QuadricType::Cylinder, QuadricType::Cone, QuadricType::Ellipsoid};

/// Diagonal of the canonical matrix C, one row per type.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> canonical_diagonal(QuadricType type) {
  using V4 = Eigen::Matrix<Scalar, 4, 1>;
  switch (type) {
    case QuadricType::Point: return V4(1, 1, 1, 0);
    case QuadricType::Line: return V4(1, 1, 0, 0);
    case QuadricType::Plane: return V4(1, 0, 0, 0);
    case QuadricType::Cylinder: return V4(1, 1, 0, -1);
    case QuadricType::Cone: return V4(1, 1, -1, 0);
    case QuadricType::Ellipsoid: return V4(1, 1, 1, -1);
  }
  return V4::Zero();
}

template <typename Scalar>
Matrix4<Scalar> canonical_matrix(QuadricType type) {
  return canonical_diagonal<Scalar>(type).asDiagonal();
}

/// Which canonical axes carry a meaningful scale (column I^s).
inline AxisMask scale_mask(QuadricType type) {
  switch (type) {
    case QuadricType::Point:
    case QuadricType::Line:
    case QuadricType::Plane: return AxisMask(0, 0, 0);
    case QuadricType::Cylinder:
    case QuadricType::Cone: return AxisMask(1, 1, 0);
    case QuadricType::Ellipsoid: return AxisMask(1, 1, 1);
  }
  return AxisMask(0, 0, 0);
}

/// Canonical axes whose E-eigenvalue is structurally zero.
inline AxisMask zero_eigenvalue_mask(QuadricType type) {
  switch (type) {
    case QuadricType::Point:
    case QuadricType::Cone:
    case QuadricType::Ellipsoid: return AxisMask(0, 0, 0);
    case QuadricType::Line:
    case QuadricType::Cylinder: return AxisMask(0, 0, 1);
    case QuadricType::Plane: return AxisMask(0, 1, 1);
  }
  return AxisMask(0, 0, 0);
}

/// Relative thresholds for treating eigenvalues as zero / equal.
struct ToleranceConfig {
  double zero_rel = 1e-8;  // |λ| <= zero_rel * max|λ|  =>  zero
  double eq_rel = 1e-6;    // |λi - λj| <= eq_rel * max|λ|  =>  equal
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Eigenvalue pattern matches none of the six supported types.
struct UnclassifiableError : Error {
  using Error::Error;
};

/// Taubin distance requested at a singular point of the surface.
struct DegenerateGradientError : Error {
  using Error::Error;
};

/// H + lambda*I was not positive definite.
struct FactorizationFailedError : Error {
  using Error::Error;
};

}  // namespace qslam
