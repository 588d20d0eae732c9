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

#include <Eigen/Geometry>

#include "qslam/types.hpp"

namespace qslam {

/// Rigid transform. The quaternion is authoritative for serialization (text
/// files re-emit it verbatim); the rotation matrix is derived at construction
/// and used by all math.
template <typename Scalar>
struct Pose {
  Eigen::Quaternion<Scalar> quaternion = Eigen::Quaternion<Scalar>::Identity();
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();

  Pose() = default;

  static Pose identity() { return Pose(); }

  /// Keeps q exactly as given; the matrix is built from the normalized copy.
  static Pose from_quaternion(const Eigen::Quaternion<Scalar>& q,
                              const Vector3<Scalar>& t) {
    Pose p;
    p.quaternion = q;
    p.rotation = q.normalized().toRotationMatrix();
    p.translation = t;
    return p;
  }

  /// Derives a canonical (w >= 0) unit quaternion from R.
  static Pose from_matrix(const Matrix3<Scalar>& R, const Vector3<Scalar>& t) {
    Pose p;
    Eigen::Quaternion<Scalar> q(R);
    if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
    p.quaternion = q;
    p.rotation = R;
    p.translation = t;
    return p;
  }

  Pose inverse() const {
    return from_matrix(rotation.transpose(),
                       Vector3<Scalar>(-(rotation.transpose() * translation)));
  }

  /// Composition of point maps: (a*b)(x) = a(b(x)).
  Pose operator*(const Pose& other) const {
    return from_matrix(Matrix3<Scalar>(rotation * other.rotation),
                       Vector3<Scalar>(rotation * other.translation + translation));
  }

  Vector3<Scalar> operator*(const Vector3<Scalar>& x) const {
    return rotation * x + translation;
  }
};

using Posed = Pose<double>;

}  // namespace qslam
