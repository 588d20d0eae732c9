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

#include <cmath>

#include "qslam/pose.hpp"
#include "qslam/types.hpp"

namespace qslam {

/// Decomposed landmark state: type, local-frame pose and per-axis scale.
///
/// Scale is carried twice: semi_axes (meters) are authoritative for I/O and
/// reporting, inv_scale = 1/semi_axes drives the residuals (Table-style
/// S = diag(1/a, 1/b, 1/c, 1)). Axes whose scale mask is 0 hold 1 in both and
/// are semantically inert.
template <typename Scalar>
struct QuadricState {
  QuadricType type = QuadricType::Ellipsoid;
  Eigen::Quaternion<Scalar> quaternion = Eigen::Quaternion<Scalar>::Identity();
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();
  Vector3<Scalar> semi_axes = Vector3<Scalar>::Ones();
  Vector3<Scalar> inv_scale = Vector3<Scalar>::Ones();

  QuadricState() = default;

  static QuadricState from_semi_axes(QuadricType type, const Matrix3<Scalar>& R,
                                     const Vector3<Scalar>& t,
                                     const Vector3<Scalar>& axes) {
    QuadricState s = pose_only(type, R, t);
    s.set_semi_axes(axes);
    return s;
  }

  static QuadricState from_inv_scale(QuadricType type, const Matrix3<Scalar>& R,
                                     const Vector3<Scalar>& t,
                                     const Vector3<Scalar>& inv) {
    QuadricState s = pose_only(type, R, t);
    s.set_inv_scale(inv);
    return s;
  }

  /// Preserves q verbatim (parsing path).
  static QuadricState from_quaternion_semi_axes(QuadricType type,
                                                const Eigen::Quaternion<Scalar>& q,
                                                const Vector3<Scalar>& t,
                                                const Vector3<Scalar>& axes) {
    QuadricState s;
    s.type = type;
    s.quaternion = q;
    s.rotation = q.normalized().toRotationMatrix();
    s.translation = t;
    s.set_semi_axes(axes);
    return s;
  }

  void set_semi_axes(const Vector3<Scalar>& axes) {
    const AxisMask mask = scale_mask(type);
    for (int i = 0; i < 3; ++i) {
      semi_axes[i] = mask[i] ? axes[i] : Scalar(1);
      inv_scale[i] = mask[i] ? Scalar(1) / axes[i] : Scalar(1);
    }
  }

  void set_inv_scale(const Vector3<Scalar>& inv) {
    const AxisMask mask = scale_mask(type);
    for (int i = 0; i < 3; ++i) {
      inv_scale[i] = mask[i] ? inv[i] : Scalar(1);
      semi_axes[i] = mask[i] ? Scalar(1) / inv[i] : Scalar(1);
    }
  }

  Pose<Scalar> pose() const {
    Pose<Scalar> p;
    p.quaternion = quaternion;
    p.rotation = rotation;
    p.translation = translation;
    return p;
  }

  bool all_finite() const {
    return rotation.allFinite() && translation.allFinite() && inv_scale.allFinite();
  }

 private:
  static QuadricState pose_only(QuadricType type, const Matrix3<Scalar>& R,
                                const Vector3<Scalar>& t) {
    QuadricState s;
    s.type = type;
    Eigen::Quaternion<Scalar> q(R);
    if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
    s.quaternion = q;
    s.rotation = R;
    s.translation = t;
    return s;
  }
};

using QuadricStated = QuadricState<double>;

}  // namespace qslam
