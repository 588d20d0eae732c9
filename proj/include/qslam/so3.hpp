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

#include "qslam/types.hpp"

namespace qslam {

template <typename Scalar>
Matrix3<Scalar> hat(const Vector3<Scalar>& w) {
  Matrix3<Scalar> m;
  m << Scalar(0), -w.z(), w.y(),
       w.z(), Scalar(0), -w.x(),
       -w.y(), w.x(), Scalar(0);
  return m;
}

/// Rodrigues formula.
template <typename Scalar>
Matrix3<Scalar> exp_so3(const Vector3<Scalar>& w) {
  const Scalar theta2 = w.squaredNorm();
  const Matrix3<Scalar> W = hat(w);
  if (theta2 < Scalar(1e-16)) {
    return Matrix3<Scalar>::Identity() + W + Scalar(0.5) * W * W;
  }
  const Scalar theta = std::sqrt(theta2);
  return Matrix3<Scalar>::Identity() + (std::sin(theta) / theta) * W +
         ((Scalar(1) - std::cos(theta)) / theta2) * W * W;
}

template <typename Scalar>
Vector3<Scalar> log_so3(const Matrix3<Scalar>& R) {
  const Scalar cos_theta =
      std::min(Scalar(1), std::max(Scalar(-1), (R.trace() - Scalar(1)) / Scalar(2)));
  const Scalar theta = std::acos(cos_theta);
  Vector3<Scalar> axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < Scalar(1e-10)) {
    return Scalar(0.5) * axis;
  }
  if (theta > Scalar(M_PI) - Scalar(1e-6)) {
    // Near pi the off-diagonal difference loses precision; use the symmetric part.
    Matrix3<Scalar> S = Scalar(0.5) * (R + Matrix3<Scalar>::Identity());
    int k;
    S.diagonal().maxCoeff(&k);
    Vector3<Scalar> v = S.col(k) / std::sqrt(S(k, k));
    v.normalize();
    if (axis.dot(v) < Scalar(0)) v = -v;
    return theta * v;
  }
  return (theta / (Scalar(2) * std::sin(theta))) * axis;
}

/// Inverse of the right Jacobian of SO(3); d/dw log(exp(phi)exp(w)) at w = 0.
template <typename Scalar>
Matrix3<Scalar> right_jacobian_inverse_so3(const Vector3<Scalar>& phi) {
  const Scalar theta2 = phi.squaredNorm();
  const Matrix3<Scalar> W = hat(phi);
  if (theta2 < Scalar(1e-14)) {
    return Matrix3<Scalar>::Identity() + Scalar(0.5) * W + W * W / Scalar(12);
  }
  const Scalar theta = std::sqrt(theta2);
  const Scalar c = Scalar(1) / theta2 -
                   (Scalar(1) + std::cos(theta)) / (Scalar(2) * theta * std::sin(theta));
  return Matrix3<Scalar>::Identity() + Scalar(0.5) * W + c * W * W;
}

}  // namespace qslam
