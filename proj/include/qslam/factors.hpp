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
#include <utility>

#include "qslam/decompose.hpp"
#include "qslam/quadric.hpp"
#include "qslam/so3.hpp"

namespace qslam {

// Decomposed residual layout (15): rows 0..8 are the row-major vectorization
// of the 3x3 direction-alignment matrix (row i = v_i x (R_r^T R_q u_i)), rows
// 9..11 the constraining-plane residuals, rows 12..14 the scale residuals
// s_i^2 - lambda_i. Rows with inactive indicators are exactly zero.

template <typename Scalar>
using Vector15 = Eigen::Matrix<Scalar, 15, 1>;
template <typename Scalar>
using PoseJacobian = Eigen::Matrix<Scalar, 15, 6>;      // d e / d [w_r, t_r]
template <typename Scalar>
using LandmarkJacobian = Eigen::Matrix<Scalar, 15, 9>;  // d e / d [w_q, t_q, s_q]

/// Per-component information weights for the diagonal Omega.
struct OmegaConfig {
  double rotation = 1.0;
  double translation = 1.0;
  double scale = 1.0;
};

template <typename Scalar>
struct DecomposedObservation {
  ConstraintTuple<Scalar> tuple;
  Vector15<Scalar> omega = Vector15<Scalar>::Ones();  // diagonal of the info matrix
};

using DecomposedObservationd = DecomposedObservation<double>;

/// tanh(N): grows with the supporting point count, saturating below 1.
inline double shape_weight(long long point_count) {
  return std::tanh(static_cast<double>(point_count));
}

/// Omega = weight * diag(sigma_inv blocks), rows of inactive constraints zeroed.
template <typename Scalar>
DecomposedObservation<Scalar> make_decomposed_observation(
    const ConstraintTuple<Scalar>& tuple, double weight,
    const OmegaConfig& config = {}) {
  DecomposedObservation<Scalar> obs;
  obs.tuple = tuple;
  for (int i = 0; i < 3; ++i) {
    const Scalar rot = tuple.rot_active[i] ? Scalar(weight * config.rotation) : Scalar(0);
    obs.omega.template segment<3>(3 * i).setConstant(rot);
    obs.omega[9 + i] = tuple.trans_active[i] ? Scalar(weight * config.translation) : Scalar(0);
    obs.omega[12 + i] = tuple.scale_active[i] ? Scalar(weight * config.scale) : Scalar(0);
  }
  return obs;
}

namespace detail {

template <typename Scalar>
void check_observation_matches(const QuadricState<Scalar>& landmark,
                               const ConstraintTuple<Scalar>& tuple) {
  const AxisMask smask = scale_mask(landmark.type);
  const AxisMask zmask = zero_eigenvalue_mask(landmark.type);
  for (int i = 0; i < 3; ++i) {
    if (tuple.scale_active[i] != smask[i] ||
        tuple.trans_active[i] != 1 - zmask[i]) {
      throw Error("observation indicator pattern does not match landmark type " +
                  std::string(to_string(landmark.type)));
    }
  }
}

}  // namespace detail

/// Geometric error of one decomposed observation (expressed in the robot's
/// body frame) against the current robot pose and world-frame landmark state.
template <typename Scalar>
Vector15<Scalar> error_decomposed(const Pose<Scalar>& robot,
                                  const QuadricState<Scalar>& landmark,
                                  const DecomposedObservation<Scalar>& obs) {
  detail::check_observation_matches(landmark, obs.tuple);
  const ConstraintTuple<Scalar>& c = obs.tuple;
  const Matrix3<Scalar> delta_R = robot.rotation.transpose() * landmark.rotation;

  Vector15<Scalar> e = Vector15<Scalar>::Zero();
  for (int i = 0; i < 3; ++i) {
    if (c.rot_active[i]) {
      e.template segment<3>(3 * i) =
          Vector3<Scalar>(c.V.col(i)).cross(Vector3<Scalar>(delta_R.col(i)));
    }
  }
  // Rows follow the linearized form: the constraint direction is the
  // landmark's own axis, lambda and l come from the observation.
  const Vector3<Scalar> d_local =
      landmark.rotation.transpose() * (landmark.translation - robot.translation);
  const Vector3<Scalar> l_local =
      landmark.rotation.transpose() * (robot.rotation * c.l);
  for (int i = 0; i < 3; ++i) {
    if (c.trans_active[i]) {
      e[9 + i] = c.lambda[i] * d_local[i] + l_local[i];
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (c.scale_active[i]) {
      e[12 + i] = landmark.inv_scale[i] * landmark.inv_scale[i] - c.lambda[i];
    }
  }
  return e;
}

/// All analytic Jacobian blocks of error_decomposed, with the zero-block
/// pattern and indicator masking applied. Tangent convention is
/// right-multiplicative for both rotations, additive for translations and
/// inverse scales.
template <typename Scalar>
std::pair<PoseJacobian<Scalar>, LandmarkJacobian<Scalar>> analytic_jacobians(
    const Pose<Scalar>& robot, const QuadricState<Scalar>& landmark,
    const DecomposedObservation<Scalar>& obs) {
  detail::check_observation_matches(landmark, obs.tuple);
  const ConstraintTuple<Scalar>& c = obs.tuple;
  const Matrix3<Scalar>& R_r = robot.rotation;
  const Matrix3<Scalar>& R_q = landmark.rotation;
  const Matrix3<Scalar> delta_R = R_r.transpose() * R_q;

  PoseJacobian<Scalar> J_r = PoseJacobian<Scalar>::Zero();
  LandmarkJacobian<Scalar> J_q = LandmarkJacobian<Scalar>::Zero();

  for (int i = 0; i < 3; ++i) {
    if (!c.rot_active[i]) continue;
    const Matrix3<Scalar> v_hat = hat(Vector3<Scalar>(c.V.col(i)));
    J_r.template block<3, 3>(3 * i, 0) =
        v_hat * hat(Vector3<Scalar>(delta_R.col(i)));
    Vector3<Scalar> u = Vector3<Scalar>::Zero();
    u[i] = Scalar(1);
    J_q.template block<3, 3>(3 * i, 0) = -v_hat * delta_R * hat(u);
  }

  const Vector3<Scalar> d_local =
      R_q.transpose() * (landmark.translation - robot.translation);
  const Matrix3<Scalar> m_robot = R_q.transpose() * R_r * hat(Vector3<Scalar>(c.l));
  const Matrix3<Scalar> d_hat = hat(d_local);
  const Matrix3<Scalar> l_hat = hat(Vector3<Scalar>(R_q.transpose() * (R_r * c.l)));
  const Matrix3<Scalar> Rq_T = R_q.transpose();
  for (int i = 0; i < 3; ++i) {
    if (!c.trans_active[i]) continue;
    J_r.template block<1, 3>(9 + i, 0) = -m_robot.row(i);
    J_r.template block<1, 3>(9 + i, 3) = -c.lambda[i] * Rq_T.row(i);
    J_q.template block<1, 3>(9 + i, 0) = c.lambda[i] * d_hat.row(i) + l_hat.row(i);
    J_q.template block<1, 3>(9 + i, 3) = c.lambda[i] * Rq_T.row(i);
  }

  for (int i = 0; i < 3; ++i) {
    if (c.scale_active[i]) {
      J_q(12 + i, 6 + i) = Scalar(2) * landmark.inv_scale[i];
    }
  }
  return {J_r, J_q};
}

/// Algebraic error of the full parameterization: both vectors are brought to
/// the unit-norm sign-canonical gauge before differencing.
template <typename Scalar>
Vector10<Scalar> error_full(const Pose<Scalar>& robot,
                            const Vector10<Scalar>& landmark_q,
                            const Vector10<Scalar>& observed_q) {
  const Matrix4<Scalar> body = to_body_frame(wedge(landmark_q), robot);
  return normalized_quadric_vector(observed_q) -
         normalized_quadric_vector(vee(body));
}

/// Algebraic error with the typed composition substituted for the raw vector.
template <typename Scalar>
Vector10<Scalar> error_regularized(const Pose<Scalar>& robot,
                                   const QuadricState<Scalar>& landmark,
                                   const Vector10<Scalar>& observed_q) {
  const Matrix4<Scalar> body = to_body_frame(compose(landmark), robot);
  return normalized_quadric_vector(observed_q) -
         normalized_quadric_vector(vee(body));
}

/// Right-multiplicative rotation retraction, additive translation.
template <typename Scalar>
Pose<Scalar> retract_pose(const Pose<Scalar>& p,
                          const Eigen::Matrix<Scalar, 6, 1>& delta) {
  return Pose<Scalar>::from_matrix(
      Matrix3<Scalar>(p.rotation * exp_so3(Vector3<Scalar>(delta.template head<3>()))),
      Vector3<Scalar>(p.translation + delta.template tail<3>()));
}

/// Tangent order [w_q, t_q, s_q]; inverse scales move additively.
template <typename Scalar>
QuadricState<Scalar> retract_state(const QuadricState<Scalar>& s,
                                   const Eigen::Matrix<Scalar, 9, 1>& delta) {
  return QuadricState<Scalar>::from_inv_scale(
      s.type,
      Matrix3<Scalar>(s.rotation * exp_so3(Vector3<Scalar>(delta.template head<3>()))),
      Vector3<Scalar>(s.translation + delta.template segment<3>(3)),
      Vector3<Scalar>(s.inv_scale + delta.template tail<3>()));
}

/// Central-difference Jacobians of an arbitrary error function on the
/// (pose, landmark) manifold pair. Oracle for the analytic blocks.
template <typename ErrorFn>
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> numeric_jacobian(
    const ErrorFn& error_fn, const Pose<double>& robot,
    const QuadricState<double>& landmark, double step) {
  if (!(step > 0)) {
    throw Error("numeric_jacobian: step must be positive");
  }
  const Eigen::VectorXd e0 = error_fn(robot, landmark);
  const auto rows = e0.size();
  Eigen::MatrixXd J_r(rows, 6), J_q(rows, 9);
  for (int k = 0; k < 6; ++k) {
    Vector6d delta = Vector6d::Zero();
    delta[k] = step;
    const Eigen::VectorXd plus = error_fn(retract_pose(robot, delta), landmark);
    delta[k] = -step;
    const Eigen::VectorXd minus = error_fn(retract_pose(robot, delta), landmark);
    J_r.col(k) = (plus - minus) / (2.0 * step);
  }
  for (int k = 0; k < 9; ++k) {
    Eigen::Matrix<double, 9, 1> delta = Eigen::Matrix<double, 9, 1>::Zero();
    delta[k] = step;
    const Eigen::VectorXd plus = error_fn(robot, retract_state(landmark, delta));
    delta[k] = -step;
    const Eigen::VectorXd minus = error_fn(robot, retract_state(landmark, delta));
    J_q.col(k) = (plus - minus) / (2.0 * step);
  }
  return {J_r, J_q};
}

}  // namespace qslam
