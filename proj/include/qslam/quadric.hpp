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

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "qslam/pose.hpp"
#include "qslam/state.hpp"
#include "qslam/types.hpp"

namespace qslam {

// A quadric is the zero set of x^T Q x with x homogeneous and Q 4x4 symmetric,
// defined up to a nonzero scalar multiple. The 10-vector ordering is
// (A,B,C,D,E,F,G,H,I,J) with off-diagonal coefficients appearing once in the
// vector and twice (symmetrically) in the matrix.

template <typename Scalar>
Matrix4<Scalar> wedge(const Vector10<Scalar>& q) {
  Matrix4<Scalar> Q;
  Q << q[0], q[3], q[5], q[6],
       q[3], q[1], q[4], q[7],
       q[5], q[4], q[2], q[8],
       q[6], q[7], q[8], q[9];
  return Q;
}

template <typename Scalar>
Vector10<Scalar> vee(const Matrix4<Scalar>& Q) {
  const Scalar asym = (Q - Q.transpose()).template lpNorm<Eigen::Infinity>();
  if (!(asym <= Scalar(1e-9))) {
    throw Error("vee: matrix is not symmetric (max asymmetry " +
                std::to_string(static_cast<double>(asym)) + ")");
  }
  Vector10<Scalar> q;
  q << Q(0, 0), Q(1, 1), Q(2, 2), Q(0, 1), Q(1, 2), Q(0, 2), Q(0, 3), Q(1, 3),
      Q(2, 3), Q(3, 3);
  return q;
}

template <typename Scalar>
Matrix3<Scalar> quadric_E(const Matrix4<Scalar>& Q) {
  return Q.template topLeftCorner<3, 3>();
}

template <typename Scalar>
Vector3<Scalar> quadric_l(const Matrix4<Scalar>& Q) {
  return Q.template topRightCorner<3, 1>();
}

template <typename Scalar>
Scalar quadric_k(const Matrix4<Scalar>& Q) {
  return Q(3, 3);
}

/// Q = T^{-T} S^T C S T^{-1} built block-wise from the state.
template <typename Scalar>
Matrix4<Scalar> compose(const QuadricState<Scalar>& state) {
  if (!state.all_finite()) {
    throw Error("compose: non-finite state entries");
  }
  const Eigen::Matrix<Scalar, 4, 1> c = canonical_diagonal<Scalar>(state.type);
  Vector3<Scalar> d;
  for (int i = 0; i < 3; ++i) {
    d[i] = c[i] * state.inv_scale[i] * state.inv_scale[i];
  }
  const Matrix3<Scalar>& R = state.rotation;
  const Vector3<Scalar>& t = state.translation;
  const Matrix3<Scalar> E = R * d.asDiagonal() * R.transpose();
  const Vector3<Scalar> l = -E * t;
  const Scalar k = t.dot(E * t) + c[3];
  Matrix4<Scalar> Q;
  Q.template topLeftCorner<3, 3>() = Scalar(0.5) * (E + E.transpose());
  Q.template topRightCorner<3, 1>() = l;
  Q.template bottomLeftCorner<1, 3>() = l.transpose();
  Q(3, 3) = k;
  return Q;
}

/// Q' = T^{-T} Q T^{-1}: the quadric as seen in the frame where the original
/// frame's content appears moved by T.
template <typename Scalar>
Matrix4<Scalar> transform(const Matrix4<Scalar>& Q, const Pose<Scalar>& T) {
  const Matrix3<Scalar> E = quadric_E(Q);
  const Vector3<Scalar> l = quadric_l(Q);
  const Scalar k = quadric_k(Q);
  const Matrix3<Scalar>& R = T.rotation;
  const Vector3<Scalar>& t = T.translation;
  Matrix3<Scalar> E2 = R * E * R.transpose();
  E2 = Scalar(0.5) * (E2 + E2.transpose());
  const Vector3<Scalar> Rl = R * l;
  const Vector3<Scalar> l2 = -E2 * t + Rl;
  const Scalar k2 = t.dot(E2 * t) - Scalar(2) * t.dot(Rl) + k;
  Matrix4<Scalar> out;
  out.template topLeftCorner<3, 3>() = E2;
  out.template topRightCorner<3, 1>() = l2;
  out.template bottomLeftCorner<1, 3>() = l2.transpose();
  out(3, 3) = k2;
  return out;
}

/// T_r^T Q T_r: quadric re-expressed in the body frame of the given pose.
template <typename Scalar>
Matrix4<Scalar> to_body_frame(const Matrix4<Scalar>& Q_world, const Pose<Scalar>& robot) {
  return transform(Q_world, robot.inverse());
}

namespace detail {

template <typename Scalar>
Vector3<Scalar> eigenvalues_E(const Matrix4<Scalar>& Q) {
  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> es(quadric_E(Q),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

struct SignPattern {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

template <typename Derived>
SignPattern sign_pattern(const Eigen::MatrixBase<Derived>& eigenvalues,
                         double zero_rel) {
  SignPattern p;
  const double max_abs = eigenvalues.cwiseAbs().maxCoeff();
  const double eps = zero_rel * max_abs;
  for (int i = 0; i < eigenvalues.size(); ++i) {
    const double v = static_cast<double>(eigenvalues[i]);
    if (std::abs(v) <= eps) {
      ++p.zero;
    } else if (v > 0) {
      ++p.positive;
    } else {
      ++p.negative;
    }
  }
  return p;
}

/// Number of structurally nonzero eigenvalues of the full 4x4 matrix.
inline int nominal_rank(QuadricType type) {
  switch (type) {
    case QuadricType::Point: return 3;
    case QuadricType::Line: return 2;
    case QuadricType::Plane: return 1;
    case QuadricType::Cylinder: return 3;
    case QuadricType::Cone: return 3;
    case QuadricType::Ellipsoid: return 4;
  }
  return 0;
}

}  // namespace detail

/// Removes the projective scale (and sign) ambiguity of Q for a known type.
///
/// Ellipsoid/cylinder: scale by |prod nonzero eig(E) / prod nonzero eig(Q)|.
/// Cone: scale so the negative eigenvalue of E is -1. Point/line/plane carry
/// no scale freedom in the eigenvalue ratio (equal nonzero counts), so the
/// nonzero eig(E) are brought to unit geometric mean, the fixed point of the
/// composed form. Sign is flipped so eig(E) matches the canonical pattern.
template <typename Scalar>
Matrix4<Scalar> normalize(const Matrix4<Scalar>& Q, QuadricType type,
                          const ToleranceConfig& tol = {}) {
  Vector3<Scalar> lamE = detail::eigenvalues_E(Q);
  const Scalar max_abs_E = lamE.cwiseAbs().maxCoeff();
  if (!(max_abs_E > Scalar(0))) {
    throw UnclassifiableError("normalize: E block is identically zero");
  }

  const detail::SignPattern pe = detail::sign_pattern(lamE, tol.zero_rel);
  Scalar sign = Scalar(1);
  if (pe.negative > pe.positive) {
    sign = Scalar(-1);
    lamE = -lamE;
  }

  Scalar factor = Scalar(1);
  switch (type) {
    case QuadricType::Ellipsoid: {
      const Scalar det_q = (sign * Q).determinant();
      if (std::abs(det_q) <= Scalar(0)) {
        throw UnclassifiableError("normalize: singular Q for ellipsoid");
      }
      factor = std::abs(lamE.prod() / det_q);
      break;
    }
    case QuadricType::Cylinder: {
      Eigen::SelfAdjointEigenSolver<Matrix4<Scalar>> es(sign * Q,
                                                        Eigen::EigenvaluesOnly);
      Eigen::Matrix<Scalar, 4, 1> lamQ = es.eigenvalues();
      std::array<Scalar, 4> mags;
      for (int i = 0; i < 4; ++i) mags[i] = std::abs(lamQ[i]);
      std::sort(mags.begin(), mags.end(), std::greater<Scalar>());
      const Scalar prod_q = mags[0] * mags[1] * mags[2];
      if (!(prod_q > Scalar(0))) {
        throw UnclassifiableError("normalize: rank-deficient Q for cylinder");
      }
      std::array<Scalar, 3> emags{std::abs(lamE[0]), std::abs(lamE[1]),
                                  std::abs(lamE[2])};
      std::sort(emags.begin(), emags.end(), std::greater<Scalar>());
      factor = emags[0] * emags[1] / prod_q;
      break;
    }
    case QuadricType::Cone: {
      const Scalar neg = lamE.minCoeff();
      if (!(neg < -tol.zero_rel * max_abs_E)) {
        throw UnclassifiableError("normalize: cone has no negative E eigenvalue");
      }
      factor = Scalar(1) / std::abs(neg);
      break;
    }
    case QuadricType::Point:
    case QuadricType::Line:
    case QuadricType::Plane: {
      const int n = 3 - zero_eigenvalue_mask(type).sum();
      std::array<Scalar, 3> emags{std::abs(lamE[0]), std::abs(lamE[1]),
                                  std::abs(lamE[2])};
      std::sort(emags.begin(), emags.end(), std::greater<Scalar>());
      Scalar prod = Scalar(1);
      for (int i = 0; i < n; ++i) prod *= emags[i];
      if (!(prod > Scalar(0))) {
        throw UnclassifiableError("normalize: zero nominal eigenvalues");
      }
      factor = std::pow(prod, Scalar(-1) / Scalar(n));
      break;
    }
  }
  return (sign * factor) * Q;
}

/// Semi-axes sqrt(|1/lambda_i|) from a normalized quadric, ascending among the
/// nonzero eigenvalues; zero eigenvalues produce mask 0 (and value 0).
template <typename Scalar>
std::pair<Vector3<Scalar>, AxisMask> recover_scale(const Matrix4<Scalar>& Q_normalized,
                                                   const ToleranceConfig& tol = {}) {
  const Vector3<Scalar> lam = detail::eigenvalues_E(Q_normalized);
  const Scalar eps = tol.zero_rel * lam.cwiseAbs().maxCoeff();
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(lam[a]) > std::abs(lam[b]);
  });
  Vector3<Scalar> axes = Vector3<Scalar>::Zero();
  AxisMask mask(0, 0, 0);
  for (int k = 0; k < 3; ++k) {
    const Scalar v = lam[order[k]];
    if (std::abs(v) > eps) {
      axes[k] = Scalar(1) / std::sqrt(std::abs(v));
      mask[k] = 1;
    }
  }
  return {axes, mask};
}

/// Identifies the type from the sign/zero pattern of eig(E) together with the
/// rank and signature of Q (both congruence invariants). Patterns outside the
/// six supported primitives are rejected.
template <typename Scalar>
QuadricType classify(const Matrix4<Scalar>& Q, const ToleranceConfig& tol = {}) {
  const Vector3<Scalar> lamE_raw = detail::eigenvalues_E(Q);
  const Scalar max_abs_E = lamE_raw.cwiseAbs().maxCoeff();
  if (!(max_abs_E > Scalar(0))) {
    throw UnclassifiableError("classify: E block is identically zero");
  }
  detail::SignPattern pe = detail::sign_pattern(lamE_raw, tol.zero_rel);
  Scalar sign = Scalar(1);
  if (pe.negative > pe.positive) {
    sign = Scalar(-1);
    std::swap(pe.positive, pe.negative);
  }

  Eigen::SelfAdjointEigenSolver<Matrix4<Scalar>> es(sign * Q, Eigen::EigenvaluesOnly);
  const detail::SignPattern pq = detail::sign_pattern(es.eigenvalues(), tol.zero_rel);

  if (pe.positive == 3) {
    if (pq.positive == 3 && pq.negative == 1) return QuadricType::Ellipsoid;
    if (pq.positive == 3 && pq.zero == 1) return QuadricType::Point;
  } else if (pe.positive == 2 && pe.zero == 1) {
    if (pq.positive == 2 && pq.negative == 1 && pq.zero == 1) return QuadricType::Cylinder;
    if (pq.positive == 2 && pq.zero == 2) return QuadricType::Line;
  } else if (pe.positive == 2 && pe.negative == 1) {
    if (pq.positive == 2 && pq.negative == 1 && pq.zero == 1) return QuadricType::Cone;
  } else if (pe.positive == 1 && pe.zero == 2) {
    if (pq.positive == 1 && pq.zero == 3) return QuadricType::Plane;
  }
  throw UnclassifiableError("classify: eigenvalue pattern matches no supported type");
}

/// First-order algebraic distance |x^T Q x| / ||grad|| with grad = 2(E p + l).
template <typename Scalar>
Scalar taubin_distance(const Vector3<Scalar>& point, const Matrix4<Scalar>& Q) {
  const Matrix3<Scalar> E = quadric_E(Q);
  const Vector3<Scalar> l = quadric_l(Q);
  const Scalar value =
      point.dot(E * point) + Scalar(2) * l.dot(point) + quadric_k(Q);
  const Vector3<Scalar> grad = Scalar(2) * (E * point + l);
  const Scalar grad_norm = grad.norm();
  if (grad_norm < Scalar(1e-12)) {
    throw DegenerateGradientError("taubin_distance: zero gradient at point");
  }
  return std::abs(value) / grad_norm;
}

/// Unit Euclidean norm with the first nonzero entry positive; the common
/// projective gauge for comparing and differencing quadric vectors.
template <typename Scalar>
Vector10<Scalar> normalized_quadric_vector(const Vector10<Scalar>& q) {
  const Scalar n = q.norm();
  if (!(n > Scalar(0))) {
    throw Error("normalized_quadric_vector: zero vector");
  }
  Vector10<Scalar> u = q / n;
  for (int i = 0; i < 10; ++i) {
    if (std::abs(u[i]) > Scalar(1e-12)) {
      if (u[i] < Scalar(0)) u = -u;
      break;
    }
  }
  return u;
}

}  // namespace qslam
