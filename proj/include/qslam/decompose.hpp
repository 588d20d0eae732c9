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

#include <algorithm>
#include <array>
#include <cmath>

#include "qslam/quadric.hpp"
#include "qslam/state.hpp"
#include "qslam/types.hpp"

namespace qslam {

/// Constraint set extracted from one observed quadric: activation masks,
/// eigenvector frame V, eigenvalues, and the linear block of the normalized
/// matrix. V columns are unit, mutually orthogonal and det(V) = +1.
template <typename Scalar>
struct ConstraintTuple {
  AxisMask rot_active = AxisMask(0, 0, 0);    // I^R
  AxisMask trans_active = AxisMask(0, 0, 0);  // I^t
  AxisMask scale_active = AxisMask(0, 0, 0);  // I^s
  Matrix3<Scalar> V = Matrix3<Scalar>::Identity();
  Vector3<Scalar> lambda = Vector3<Scalar>::Zero();
  Vector3<Scalar> l = Vector3<Scalar>::Zero();
};

using ConstraintTupled = ConstraintTuple<double>;

/// Translation flags: lambda_i != 0. Rotation flags from eigenvalue
/// distinctness: all distinct -> all active; exactly one tied pair -> only the
/// remaining axis active; all tied -> none. Equality is chained so that a
/// near-tie chain collapses to one class.
template <typename Scalar>
std::pair<AxisMask, AxisMask> degeneration_indicators(const Vector3<Scalar>& lambda,
                                                      const ToleranceConfig& tol = {}) {
  const Scalar max_abs = lambda.cwiseAbs().maxCoeff();
  AxisMask trans(0, 0, 0);
  AxisMask rot(0, 0, 0);
  if (!(max_abs > Scalar(0))) {
    return {rot, trans};
  }
  const Scalar eps0 = tol.zero_rel * max_abs;
  for (int i = 0; i < 3; ++i) {
    trans[i] = std::abs(lambda[i]) > eps0 ? 1 : 0;
  }

  const Scalar eps_eq = tol.eq_rel * max_abs;
  std::array<int, 3> cls = {0, 1, 2};
  auto root = [&](int i) {
    while (cls[i] != i) i = cls[i];
    return i;
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(lambda[i] - lambda[j]) <= eps_eq) {
        cls[root(j)] = root(i);
      }
    }
  }
  std::array<int, 3> size = {0, 0, 0};
  for (int i = 0; i < 3; ++i) ++size[root(i)];
  const int num_classes = (size[0] > 0) + (size[1] > 0) + (size[2] > 0);
  if (num_classes == 3) {
    rot = AxisMask(1, 1, 1);
  } else if (num_classes == 2) {
    for (int i = 0; i < 3; ++i) {
      rot[i] = (size[root(i)] == 1) ? 1 : 0;
    }
  }
  return {rot, trans};
}

namespace detail {

/// Canonical axis ordering: zero eigenvalues go to the slots where the type's
/// canonical C has zeros, a cone's negative eigenvalue to slot 3, and the
/// remaining positives descend by magnitude. Ties keep solver order.
template <typename Scalar>
std::array<int, 3> canonical_order(const Vector3<Scalar>& lam, QuadricType type,
                                   const ToleranceConfig& tol) {
  const Scalar eps0 = tol.zero_rel * lam.cwiseAbs().maxCoeff();
  // category: 0 = positive slot, 1 = negative slot (cone), 2 = zero slot
  auto category = [&](int i) {
    if (std::abs(lam[i]) <= eps0) return 2;
    return lam[i] > Scalar(0) ? 0 : 1;
  };
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const int ca = category(a), cb = category(b);
    if (ca != cb) return ca < cb;
    if (ca == 0) return lam[a] > lam[b];
    return false;
  });

  // Validate the resulting pattern against the type.
  const AxisMask zero_slots = zero_eigenvalue_mask(type);
  for (int slot = 0; slot < 3; ++slot) {
    const int cat = category(order[slot]);
    int expected;
    if (zero_slots[slot]) {
      expected = 2;
    } else if (type == QuadricType::Cone && slot == 2) {
      expected = 1;
    } else {
      expected = 0;
    }
    if (cat != expected) {
      throw UnclassifiableError(
          "decompose: eigenvalue pattern does not match type " +
          std::string(to_string(type)));
    }
  }
  return order;
}

/// Deterministic eigenvector signs: each column's largest-magnitude entry made
/// positive; if det then is -1, the most degenerate column (smallest |lambda|,
/// last index on ties) is flipped back to restore det = +1.
template <typename Scalar>
void canonicalize_eigenvectors(Matrix3<Scalar>& V, const Vector3<Scalar>& lam) {
  for (int c = 0; c < 3; ++c) {
    int imax = 0;
    for (int r = 1; r < 3; ++r) {
      if (std::abs(V(r, c)) > std::abs(V(imax, c))) imax = r;
    }
    if (V(imax, c) < Scalar(0)) V.col(c) = -V.col(c);
  }
  if (V.determinant() < Scalar(0)) {
    int flip = 0;
    for (int i = 1; i < 3; ++i) {
      if (std::abs(lam[i]) <= std::abs(lam[flip])) flip = i;
    }
    V.col(flip) = -V.col(flip);
  }
}

}  // namespace detail

/// Normalizes Q, eigendecomposes its E block, restores the canonical axis
/// order and emits the constraint tuple. Throws UnclassifiableError when the
/// eigenvalue pattern contradicts the declared type.
template <typename Scalar>
ConstraintTuple<Scalar> decompose(const Matrix4<Scalar>& Q, QuadricType type,
                                  const ToleranceConfig& tol = {}) {
  const Matrix4<Scalar> Qn = normalize(Q, type, tol);
  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> es(quadric_E(Qn));
  const Vector3<Scalar> lam_raw = es.eigenvalues();
  const Matrix3<Scalar> V_raw = es.eigenvectors();

  const std::array<int, 3> order = detail::canonical_order(lam_raw, type, tol);
  ConstraintTuple<Scalar> tuple;
  for (int slot = 0; slot < 3; ++slot) {
    tuple.lambda[slot] = lam_raw[order[slot]];
    tuple.V.col(slot) = V_raw.col(order[slot]);
  }
  detail::canonicalize_eigenvectors(tuple.V, tuple.lambda);

  auto [rot, trans] = degeneration_indicators(tuple.lambda, tol);
  tuple.rot_active = rot;
  tuple.trans_active = trans;
  tuple.scale_active = scale_mask(type);
  tuple.l = quadric_l(Qn);
  return tuple;
}

/// Minimum-norm state consistent with a tuple: R = V, t from the active
/// constraining planes (free components zero), semi-axes from the eigenvalues
/// on scale-active axes.
template <typename Scalar>
QuadricState<Scalar> state_from_tuple(const ConstraintTuple<Scalar>& tuple,
                                      QuadricType type) {
  Vector3<Scalar> t = Vector3<Scalar>::Zero();
  for (int i = 0; i < 3; ++i) {
    if (tuple.trans_active[i]) {
      const Vector3<Scalar> v = tuple.V.col(i);
      t += v * (-v.dot(tuple.l) / tuple.lambda[i]);
    }
  }
  Vector3<Scalar> axes = Vector3<Scalar>::Ones();
  const AxisMask smask = scale_mask(type);
  for (int i = 0; i < 3; ++i) {
    if (smask[i]) {
      axes[i] = Scalar(1) / std::sqrt(std::abs(tuple.lambda[i]));
    }
  }
  return QuadricState<Scalar>::from_semi_axes(type, tuple.V, t, axes);
}

}  // namespace qslam
