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

#include "qslam/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <set>
#include <string>

#include "qslam/graph_io.hpp"
#include "qslam/so3.hpp"

namespace qslam {

namespace {

Vector6d prior_error(const Posed& pose, const PosePrior& prior) {
  Vector6d e;
  e.head<3>() = log_so3<double>(prior.pose.rotation.transpose() * pose.rotation);
  e.tail<3>() = pose.translation - prior.pose.translation;
  return e;
}

Eigen::Matrix<double, 6, 6> prior_jacobian(const Posed& pose, const PosePrior& prior) {
  Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Identity();
  const Vector3d phi = log_so3<double>(prior.pose.rotation.transpose() * pose.rotation);
  J.topLeftCorner<3, 3>() = right_jacobian_inverse_so3(phi);
  return J;
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector q
/// (columns 1..9 of the Householder reflector sending e0 to -sign(q0) q).
Eigen::Matrix<double, 10, 9> tangent_basis(const Vector10d& q) {
  Vector10d v = q;
  v[0] += q[0] >= 0.0 ? 1.0 : -1.0;
  const double c = 2.0 / v.squaredNorm();
  Eigen::Matrix<double, 10, 10> H =
      Eigen::Matrix<double, 10, 10>::Identity() - c * (v * v.transpose());
  return H.rightCols<9>();
}

}  // namespace

NormalEquations::NormalEquations(int num_poses, int num_landmarks)
    : b(Eigen::VectorXd::Zero(6 * num_poses + 9 * num_landmarks)),
      num_poses_(num_poses),
      num_landmarks_(num_landmarks) {}

int NormalEquations::block_offset(int block) const {
  return block < num_poses_ ? 6 * block : 6 * num_poses_ + 9 * (block - num_poses_);
}

Eigen::MatrixXd& NormalEquations::block(int i, int j) {
  auto it = blocks_.find({i, j});
  if (it == blocks_.end()) {
    it = blocks_
             .emplace(std::make_pair(i, j),
                      Eigen::MatrixXd::Zero(block_width(i), block_width(j)))
             .first;
  }
  return it->second;
}

Eigen::SparseMatrix<double> NormalEquations::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& [key, m] : blocks_) {
    const int r0 = block_offset(key.first);
    const int c0 = block_offset(key.second);
    for (int c = 0; c < m.cols(); ++c) {
      for (int r = 0; r < m.rows(); ++r) {
        triplets.emplace_back(r0 + r, c0 + c, m(r, c));
      }
    }
  }
  Eigen::SparseMatrix<double> H(dim(), dim());
  H.setFromTriplets(triplets.begin(), triplets.end());
  return H;
}

Eigen::MatrixXd NormalEquations::to_dense() const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim(), dim());
  for (const auto& [key, m] : blocks_) {
    H.block(block_offset(key.first), block_offset(key.second), m.rows(), m.cols()) = m;
  }
  return H;
}

double NormalEquations::max_asymmetry() const {
  const Eigen::MatrixXd H = to_dense();
  return (H - H.transpose()).lpNorm<Eigen::Infinity>();
}

Problem::Problem(const FactorGraph& graph, const SolverOptions& options)
    : graph_(graph), options_(options) {
  graph_.check_indices();
  poses_ = graph_.poses;
  landmarks_ = graph_.landmarks;

  if (options_.param == Parameterization::Decomposed) {
    decomposed_.reserve(graph_.observations.size());
    for (const auto& obs : graph_.observations) {
      const ConstraintTupled tuple =
          decompose(wedge(obs.q), landmarks_[obs.landmark_id].type, options_.tol);
      decomposed_.push_back(
          make_decomposed_observation(tuple, obs.weight, options_.omega));
    }
  } else {
    observed_unit_.reserve(graph_.observations.size());
    for (const auto& obs : graph_.observations) {
      observed_unit_.push_back(normalized_quadric_vector(obs.q));
    }
    if (options_.param == Parameterization::Full) {
      full_vectors_.reserve(landmarks_.size());
      for (const auto& lm : landmarks_) {
        full_vectors_.push_back(normalized_quadric_vector(vee(compose(lm))));
      }
    }
  }
}

Eigen::VectorXd Problem::observation_error(int k) const {
  const GraphObservation& obs = graph_.observations[k];
  const Posed& pose = poses_[obs.pose_id];
  switch (options_.param) {
    case Parameterization::Decomposed:
      return error_decomposed(pose, landmarks_[obs.landmark_id], decomposed_[k]);
    case Parameterization::Full:
      return error_full(pose, full_vectors_[obs.landmark_id], observed_unit_[k]);
    case Parameterization::RegularizedFull:
      return error_regularized(pose, landmarks_[obs.landmark_id], observed_unit_[k]);
  }
  throw Error("unknown parameterization");
}

double Problem::cost() const {
  double total = 0.0;
  for (std::size_t k = 0; k < graph_.observations.size(); ++k) {
    const Eigen::VectorXd e = observation_error(static_cast<int>(k));
    if (options_.param == Parameterization::Decomposed) {
      total += e.dot(decomposed_[k].omega.asDiagonal() * e);
    } else {
      total += graph_.observations[k].weight * e.squaredNorm();
    }
  }
  for (const auto& prior : graph_.priors) {
    const Vector6d e = prior_error(poses_[prior.pose_id], prior);
    total += e.dot(prior.information.asDiagonal() * e);
  }
  return total;
}

void Problem::landmark_jacobian_full(int k, Eigen::MatrixXd& J_r,
                                     Eigen::MatrixXd& J_q) const {
  const GraphObservation& obs = graph_.observations[k];
  const Posed& pose = poses_[obs.pose_id];
  const Vector10d& q = full_vectors_[obs.landmark_id];
  const Vector10d& qbar = observed_unit_[k];
  const double h = options_.fd_step;

  J_r.resize(10, 6);
  for (int c = 0; c < 6; ++c) {
    Vector6d delta = Vector6d::Zero();
    delta[c] = h;
    const Vector10d plus = error_full(retract_pose(pose, delta), q, qbar);
    delta[c] = -h;
    const Vector10d minus = error_full(retract_pose(pose, delta), q, qbar);
    J_r.col(c) = (plus - minus) / (2.0 * h);
  }

  const Eigen::Matrix<double, 10, 9> basis = tangent_basis(q);
  J_q.resize(10, 9);
  for (int c = 0; c < 9; ++c) {
    const Vector10d plus =
        error_full(pose, normalized_quadric_vector(Vector10d(q + h * basis.col(c))), qbar);
    const Vector10d minus =
        error_full(pose, normalized_quadric_vector(Vector10d(q - h * basis.col(c))), qbar);
    J_q.col(c) = (plus - minus) / (2.0 * h);
  }
}

NormalEquations Problem::linearize() const {
  const int n = graph_.num_poses();
  NormalEquations eqs(n, graph_.num_landmarks());

  for (std::size_t k = 0; k < graph_.observations.size(); ++k) {
    const GraphObservation& obs = graph_.observations[k];
    const int bp = obs.pose_id;
    const int bl = n + obs.landmark_id;

    Eigen::MatrixXd J_r, J_q;
    Eigen::VectorXd e, omega;
    if (options_.param == Parameterization::Decomposed) {
      e = error_decomposed(poses_[obs.pose_id], landmarks_[obs.landmark_id],
                           decomposed_[k]);
      auto [jr, jq] = analytic_jacobians(poses_[obs.pose_id],
                                         landmarks_[obs.landmark_id], decomposed_[k]);
      J_r = jr;
      J_q = jq;
      omega = decomposed_[k].omega;
    } else {
      e = observation_error(static_cast<int>(k));
      if (options_.param == Parameterization::Full) {
        landmark_jacobian_full(static_cast<int>(k), J_r, J_q);
      } else {
        const QuadricStated& lm = landmarks_[obs.landmark_id];
        const Vector10d& qbar = observed_unit_[k];
        auto fn = [&qbar](const Posed& p, const QuadricStated& s) -> Eigen::VectorXd {
          return error_regularized(p, s, qbar);
        };
        auto [jr, jq] =
            numeric_jacobian(fn, poses_[obs.pose_id], lm, options_.fd_step);
        J_r = jr;
        J_q = jq;
      }
      omega = Eigen::VectorXd::Constant(10, obs.weight);
    }

    if (!J_r.allFinite() || !J_q.allFinite() || !e.allFinite()) {
      throw Error("non-finite jacobian at observation " + std::to_string(k) +
                  " (pose " + std::to_string(obs.pose_id) + ", landmark " +
                  std::to_string(obs.landmark_id) + ")");
    }

    const Eigen::MatrixXd JrW = omega.asDiagonal() * J_r;
    const Eigen::MatrixXd JqW = omega.asDiagonal() * J_q;
    eqs.block(bp, bp).noalias() += J_r.transpose() * JrW;
    eqs.block(bl, bl).noalias() += J_q.transpose() * JqW;
    eqs.block(bp, bl).noalias() += J_r.transpose() * JqW;
    eqs.block(bl, bp).noalias() += J_q.transpose() * JrW;
    eqs.b.segment<6>(6 * bp).noalias() += J_r.transpose() * (omega.asDiagonal() * e);
    eqs.b.segment<9>(eqs.block_offset(bl)).noalias() +=
        J_q.transpose() * (omega.asDiagonal() * e);
  }

  for (const auto& prior : graph_.priors) {
    const Vector6d e = prior_error(poses_[prior.pose_id], prior);
    const Eigen::Matrix<double, 6, 6> J = prior_jacobian(poses_[prior.pose_id], prior);
    const Eigen::Matrix<double, 6, 6> JW = prior.information.asDiagonal() * J;
    eqs.block(prior.pose_id, prior.pose_id).noalias() += J.transpose() * JW;
    eqs.b.segment<6>(6 * prior.pose_id).noalias() +=
        J.transpose() * (prior.information.asDiagonal() * e);
  }
  return eqs;
}

void Problem::retract(const Eigen::VectorXd& delta) {
  if (delta.size() != graph_.state_dimension()) {
    throw Error("retract: delta has wrong dimension");
  }
  const int n = graph_.num_poses();
  for (int i = 0; i < n; ++i) {
    poses_[i] = retract_pose(poses_[i], Vector6d(delta.segment<6>(6 * i)));
  }
  for (std::size_t j = 0; j < landmarks_.size(); ++j) {
    const Eigen::Matrix<double, 9, 1> d = delta.segment<9>(6 * n + 9 * j);
    if (options_.param == Parameterization::Full) {
      Vector10d& q = full_vectors_[j];
      q = normalized_quadric_vector(Vector10d(q + tangent_basis(q) * d));
    } else {
      QuadricStated s = retract_state(landmarks_[j], d);
      const AxisMask mask = scale_mask(s.type);
      Vector3d inv = s.inv_scale;
      bool clamped = false;
      for (int a = 0; a < 3; ++a) {
        if (mask[a] && inv[a] < options_.min_inv_scale) {
          inv[a] = options_.min_inv_scale;
          clamped = true;
        }
      }
      if (clamped) {
        s = QuadricStated::from_inv_scale(s.type, s.rotation, s.translation, inv);
      }
      landmarks_[j] = s;
    }
  }
}

void Problem::snapshot() {
  poses_snapshot_ = poses_;
  landmarks_snapshot_ = landmarks_;
  full_vectors_snapshot_ = full_vectors_;
}

void Problem::restore() {
  poses_ = poses_snapshot_;
  landmarks_ = landmarks_snapshot_;
  full_vectors_ = full_vectors_snapshot_;
}

FactorGraph Problem::current_graph() const {
  FactorGraph out = graph_;
  out.poses = poses_;
  if (options_.param == Parameterization::Full) {
    int unprojected = 0;
    for (std::size_t j = 0; j < full_vectors_.size(); ++j) {
      const Vector10d& q = full_vectors_[j];
      try {
        const ConstraintTupled tuple =
            decompose(wedge(q), landmarks_[j].type, options_.tol);
        out.landmarks[j] = state_from_tuple(tuple, landmarks_[j].type);
      } catch (const UnclassifiableError&) {
        ++unprojected;  // keep the initial state; the raw vector is in META
      }
      std::string csv = format_double(q[0]);
      for (int i = 1; i < 10; ++i) csv += "," + format_double(q[i]);
      out.meta_set("fq_" + std::to_string(j), csv);
    }
    out.meta_set("fq_unprojected", std::to_string(unprojected));
  } else {
    out.landmarks = landmarks_;
  }
  return out;
}

Eigen::VectorXd lm_step(const NormalEquations& eqs, double lambda) {
  if (lambda < 0.0) {
    throw Error("lm_step: lambda must be nonnegative");
  }
  Eigen::SparseMatrix<double> H = eqs.to_sparse();
  Eigen::SparseMatrix<double> identity(eqs.dim(), eqs.dim());
  identity.setIdentity();
  H += lambda * identity;

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(H);
  if (chol.info() != Eigen::Success) {
    throw FactorizationFailedError("lm_step: H + lambda*I is not positive definite");
  }
  Eigen::VectorXd delta = chol.solve(-eqs.b);
  const double b_norm = eqs.b.norm();
  Eigen::VectorXd residual = H * delta + eqs.b;
  if (residual.norm() > 1e-8 * b_norm) {
    delta += chol.solve(Eigen::VectorXd(-residual));  // one refinement pass
    residual = H * delta + eqs.b;
    if (residual.norm() > 1e-8 * b_norm) {
      throw FactorizationFailedError("lm_step: solve residual too large");
    }
  }
  return delta;
}

FactorGraph retract(const FactorGraph& graph, const Eigen::VectorXd& delta,
                    double min_inv_scale) {
  if (delta.size() != graph.state_dimension()) {
    throw Error("retract: delta has wrong dimension");
  }
  FactorGraph out = graph;
  const int n = graph.num_poses();
  for (int i = 0; i < n; ++i) {
    out.poses[i] = retract_pose(graph.poses[i], Vector6d(delta.segment<6>(6 * i)));
  }
  for (int j = 0; j < graph.num_landmarks(); ++j) {
    QuadricStated s =
        retract_state(graph.landmarks[j],
                      Eigen::Matrix<double, 9, 1>(delta.segment<9>(6 * n + 9 * j)));
    const AxisMask mask = scale_mask(s.type);
    Vector3d inv = s.inv_scale;
    for (int a = 0; a < 3; ++a) {
      if (mask[a]) inv[a] = std::max(inv[a], min_inv_scale);
    }
    out.landmarks[j] = QuadricStated::from_inv_scale(s.type, s.rotation, s.translation, inv);
  }
  return out;
}

double total_cost(const FactorGraph& graph, const SolverOptions& options) {
  return Problem(graph, options).cost();
}

NormalEquations linearize(const FactorGraph& graph, const SolverOptions& options) {
  return Problem(graph, options).linearize();
}

std::pair<FactorGraph, SolveReport> optimize(const FactorGraph& graph,
                                             const SolverOptions& options) {
  if (graph.priors.empty()) {
    throw Error("optimize: graph needs at least one prior (gauge freedom)");
  }
  Problem problem(graph, options);
  SolveReport report;
  double cost = problem.cost();
  report.initial_cost = cost;
  double lambda = options.lambda0;

  NormalEquations eqs = problem.linearize();
  bool relinearize = false;
  int consecutive_rejections = 0;

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    if (relinearize) {
      eqs = problem.linearize();
      relinearize = false;
    }

    Eigen::VectorXd delta;
    bool solved = true;
    try {
      delta = lm_step(eqs, lambda);
    } catch (const FactorizationFailedError&) {
      solved = false;
    }

    if (solved && delta.norm() < options.delta_tol) {
      // Already at a stationary point for this damping; nothing to apply.
      report.cost_trace.push_back({iter, cost, lambda, true});
      report.converged = true;
      report.reason = StopReason::DeltaTolerance;
      break;
    }

    bool accepted = false;
    if (solved) {
      problem.snapshot();
      problem.retract(delta);
      const double new_cost = problem.cost();
      if (new_cost < cost) {
        accepted = true;
        report.cost_trace.push_back({iter, new_cost, lambda, true});
        const double rel_change = (cost - new_cost) / std::max(cost, 1e-300);
        cost = new_cost;
        lambda /= options.lambda_down;
        relinearize = true;
        consecutive_rejections = 0;
        if (rel_change < options.cost_tol) {
          report.converged = true;
          report.reason = StopReason::CostTolerance;
          break;
        }
        if (delta.norm() < options.delta_tol) {
          report.converged = true;
          report.reason = StopReason::DeltaTolerance;
          break;
        }
      } else {
        problem.restore();
      }
    }

    if (!accepted) {
      report.cost_trace.push_back({iter, cost, lambda, false});
      lambda *= options.lambda_up;
      if (++consecutive_rejections >= options.max_consecutive_rejections) {
        report.reason = StopReason::NoProgress;
        break;
      }
    }
  }

  if (report.reason == StopReason::Running) {
    report.reason = StopReason::MaxIterations;
  }
  report.iterations = static_cast<int>(report.cost_trace.size());
  report.final_cost = cost;
  report.final_lambda = lambda;

  FactorGraph out = problem.current_graph();
  out.meta_set("param", to_string(options.param));
  out.meta_set("converged", report.converged ? "true" : "false");
  out.meta_set("iterations", std::to_string(report.iterations));
  out.meta_set("final_cost", format_double(report.final_cost));
  out.meta_set("final_lambda", format_double(report.final_lambda));
  out.meta_set("stop_reason", to_string(report.reason));
  return {out, report};
}

std::size_t expected_block_count(const FactorGraph& graph) {
  std::set<std::pair<int, int>> pairs;
  std::set<int> constrained_poses;
  std::set<int> constrained_landmarks;
  for (const auto& obs : graph.observations) {
    pairs.insert({obs.pose_id, obs.landmark_id});
    constrained_poses.insert(obs.pose_id);
    constrained_landmarks.insert(obs.landmark_id);
  }
  for (const auto& prior : graph.priors) {
    constrained_poses.insert(prior.pose_id);
  }
  return constrained_poses.size() + constrained_landmarks.size() + 2 * pairs.size();
}

}  // namespace qslam
