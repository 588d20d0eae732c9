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

#include <Eigen/Sparse>
#include <map>
#include <memory>
#include <vector>

#include "qslam/factors.hpp"
#include "qslam/graph.hpp"

namespace qslam {

struct SolverOptions {
  Parameterization param = Parameterization::Decomposed;
  int max_iters = 100;
  double cost_tol = 1e-9;    // relative cost decrease
  double delta_tol = 1e-10;  // step norm
  double lambda0 = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  int max_consecutive_rejections = 25;
  double min_inv_scale = 1e-6;
  double fd_step = 1e-6;  // numeric Jacobians of the F/RF baselines
  ToleranceConfig tol;
  OmegaConfig omega;
};

/// Block-sparse symmetric normal equations. Blocks are indexed by variable
/// (poses 0..N-1 of width 6, then landmarks N..N+M-1 of width 9); only blocks
/// touched by a factor exist.
class NormalEquations {
 public:
  NormalEquations(int num_poses, int num_landmarks);

  int num_poses() const { return num_poses_; }
  int num_landmarks() const { return num_landmarks_; }
  int dim() const { return 6 * num_poses_ + 9 * num_landmarks_; }
  int block_offset(int block) const;
  int block_width(int block) const { return block < num_poses_ ? 6 : 9; }

  /// Accumulates into block (i, j); creates it zero-initialized on first touch.
  Eigen::MatrixXd& block(int i, int j);

  std::size_t num_blocks() const { return blocks_.size(); }
  const std::map<std::pair<int, int>, Eigen::MatrixXd>& blocks() const {
    return blocks_;
  }

  Eigen::SparseMatrix<double> to_sparse() const;
  Eigen::MatrixXd to_dense() const;

  double max_asymmetry() const;

  Eigen::VectorXd b;

 private:
  int num_poses_ = 0;
  int num_landmarks_ = 0;
  std::map<std::pair<int, int>, Eigen::MatrixXd> blocks_;
};

enum class StopReason { Running, CostTolerance, DeltaTolerance, MaxIterations, NoProgress };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Running: return "running";
    case StopReason::CostTolerance: return "cost_tolerance";
    case StopReason::DeltaTolerance: return "delta_tolerance";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::NoProgress: return "no_progress";
  }
  return "?";
}

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double lambda = 0.0;
  bool accepted = false;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double final_lambda = 0.0;
  StopReason reason = StopReason::Running;
  std::vector<IterationRecord> cost_trace;
};

/// The optimization problem bound to one graph and parameterization: owns the
/// preprocessed observations (decomposed tuples or unit observation vectors)
/// and the mutable state estimate.
class Problem {
 public:
  Problem(const FactorGraph& graph, const SolverOptions& options);

  double cost() const;
  NormalEquations linearize() const;
  void retract(const Eigen::VectorXd& delta);

  void snapshot();
  void restore();

  /// Graph with the current state estimate written back (for the Full
  /// parameterization, raw landmark vectors additionally land in META).
  FactorGraph current_graph() const;

  const std::vector<Posed>& poses() const { return poses_; }
  const std::vector<QuadricStated>& landmark_states() const { return landmarks_; }
  const std::vector<Vector10d>& landmark_vectors() const { return full_vectors_; }

 private:
  Eigen::VectorXd observation_error(int obs_index) const;
  void landmark_jacobian_full(int obs_index, Eigen::MatrixXd& J_r,
                              Eigen::MatrixXd& J_q) const;

  FactorGraph graph_;
  SolverOptions options_;
  std::vector<Posed> poses_;
  std::vector<QuadricStated> landmarks_;
  std::vector<Vector10d> full_vectors_;  // F only: unit landmark vectors
  std::vector<DecomposedObservationd> decomposed_;
  std::vector<Vector10d> observed_unit_;  // F/RF: unit observation vectors

  std::vector<Posed> poses_snapshot_;
  std::vector<QuadricStated> landmarks_snapshot_;
  std::vector<Vector10d> full_vectors_snapshot_;
};

/// Solves (H + lambda I) delta = -b by sparse Cholesky.
Eigen::VectorXd lm_step(const NormalEquations& eqs, double lambda);

/// Spec-level retraction on a plain graph (decomposed-state semantics).
FactorGraph retract(const FactorGraph& graph, const Eigen::VectorXd& delta,
                    double min_inv_scale = 1e-6);

double total_cost(const FactorGraph& graph, const SolverOptions& options);
NormalEquations linearize(const FactorGraph& graph, const SolverOptions& options);

std::pair<FactorGraph, SolveReport> optimize(const FactorGraph& graph,
                                             const SolverOptions& options);

/// Closed-form nonzero-block count: diagonal blocks for constrained
/// variables plus two per distinct (pose, landmark) pair.
std::size_t expected_block_count(const FactorGraph& graph);

}  // namespace qslam
