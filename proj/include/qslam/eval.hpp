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

#include <cstdint>
#include <string>
#include <vector>

#include "qslam/graph.hpp"

namespace qslam {

struct AteResult {
  double rot = 0.0;    // radians, RMS geodesic angle
  double trans = 0.0;  // meters, RMS position error
};

AteResult ate(const std::vector<Posed>& estimated, const std::vector<Posed>& ground_truth);

/// Distance between the two quadrics' unit-norm sign-canonical vectors after
/// type normalization; invariant to rescaling either argument. Throws
/// UnclassifiableError when an input matches no supported type.
double quadric_vector_error(const Matrix4d& estimated, const Matrix4d& ground_truth,
                            const ToleranceConfig& tol = {});

struct RunMetrics {
  std::string preset_obs;
  std::string preset_init;
  int row = 0;  // benchmark grid row (duplicated preset pairs stay distinct)
  std::string param;
  std::uint64_t seed = 0;
  double ate_rot = 0.0;
  double ate_trans = 0.0;
  double quadric_err = 0.0;
  bool converged = false;
  int iterations = 0;
  int unclassifiable_landmarks = 0;
};

/// Compares an optimized graph against ground truth. Run metadata comes from
/// the estimate's META records. Full-parameterization landmark vectors are
/// taken from `fq_<id>` META entries when present.
RunMetrics evaluate_run(const FactorGraph& estimate, const FactorGraph& ground_truth,
                        const ToleranceConfig& tol = {});

struct AggregateRow {
  std::string preset_obs;
  std::string preset_init;
  int row = 0;
  std::string param;
  int num_seeds = 0;
  double ate_rot = 0.0;
  double ate_trans = 0.0;
  double quadric_err = 0.0;
};

/// Mean over seeds per (preset pair, grid row, parameterization) cell, in
/// first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& runs);

}  // namespace qslam
