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

#include "qslam/eval.hpp"

#include <cmath>
#include <cstdlib>

#include "qslam/quadric.hpp"

namespace qslam {

namespace {

double geodesic_angle(const Matrix3d& a, const Matrix3d& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::min(1.0, std::max(-1.0, c)));
}

Vector10d parse_vector10(const std::string& csv) {
  Vector10d v;
  const char* p = csv.c_str();
  for (int i = 0; i < 10; ++i) {
    char* end = nullptr;
    v[i] = std::strtod(p, &end);
    if (end == p) throw Error("malformed quadric vector in META: " + csv);
    p = end;
    if (i < 9) {
      if (*p != ',') throw Error("malformed quadric vector in META: " + csv);
      ++p;
    }
  }
  return v;
}

}  // namespace

AteResult ate(const std::vector<Posed>& estimated,
              const std::vector<Posed>& ground_truth) {
  if (estimated.size() != ground_truth.size()) {
    throw Error("ate: trajectory lengths differ");
  }
  if (estimated.empty()) {
    throw Error("ate: empty trajectories");
  }
  double sum_rot2 = 0.0;
  double sum_trans2 = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const double angle = geodesic_angle(estimated[i].rotation, ground_truth[i].rotation);
    sum_rot2 += angle * angle;
    sum_trans2 += (estimated[i].translation - ground_truth[i].translation).squaredNorm();
  }
  const double n = static_cast<double>(estimated.size());
  return AteResult{std::sqrt(sum_rot2 / n), std::sqrt(sum_trans2 / n)};
}

double quadric_vector_error(const Matrix4d& estimated, const Matrix4d& ground_truth,
                            const ToleranceConfig& tol) {
  const QuadricType type_est = classify(estimated, tol);
  const QuadricType type_gt = classify(ground_truth, tol);
  const Vector10d ve =
      normalized_quadric_vector(vee(normalize(estimated, type_est, tol)));
  const Vector10d vg =
      normalized_quadric_vector(vee(normalize(ground_truth, type_gt, tol)));
  return (ve - vg).norm();
}

RunMetrics evaluate_run(const FactorGraph& estimate, const FactorGraph& ground_truth,
                        const ToleranceConfig& tol) {
  if (estimate.num_poses() != ground_truth.num_poses() ||
      estimate.num_landmarks() != ground_truth.num_landmarks()) {
    throw Error("evaluate_run: estimate and ground truth disagree in size");
  }

  RunMetrics m;
  auto meta_or = [&](const char* key, const std::string& fallback) {
    const std::string* v = estimate.meta_get(key);
    return v ? *v : fallback;
  };
  m.preset_obs = meta_or("preset_obs", "?");
  m.preset_init = meta_or("preset_init", "?");
  m.param = meta_or("param", "?");
  m.row = std::atoi(meta_or("row", "0").c_str());
  m.seed = std::strtoull(meta_or("seed", "0").c_str(), nullptr, 10);
  m.converged = meta_or("converged", "false") == "true";
  m.iterations = std::atoi(meta_or("iterations", "0").c_str());

  const AteResult a = ate(estimate.poses, ground_truth.poses);
  m.ate_rot = a.rot;
  m.ate_trans = a.trans;

  double err_sum = 0.0;
  for (int j = 0; j < estimate.num_landmarks(); ++j) {
    const Matrix4d q_gt = compose(ground_truth.landmarks[j]);
    Matrix4d q_est;
    const std::string* raw = estimate.meta_get("fq_" + std::to_string(j));
    if (m.param == "F" && raw != nullptr) {
      q_est = wedge(parse_vector10(*raw));
    } else {
      q_est = compose(estimate.landmarks[j]);
    }
    try {
      err_sum += quadric_vector_error(q_est, q_gt, tol);
    } catch (const UnclassifiableError&) {
      // High-noise full-parameterization estimates can leave the supported
      // pattern set; fall back to the raw gauge-fixed vector distance.
      err_sum += (normalized_quadric_vector(vee(q_est)) -
                  normalized_quadric_vector(vee(q_gt)))
                     .norm();
      ++m.unclassifiable_landmarks;
    }
  }
  m.quadric_err = err_sum / estimate.num_landmarks();
  return m;
}

std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) {
    throw Error("aggregate: no runs");
  }
  std::vector<AggregateRow> rows;
  for (const auto& run : runs) {
    AggregateRow* row = nullptr;
    for (auto& r : rows) {
      if (r.preset_obs == run.preset_obs && r.preset_init == run.preset_init &&
          r.row == run.row && r.param == run.param) {
        row = &r;
        break;
      }
    }
    if (row == nullptr) {
      rows.push_back(AggregateRow{run.preset_obs, run.preset_init, run.row,
                                  run.param, 0, 0.0, 0.0, 0.0});
      row = &rows.back();
    }
    row->num_seeds += 1;
    row->ate_rot += run.ate_rot;
    row->ate_trans += run.ate_trans;
    row->quadric_err += run.quadric_err;
  }
  for (auto& r : rows) {
    r.ate_rot /= r.num_seeds;
    r.ate_trans /= r.num_seeds;
    r.quadric_err /= r.num_seeds;
  }
  return rows;
}

}  // namespace qslam
