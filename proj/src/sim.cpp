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

#include "qslam/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qslam/decompose.hpp"
#include "qslam/factors.hpp"
#include "qslam/quadric.hpp"

namespace qslam {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
constexpr double kMinValidSemiAxis = 1e-3;

/// The 24 proper rotations with entries in {0, +-1}, in a fixed enumeration
/// order (axis permutations lexicographic, then sign patterns in binary order).
std::vector<Matrix3d> axis_aligned_rotations() {
  static const std::vector<Matrix3d> rotations = [] {
    std::vector<Matrix3d> out;
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& perm : perms) {
      for (int bits = 0; bits < 8; ++bits) {
        Matrix3d R = Matrix3d::Zero();
        for (int c = 0; c < 3; ++c) {
          R(perm[c], c) = (bits >> c) & 1 ? -1.0 : 1.0;
        }
        if (R.determinant() > 0.5) {
          out.push_back(R);
        }
      }
    }
    return out;
  }();
  return rotations;
}

Matrix3d rot_z(double angle) {
  Matrix3d R;
  R << std::cos(angle), -std::sin(angle), 0.0,
       std::sin(angle), std::cos(angle), 0.0,
       0.0, 0.0, 1.0;
  return R;
}

QuadricType draw_type(const WorldConfig& config, Rng& rng) {
  if (config.type_mix.empty()) {
    return kAllQuadricTypes[rng.uniform_int(6)];
  }
  double total = 0.0;
  for (const auto& [type, w] : config.type_mix) total += w;
  double r = rng.uniform01() * total;
  for (const auto& [type, w] : config.type_mix) {
    r -= w;
    if (r <= 0.0) return type;
  }
  return config.type_mix.back().first;
}

/// Ascending semi-axes with pairwise gaps, so observation noise cannot swap
/// the canonical axis order at the configured presets.
std::vector<double> draw_separated_axes(int count, const WorldConfig& config, Rng& rng) {
  std::vector<double> axes(count);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (auto& a : axes) a = rng.uniform(config.min_semi_axis, config.max_semi_axis);
    std::sort(axes.begin(), axes.end());
    bool ok = true;
    for (int i = 0; i + 1 < count; ++i) {
      if (axes[i + 1] - axes[i] < config.min_axis_gap) ok = false;
    }
    if (ok) return axes;
  }
  throw Error("generate_world: could not draw separated semi-axes");
}

QuadricStated draw_landmark(const WorldConfig& config, Rng& rng) {
  const QuadricType type = draw_type(config, rng);
  const Matrix3d aligned = axis_aligned_rotations()[rng.uniform_int(24)];
  const double yaw = rng.uniform(-config.yaw_jitter_deg, config.yaw_jitter_deg) * kDegToRad;
  const Matrix3d R = rot_z(yaw) * aligned;
  Vector3d center;
  for (int i = 0; i < 3; ++i) {
    center[i] = rng.uniform(-0.5 * config.bounds[i], 0.5 * config.bounds[i]);
  }

  Vector3d axes = Vector3d::Ones();
  switch (type) {
    case QuadricType::Ellipsoid:
      if (rng.uniform01() < config.sphere_prob) {
        axes.setConstant(rng.uniform(config.min_semi_axis, config.max_semi_axis));
      } else {
        const auto drawn = draw_separated_axes(3, config, rng);
        axes = Vector3d(drawn[0], drawn[1], drawn[2]);
      }
      break;
    case QuadricType::Cylinder:
    case QuadricType::Cone:
      if (rng.uniform01() < config.circular_prob) {
        const double a = rng.uniform(config.min_semi_axis, config.max_semi_axis);
        axes.head<2>().setConstant(a);
      } else {
        const auto drawn = draw_separated_axes(2, config, rng);
        axes.head<2>() = Eigen::Vector2d(drawn[0], drawn[1]);
      }
      break;
    default:
      break;  // point/line/plane carry no scale
  }
  return QuadricStated::from_semi_axes(type, R, center, axes);
}

}  // namespace

NoisePreset noise_preset(const std::string& name) {
  if (name == "L") {
    return NoisePreset{"L", InitNoise{1.0, 0.1, 1.0, 0.1, 0.01}, ObsNoise{1.0, 0.1, 0.01}};
  }
  if (name == "M") {
    return NoisePreset{"M", InitNoise{5.0, 0.5, 5.0, 0.5, 0.02}, ObsNoise{2.0, 0.2, 0.02}};
  }
  if (name == "H") {
    return NoisePreset{"H", InitNoise{50.0, 5.0, 50.0, 5.0, 0.05}, ObsNoise{5.0, 0.5, 0.05}};
  }
  throw Error("unknown noise preset '" + name + "' (expected L, M or H)");
}

void WorldConfig::validate() const {
  if (num_landmarks < 1) throw Error("world: num_landmarks must be >= 1");
  if (k_nearest < 1 || k_nearest > num_landmarks) {
    throw Error("world: k_nearest must be in [1, num_landmarks]");
  }
  if (num_frames < 1) throw Error("world: num_frames must be >= 1");
  if (!(min_semi_axis > 0.0) || !(max_semi_axis > min_semi_axis)) {
    throw Error("world: invalid semi-axis range");
  }
  if (bounds.minCoeff() <= 0.0) throw Error("world: bounds must be positive");
}

World generate_world(const WorldConfig& config) {
  config.validate();
  Rng rng = make_stream(config.seed, RngStream::World);

  World world;
  world.landmarks.reserve(config.num_landmarks);
  for (int i = 0; i < config.num_landmarks; ++i) {
    world.landmarks.push_back(draw_landmark(config, rng));
  }

  world.poses.reserve(config.num_frames);
  for (int f = 0; f < config.num_frames; ++f) {
    const double theta = 2.0 * M_PI * f / config.num_frames;
    const Vector3d position(config.trajectory_radius * std::cos(theta),
                            config.trajectory_radius * std::sin(theta),
                            config.trajectory_height);
    const Vector3d x_axis = (-position).normalized();
    Vector3d z_axis = Vector3d::UnitZ() - Vector3d::UnitZ().dot(x_axis) * x_axis;
    z_axis.normalize();
    const Vector3d y_axis = z_axis.cross(x_axis);
    Matrix3d R;
    R.col(0) = x_axis;
    R.col(1) = y_axis;
    R.col(2) = z_axis;
    world.poses.push_back(Posed::from_matrix(R, position));
  }
  return world;
}

std::vector<std::pair<int, Matrix4d>> observe(const Posed& pose,
                                              const std::vector<QuadricStated>& landmarks,
                                              int k) {
  if (k > static_cast<int>(landmarks.size())) {
    throw Error("observe: k exceeds landmark count");
  }
  std::vector<int> order(landmarks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = (landmarks[a].translation - pose.translation).squaredNorm();
    const double db = (landmarks[b].translation - pose.translation).squaredNorm();
    if (da != db) return da < db;
    return a < b;
  });
  std::vector<std::pair<int, Matrix4d>> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    out.emplace_back(order[i], to_body_frame(compose(landmarks[order[i]]), pose));
  }
  return out;
}

Posed perturb_pose(const Posed& pose, double sigma_theta_deg, double sigma_t, Rng& rng) {
  Vector3d w, dt;
  for (int i = 0; i < 3; ++i) w[i] = sigma_theta_deg * kDegToRad * rng.normal();
  for (int i = 0; i < 3; ++i) dt[i] = sigma_t * rng.normal();
  return Posed::from_matrix(Matrix3d(pose.rotation * exp_so3(w)),
                            Vector3d(pose.translation + dt));
}

QuadricStated perturb_landmark(const QuadricStated& state, double sigma_theta_deg,
                               double sigma_t, double sigma_s, Rng& rng) {
  Vector3d w, dt, ds;
  for (int i = 0; i < 3; ++i) w[i] = sigma_theta_deg * kDegToRad * rng.normal();
  for (int i = 0; i < 3; ++i) dt[i] = sigma_t * rng.normal();
  for (int i = 0; i < 3; ++i) ds[i] = sigma_s * rng.normal();

  const AxisMask mask = scale_mask(state.type);
  Vector3d axes = state.semi_axes;
  for (int i = 0; i < 3; ++i) {
    if (mask[i]) {
      axes[i] = std::max(axes[i] + ds[i], 0.01);  // initial guess only
    }
  }
  return QuadricStated::from_semi_axes(state.type,
                                       Matrix3d(state.rotation * exp_so3(w)),
                                       Vector3d(state.translation + dt), axes);
}

void perturb_initialization(std::vector<Posed>& poses,
                            std::vector<QuadricStated>& landmarks,
                            const InitNoise& noise, Rng& rng) {
  for (auto& pose : poses) {
    pose = perturb_pose(pose, noise.theta_robot_deg, noise.t_robot, rng);
  }
  for (auto& lm : landmarks) {
    lm = perturb_landmark(lm, noise.theta_quadric_deg, noise.t_quadric,
                          noise.s_quadric, rng);
  }
}

Matrix4d perturb_observation(const Matrix4d& q_body, QuadricType type,
                             const ObsNoise& noise, Rng& rng, int* regenerated,
                             int max_attempts) {
  const ConstraintTupled tuple = decompose(q_body, type);
  const QuadricStated base = state_from_tuple(tuple, type);
  const AxisMask mask = scale_mask(type);

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Vector3d w, dt, ds;
    for (int i = 0; i < 3; ++i) w[i] = noise.theta_deg * kDegToRad * rng.normal();
    for (int i = 0; i < 3; ++i) dt[i] = noise.t * rng.normal();
    for (int i = 0; i < 3; ++i) ds[i] = noise.s * rng.normal();

    Vector3d axes = base.semi_axes;
    bool valid = true;
    for (int i = 0; i < 3; ++i) {
      if (mask[i]) {
        axes[i] += ds[i];
        if (axes[i] < kMinValidSemiAxis) valid = false;
      }
    }
    if (valid) {
      const QuadricStated perturbed = QuadricStated::from_semi_axes(
          type, Matrix3d(base.rotation * exp_so3(w)),
          Vector3d(base.translation + dt), axes);
      const Matrix4d q = compose(perturbed);
      try {
        if (classify(q) == type) {
          return q;
        }
      } catch (const UnclassifiableError&) {
      }
    }
    if (regenerated) ++(*regenerated);
  }
  throw Error("perturb_observation: regeneration limit reached");
}

SimulationResult simulate(const WorldConfig& config, const InitNoise& init_noise,
                          const ObsNoise& obs_noise, const std::string& preset_init,
                          const std::string& preset_obs) {
  const World world = generate_world(config);
  SimulationResult result;

  result.ground_truth.poses = world.poses;
  result.ground_truth.landmarks = world.landmarks;

  Rng obs_rng = make_stream(config.seed, RngStream::ObsNoise);
  for (int f = 0; f < config.num_frames; ++f) {
    for (const auto& [lm_id, q_body] :
         observe(world.poses[f], world.landmarks, config.k_nearest)) {
      const Matrix4d noisy =
          perturb_observation(q_body, world.landmarks[lm_id].type, obs_noise,
                              obs_rng, &result.regenerated_observations);
      GraphObservation obs;
      obs.pose_id = f;
      obs.landmark_id = lm_id;
      obs.q = vee(noisy);
      obs.weight = 1.0;
      result.graph.observations.push_back(obs);
    }
  }

  result.graph.poses = world.poses;
  result.graph.landmarks = world.landmarks;
  Rng init_rng = make_stream(config.seed, RngStream::InitNoise);
  perturb_initialization(result.graph.poses, result.graph.landmarks, init_noise,
                         init_rng);

  PosePrior prior;
  prior.pose_id = 0;
  prior.pose = world.poses[0];
  prior.information = Vector6d::Constant(1e6);
  result.graph.priors.push_back(prior);

  auto stamp = [&](FactorGraph& g) {
    g.meta_set("seed", std::to_string(config.seed));
    g.meta_set("preset_init", preset_init);
    g.meta_set("preset_obs", preset_obs);
    g.meta_set("landmarks", std::to_string(config.num_landmarks));
    g.meta_set("frames", std::to_string(config.num_frames));
    g.meta_set("k_nearest", std::to_string(config.k_nearest));
  };
  stamp(result.graph);
  stamp(result.ground_truth);
  result.graph.meta_set("regenerated_obs",
                        std::to_string(result.regenerated_observations));
  return result;
}

}  // namespace qslam
