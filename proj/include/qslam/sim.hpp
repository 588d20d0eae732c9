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
#include "qslam/rng.hpp"

namespace qslam {

/// Gaussian sigmas for perturbing the initial guess (Table-style rows:
/// rotation sigmas in degrees, translations in meters, scale in semi-axis
/// meters).
struct InitNoise {
  double theta_robot_deg = 0.0;
  double t_robot = 0.0;
  double theta_quadric_deg = 0.0;
  double t_quadric = 0.0;
  double s_quadric = 0.0;
};

struct ObsNoise {
  double theta_deg = 0.0;
  double t = 0.0;
  double s = 0.0;
};

struct NoisePreset {
  std::string name;
  InitNoise init;
  ObsNoise obs;
};

/// Named presets L, M, H.
NoisePreset noise_preset(const std::string& name);

struct WorldConfig {
  std::uint64_t seed = 1;
  int num_landmarks = 15;
  Vector3d bounds = Vector3d(6.0, 6.0, 1.0);  // box centered at the origin
  int num_frames = 50;
  int k_nearest = 10;
  double trajectory_radius = 4.0;
  double trajectory_height = 0.5;
  double min_semi_axis = 0.1;
  double max_semi_axis = 0.5;
  double min_axis_gap = 0.08;  // between distinct active semi-axes
  double yaw_jitter_deg = 10.0;
  double sphere_prob = 1.0 / 3.0;    // ellipsoid drawn as exact sphere
  double circular_prob = 0.5;        // cylinder/cone drawn circular
  std::vector<std::pair<QuadricType, double>> type_mix;  // empty = uniform

  void validate() const;
};

struct World {
  std::vector<Posed> poses;
  std::vector<QuadricStated> landmarks;
};

/// Manhattan-like landmark field plus an inward-facing circular trajectory.
/// Deterministic in the seed.
World generate_world(const WorldConfig& config);

/// The k landmarks nearest to the pose (ties by index), each expressed in the
/// robot body frame.
std::vector<std::pair<int, Matrix4d>> observe(const Posed& pose,
                                              const std::vector<QuadricStated>& landmarks,
                                              int k);

Posed perturb_pose(const Posed& pose, double sigma_theta_deg, double sigma_t, Rng& rng);
QuadricStated perturb_landmark(const QuadricStated& state, double sigma_theta_deg,
                               double sigma_t, double sigma_s, Rng& rng);

/// Perturbs the initial guess for every pose and landmark in place.
void perturb_initialization(std::vector<Posed>& poses,
                            std::vector<QuadricStated>& landmarks,
                            const InitNoise& noise, Rng& rng);

/// Decomposes the true body-frame quadric, perturbs rotation/translation/
/// active scales in the decomposed domain and recomposes. Draws that produce
/// an invalid shape are regenerated (at most max_attempts).
Matrix4d perturb_observation(const Matrix4d& q_body, QuadricType type,
                             const ObsNoise& noise, Rng& rng,
                             int* regenerated = nullptr, int max_attempts = 100);

struct SimulationResult {
  FactorGraph graph;         // perturbed initial states + noisy observations
  FactorGraph ground_truth;  // true poses and landmarks
  int regenerated_observations = 0;
};

SimulationResult simulate(const WorldConfig& config, const InitNoise& init_noise,
                          const ObsNoise& obs_noise, const std::string& preset_init,
                          const std::string& preset_obs);

}  // namespace qslam
