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

#include <string>
#include <utility>
#include <vector>

#include "qslam/pose.hpp"
#include "qslam/state.hpp"
#include "qslam/types.hpp"

namespace qslam {

enum class Parameterization { Decomposed, Full, RegularizedFull };

inline const char* to_string(Parameterization p) {
  switch (p) {
    case Parameterization::Decomposed: return "D";
    case Parameterization::Full: return "F";
    case Parameterization::RegularizedFull: return "RF";
  }
  return "?";
}

inline bool parameterization_from_string(const std::string& s, Parameterization& out) {
  if (s == "D") out = Parameterization::Decomposed;
  else if (s == "F") out = Parameterization::Full;
  else if (s == "RF") out = Parameterization::RegularizedFull;
  else return false;
  return true;
}

/// One observed quadric: the raw 10-vector in the observing pose's body frame
/// plus its scalar weight. Decomposition for the D parameterization happens
/// at solver load time.
struct GraphObservation {
  int pose_id = 0;
  int landmark_id = 0;
  Vector10d q = Vector10d::Zero();
  double weight = 1.0;
};

struct PosePrior {
  int pose_id = 0;
  Posed pose;
  Vector6d information = Vector6d::Ones();  // diagonal, order [w, t]
};

struct FactorGraph {
  std::vector<Posed> poses;
  std::vector<QuadricStated> landmarks;
  std::vector<GraphObservation> observations;
  std::vector<PosePrior> priors;
  std::vector<std::pair<std::string, std::string>> meta;

  int num_poses() const { return static_cast<int>(poses.size()); }
  int num_landmarks() const { return static_cast<int>(landmarks.size()); }

  /// 6 per pose + 9 per landmark.
  int state_dimension() const { return 6 * num_poses() + 9 * num_landmarks(); }

  const std::string* meta_get(const std::string& key) const {
    for (const auto& kv : meta) {
      if (kv.first == key) return &kv.second;
    }
    return nullptr;
  }

  void meta_set(const std::string& key, const std::string& value) {
    for (auto& kv : meta) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    meta.emplace_back(key, value);
  }

  void check_indices() const {
    for (const auto& obs : observations) {
      if (obs.pose_id < 0 || obs.pose_id >= num_poses() || obs.landmark_id < 0 ||
          obs.landmark_id >= num_landmarks()) {
        throw Error("observation references an out-of-range pose or landmark");
      }
    }
    for (const auto& prior : priors) {
      if (prior.pose_id < 0 || prior.pose_id >= num_poses()) {
        throw Error("prior references an out-of-range pose");
      }
    }
  }
};

}  // namespace qslam
