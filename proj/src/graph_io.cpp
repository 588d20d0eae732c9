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

#include "qslam/graph_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace qslam {

namespace {

constexpr double kQuaternionNormTolerance = 1e-6;

struct Tokenizer {
  std::vector<std::string> tokens;
  int line = 0;

  const std::string& at(std::size_t i, const char* what) const {
    if (i >= tokens.size()) {
      throw ParseError(std::string("missing field: ") + what, line);
    }
    return tokens[i];
  }

  double number(std::size_t i, const char* what) const {
    const std::string& s = at(i, what);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty()) {
      throw ParseError(std::string("malformed number for ") + what + ": '" + s + "'",
                       line);
    }
    return v;
  }

  int integer(std::size_t i, const char* what) const {
    const std::string& s = at(i, what);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || s.empty()) {
      throw ParseError(std::string("malformed integer for ") + what + ": '" + s + "'",
                       line);
    }
    return static_cast<int>(v);
  }

  void expect_size(std::size_t n, const char* record) const {
    if (tokens.size() != n) {
      throw ParseError(std::string(record) + " record expects " + std::to_string(n - 1) +
                           " fields, got " + std::to_string(tokens.size() - 1),
                       line);
    }
  }
};

Eigen::Quaterniond read_quaternion(const Tokenizer& t, std::size_t i) {
  // w-first on disk.
  const double w = t.number(i, "qw");
  const double x = t.number(i + 1, "qx");
  const double y = t.number(i + 2, "qy");
  const double z = t.number(i + 3, "qz");
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(norm - 1.0) > kQuaternionNormTolerance) {
    throw ParseError("quaternion is not unit (norm " + std::to_string(norm) + ")",
                     t.line);
  }
  return Eigen::Quaterniond(w, x, y, z);
}

void append_pose_fields(std::string& out, const Eigen::Quaterniond& q,
                        const Vector3d& t) {
  out += ' ' + format_double(t.x()) + ' ' + format_double(t.y()) + ' ' +
         format_double(t.z()) + ' ' + format_double(q.w()) + ' ' +
         format_double(q.x()) + ' ' + format_double(q.y()) + ' ' +
         format_double(q.z());
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string serialize_graph(const FactorGraph& graph) {
  std::string out;
  out.reserve(256 + 128 * (graph.poses.size() + graph.observations.size()));
  for (const auto& [key, value] : graph.meta) {
    out += "META " + key + "=" + value + "\n";
  }
  for (std::size_t i = 0; i < graph.poses.size(); ++i) {
    std::string line = "POSE " + std::to_string(i);
    append_pose_fields(line, graph.poses[i].quaternion, graph.poses[i].translation);
    out += line + "\n";
  }
  for (std::size_t i = 0; i < graph.landmarks.size(); ++i) {
    const QuadricStated& lm = graph.landmarks[i];
    std::string line = "QUADRIC " + std::to_string(i) + ' ' + to_string(lm.type);
    append_pose_fields(line, lm.quaternion, lm.translation);
    const AxisMask mask = scale_mask(lm.type);
    for (int a = 0; a < 3; ++a) {
      line += ' ' + format_double(mask[a] ? lm.semi_axes[a] : 0.0);
    }
    out += line + "\n";
  }
  for (const auto& prior : graph.priors) {
    std::string line = "PRIOR " + std::to_string(prior.pose_id);
    append_pose_fields(line, prior.pose.quaternion, prior.pose.translation);
    for (int i = 0; i < 6; ++i) {
      line += ' ' + format_double(prior.information[i]);
    }
    out += line + "\n";
  }
  for (const auto& obs : graph.observations) {
    std::string line =
        "OBS " + std::to_string(obs.pose_id) + ' ' + std::to_string(obs.landmark_id);
    for (int i = 0; i < 10; ++i) {
      line += ' ' + format_double(obs.q[i]);
    }
    line += ' ' + format_double(obs.weight);
    out += line + "\n";
  }
  return out;
}

FactorGraph parse_graph(const std::string& text) {
  std::map<int, Posed> poses;
  std::map<int, QuadricStated> quadrics;
  std::vector<std::pair<GraphObservation, int>> observations;  // with line numbers
  std::vector<std::pair<PosePrior, int>> priors;
  FactorGraph graph;

  std::istringstream stream(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(stream, raw)) {
    ++line_number;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);

    Tokenizer t;
    t.line = line_number;
    std::istringstream ls(raw);
    std::string tok;
    while (ls >> tok) t.tokens.push_back(tok);
    if (t.tokens.empty()) continue;

    const std::string& kind = t.tokens[0];
    if (kind == "META") {
      t.expect_size(2, "META");
      const std::string& kv = t.tokens[1];
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        throw ParseError("META expects key=value, got '" + kv + "'", line_number);
      }
      graph.meta.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    } else if (kind == "POSE") {
      t.expect_size(9, "POSE");
      const int id = t.integer(1, "pose id");
      if (poses.count(id)) throw ParseError("duplicate POSE id", line_number);
      const Vector3d pos(t.number(2, "tx"), t.number(3, "ty"), t.number(4, "tz"));
      poses.emplace(id, Posed::from_quaternion(read_quaternion(t, 5), pos));
    } else if (kind == "QUADRIC") {
      t.expect_size(13, "QUADRIC");
      const int id = t.integer(1, "quadric id");
      if (quadrics.count(id)) throw ParseError("duplicate QUADRIC id", line_number);
      QuadricType type;
      if (!quadric_type_from_string(t.at(2, "type"), type)) {
        throw ParseError("unknown quadric TYPE '" + t.at(2, "type") + "'", line_number);
      }
      const Vector3d pos(t.number(3, "tx"), t.number(4, "ty"), t.number(5, "tz"));
      const Eigen::Quaterniond q = read_quaternion(t, 6);
      Vector3d axes(t.number(10, "a"), t.number(11, "b"), t.number(12, "c"));
      const AxisMask mask = scale_mask(type);
      for (int a = 0; a < 3; ++a) {
        if (mask[a] && !(axes[a] > 0.0)) {
          throw ParseError("active semi-axis must be positive", line_number);
        }
        if (!mask[a] && axes[a] != 0.0) {
          throw ParseError("inactive semi-axis must be written as 0", line_number);
        }
        if (!mask[a]) axes[a] = 1.0;  // inert in the state
      }
      quadrics.emplace(id, QuadricStated::from_quaternion_semi_axes(type, q, pos, axes));
    } else if (kind == "OBS") {
      t.expect_size(14, "OBS");
      GraphObservation obs;
      obs.pose_id = t.integer(1, "pose id");
      obs.landmark_id = t.integer(2, "quadric id");
      for (int i = 0; i < 10; ++i) {
        obs.q[i] = t.number(3 + i, "coefficient");
      }
      obs.weight = t.number(13, "weight");
      if (!(obs.weight >= 0.0) || !std::isfinite(obs.weight)) {
        throw ParseError("observation weight must be finite and nonnegative",
                         line_number);
      }
      observations.emplace_back(obs, line_number);
    } else if (kind == "PRIOR") {
      t.expect_size(15, "PRIOR");
      PosePrior prior;
      prior.pose_id = t.integer(1, "pose id");
      const Vector3d pos(t.number(2, "tx"), t.number(3, "ty"), t.number(4, "tz"));
      prior.pose = Posed::from_quaternion(read_quaternion(t, 5), pos);
      for (int i = 0; i < 6; ++i) {
        prior.information[i] = t.number(9 + i, "information");
      }
      priors.emplace_back(prior, line_number);
    } else {
      throw ParseError("unknown record kind '" + kind + "'", line_number);
    }
  }

  graph.poses.reserve(poses.size());
  for (const auto& [id, pose] : poses) {
    if (id != static_cast<int>(graph.poses.size())) {
      throw ParseError("POSE ids must be dense from 0 (missing id " +
                           std::to_string(graph.poses.size()) + ")",
                       line_number);
    }
    graph.poses.push_back(pose);
  }
  graph.landmarks.reserve(quadrics.size());
  for (const auto& [id, lm] : quadrics) {
    if (id != static_cast<int>(graph.landmarks.size())) {
      throw ParseError("QUADRIC ids must be dense from 0 (missing id " +
                           std::to_string(graph.landmarks.size()) + ")",
                       line_number);
    }
    graph.landmarks.push_back(lm);
  }
  for (const auto& [obs, line] : observations) {
    if (obs.pose_id < 0 || obs.pose_id >= graph.num_poses() || obs.landmark_id < 0 ||
        obs.landmark_id >= graph.num_landmarks()) {
      throw ParseError("OBS references unknown pose or quadric", line);
    }
    graph.observations.push_back(obs);
  }
  for (const auto& [prior, line] : priors) {
    if (prior.pose_id < 0 || prior.pose_id >= graph.num_poses()) {
      throw ParseError("PRIOR references unknown pose", line);
    }
    graph.priors.push_back(prior);
  }
  return graph;
}

void save_graph(const FactorGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const std::string text = serialize_graph(graph);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

FactorGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_graph(buffer.str());
}

}  // namespace qslam
