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

#include "qslam/graph.hpp"

namespace qslam {

// Line-oriented text graphs. Records (whitespace-delimited, '#' comments, any
// order, ids dense from 0):
//   META key=value
//   POSE <id> <tx> <ty> <tz> <qw> <qx> <qy> <qz>
//   QUADRIC <id> <TYPE> <tx> <ty> <tz> <qw> <qx> <qy> <qz> <a> <b> <c>
//   OBS <pose_id> <quadric_id> <A..J> <weight>
//   PRIOR <pose_id> <tx ty tz qw qx qy qz> <info_w1 info_w2 info_w3 info_t1 info_t2 info_t3>
// Floats carry 17 significant digits so serialize/parse round-trips are
// byte-stable. Inactive semi-axes are written as 0.

struct ParseError : Error {
  ParseError(const std::string& message, int line)
      : Error(message + " (line " + std::to_string(line) + ")"), line_number(line) {}
  int line_number;
};

std::string serialize_graph(const FactorGraph& graph);
FactorGraph parse_graph(const std::string& text);

void save_graph(const FactorGraph& graph, const std::string& path);
FactorGraph load_graph(const std::string& path);

/// %.17g with C-locale formatting.
std::string format_double(double v);

}  // namespace qslam
