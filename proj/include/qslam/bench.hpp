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

#include "qslam/eval.hpp"
#include "qslam/sim.hpp"
#include "qslam/solver.hpp"

namespace qslam {

/// One noise cell of the benchmark grid: observation preset + init preset.
struct BenchCell {
  std::string preset_obs;
  std::string preset_init;
};

/// The six rows of the study: an observation-noise sweep at low init noise
/// followed by an init-noise sweep at low observation noise. The repeated
/// L-L row is intentional (two independent batches).
std::vector<BenchCell> default_bench_grid();

/// Seed for (row, k): distinct per row so the duplicated L-L cells differ.
std::uint64_t run_seed(int row, int k);

struct BenchRun {
  RunMetrics metrics;
  SolveReport report;
};

struct BenchConfig {
  int seeds = 10;
  std::vector<BenchCell> grid = default_bench_grid();
  WorldConfig world;
  SolverOptions solver;  // param is overridden per run
  std::string out_dir;   // empty = no files, in-memory only
};

struct BenchResult {
  std::vector<BenchRun> runs;
  std::vector<AggregateRow> aggregate_rows;
  bool all_converged = true;
};

BenchResult run_bench(const BenchConfig& config);

std::string runs_csv(const std::vector<BenchRun>& runs);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string trace_csv(const SolveReport& report);

}  // namespace qslam
