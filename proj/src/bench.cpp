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

#include "qslam/bench.hpp"

#include <filesystem>
#include <fstream>

#include "qslam/graph_io.hpp"

namespace qslam {

namespace {

constexpr Parameterization kParams[] = {Parameterization::Decomposed,
                                        Parameterization::Full,
                                        Parameterization::RegularizedFull};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace

std::vector<BenchCell> default_bench_grid() {
  // Observation-noise sweep at low init noise, then init-noise sweep at low
  // observation noise; the repeated L-L row is a fresh batch on purpose.
  return {{"L", "L"}, {"M", "L"}, {"H", "L"}, {"L", "L"}, {"L", "M"}, {"L", "H"}};
}

std::uint64_t run_seed(int row, int k) {
  return static_cast<std::uint64_t>(row + 1) * 1000003ULL +
         static_cast<std::uint64_t>(k);
}

std::string trace_csv(const SolveReport& report) {
  std::string out = "iteration,cost,lambda,accepted\n";
  for (const auto& rec : report.cost_trace) {
    out += std::to_string(rec.iteration) + ',' + format_double(rec.cost) + ',' +
           format_double(rec.lambda) + ',' + (rec.accepted ? "1" : "0") + "\n";
  }
  return out;
}

std::string runs_csv(const std::vector<BenchRun>& runs) {
  std::string out =
      "preset_obs,preset_init,row,param,seed,ate_rot,ate_trans,quadric_err,"
      "converged,iterations,unclassifiable\n";
  for (const auto& run : runs) {
    const RunMetrics& m = run.metrics;
    out += m.preset_obs + ',' + m.preset_init + ',' + std::to_string(m.row) + ',' +
           m.param + ',' + std::to_string(m.seed) + ',' + format_double(m.ate_rot) +
           ',' + format_double(m.ate_trans) + ',' + format_double(m.quadric_err) +
           ',' + (m.converged ? "1" : "0") + ',' + std::to_string(m.iterations) +
           ',' + std::to_string(m.unclassifiable_landmarks) + "\n";
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "preset_obs,preset_init,row,param,seeds,ate_rot,ate_trans,quadric_err\n";
  for (const auto& r : rows) {
    out += r.preset_obs + ',' + r.preset_init + ',' + std::to_string(r.row) + ',' +
           r.param + ',' + std::to_string(r.num_seeds) + ',' +
           format_double(r.ate_rot) + ',' + format_double(r.ate_trans) + ',' +
           format_double(r.quadric_err) + "\n";
  }
  return out;
}

BenchResult run_bench(const BenchConfig& config) {
  BenchResult result;
  const bool to_disk = !config.out_dir.empty();
  if (to_disk) {
    std::filesystem::create_directories(config.out_dir);
  }

  for (std::size_t row = 0; row < config.grid.size(); ++row) {
    const BenchCell& cell = config.grid[row];
    const NoisePreset init_preset = noise_preset(cell.preset_init);
    const NoisePreset obs_preset = noise_preset(cell.preset_obs);

    for (int k = 1; k <= config.seeds; ++k) {
      WorldConfig world = config.world;
      world.seed = run_seed(static_cast<int>(row), k);
      SimulationResult sim = simulate(world, init_preset.init, obs_preset.obs,
                                      cell.preset_init, cell.preset_obs);
      sim.graph.meta_set("row", std::to_string(row));
      sim.ground_truth.meta_set("row", std::to_string(row));

      std::string run_dir;
      if (to_disk) {
        run_dir = config.out_dir + "/row" + std::to_string(row) + "_" +
                  cell.preset_obs + "-" + cell.preset_init + "_seed" +
                  std::to_string(k);
        std::filesystem::create_directories(run_dir);
        save_graph(sim.graph, run_dir + "/graph.txt");
        save_graph(sim.ground_truth, run_dir + "/ground_truth.txt");
      }

      for (const Parameterization param : kParams) {
        SolverOptions options = config.solver;
        options.param = param;
        auto [optimized, report] = optimize(sim.graph, options);

        BenchRun run;
        run.report = report;
        run.metrics = evaluate_run(optimized, sim.ground_truth, options.tol);
        result.all_converged = result.all_converged && report.converged;

        if (to_disk) {
          const std::string tag = to_string(param);
          save_graph(optimized, run_dir + "/optimized_" + tag + ".txt");
          write_file(run_dir + "/trace_" + tag + ".csv", trace_csv(report));
        }
        result.runs.push_back(std::move(run));
      }
    }
  }

  std::vector<RunMetrics> metrics;
  metrics.reserve(result.runs.size());
  for (const auto& run : result.runs) metrics.push_back(run.metrics);
  result.aggregate_rows = aggregate(metrics);

  if (to_disk) {
    write_file(config.out_dir + "/runs.csv", runs_csv(result.runs));
    write_file(config.out_dir + "/aggregate.csv", aggregate_csv(result.aggregate_rows));
  }
  return result;
}

}  // namespace qslam
