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

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "qslam/bench.hpp"
#include "qslam/eval.hpp"
#include "qslam/graph_io.hpp"
#include "qslam/sim.hpp"
#include "qslam/solver.hpp"

namespace {

using namespace qslam;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string derived_gt_path(const std::string& out) {
  const std::size_t dot = out.rfind('.');
  if (dot == std::string::npos || out.find('/', dot) != std::string::npos) {
    return out + "_gt";
  }
  return out.substr(0, dot) + "_gt" + out.substr(dot);
}

struct SimulateArgs {
  std::uint64_t seed = 1;
  std::string preset_init = "L";
  std::string preset_obs = "L";
  int landmarks = 15;
  int frames = 50;
  int k = 10;
  std::string out;
  std::string gt_out;
};

int run_simulate(const SimulateArgs& args) {
  WorldConfig config;
  config.seed = args.seed;
  config.num_landmarks = args.landmarks;
  config.num_frames = args.frames;
  config.k_nearest = args.k;
  config.validate();
  const NoisePreset init = noise_preset(args.preset_init);
  const NoisePreset obs = noise_preset(args.preset_obs);
  SimulationResult result =
      simulate(config, init.init, obs.obs, args.preset_init, args.preset_obs);
  save_graph(result.graph, args.out);
  save_graph(result.ground_truth,
             args.gt_out.empty() ? derived_gt_path(args.out) : args.gt_out);
  return 0;
}

struct OptimizeArgs {
  std::string graph_path;
  std::string param = "D";
  std::string out;
  std::string trace_out;
  SolverOptions options;
};

int run_optimize(const OptimizeArgs& args) {
  if (!parameterization_from_string(args.param, const_cast<OptimizeArgs&>(args).options.param)) {
    throw Error("unknown parameterization '" + args.param + "' (expected D, F or RF)");
  }
  const FactorGraph graph = load_graph(args.graph_path);
  auto [optimized, report] = optimize(graph, args.options);
  if (!args.out.empty()) save_graph(optimized, args.out);
  if (!args.trace_out.empty()) write_file(args.trace_out, trace_csv(report));
  std::printf("param=%s iterations=%d converged=%s final_cost=%s\n", args.param.c_str(),
              report.iterations, report.converged ? "true" : "false",
              format_double(report.final_cost).c_str());
  return 0;
}

struct EvalArgs {
  std::string estimate_path;
  std::string ground_truth_path;
  std::string out;
};

int run_eval(const EvalArgs& args) {
  const FactorGraph estimate = load_graph(args.estimate_path);
  const FactorGraph ground_truth = load_graph(args.ground_truth_path);
  const RunMetrics m = evaluate_run(estimate, ground_truth);
  std::string csv = "preset_obs,preset_init,param,seed,ate_rot,ate_trans,quadric_err\n";
  csv += m.preset_obs + ',' + m.preset_init + ',' + m.param + ',' +
         std::to_string(m.seed) + ',' + format_double(m.ate_rot) + ',' +
         format_double(m.ate_trans) + ',' + format_double(m.quadric_err) + "\n";
  if (args.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file(args.out, csv);
  }
  return 0;
}

struct BenchArgs {
  int seeds = 10;
  std::string presets;  // e.g. "L-L,M-L,H-L,L-L,L-M,L-H"
  std::string out_dir;
  int landmarks = 15;
  int frames = 50;
  int k = 10;
};

int run_bench_cmd(const BenchArgs& args) {
  BenchConfig config;
  config.seeds = args.seeds;
  config.out_dir = args.out_dir;
  config.world.num_landmarks = args.landmarks;
  config.world.num_frames = args.frames;
  config.world.k_nearest = args.k;
  if (!args.presets.empty()) {
    config.grid.clear();
    std::string token;
    std::istringstream ss(args.presets);
    while (std::getline(ss, token, ',')) {
      const std::size_t dash = token.find('-');
      if (dash == std::string::npos) {
        throw Error("preset pair must look like OBS-INIT, got '" + token + "'");
      }
      config.grid.push_back({token.substr(0, dash), token.substr(dash + 1)});
    }
  }
  const BenchResult result = run_bench(config);
  std::fputs(aggregate_csv(result.aggregate_rows).c_str(), stdout);
  std::fprintf(stderr, "%zu runs, all_converged=%s\n", result.runs.size(),
               result.all_converged ? "true" : "false");
  return 0;  // every run is reported in runs.csv
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadric-landmark factor-graph toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic noisy graph");
  sim_cmd->add_option("--seed", sim_args.seed, "World seed");
  sim_cmd->add_option("--preset-init", sim_args.preset_init, "Init noise preset (L/M/H)");
  sim_cmd->add_option("--preset-obs", sim_args.preset_obs, "Observation noise preset (L/M/H)");
  sim_cmd->add_option("--landmarks", sim_args.landmarks, "Number of landmarks");
  sim_cmd->add_option("--frames", sim_args.frames, "Number of trajectory frames");
  sim_cmd->add_option("--k", sim_args.k, "Nearest landmarks observed per frame");
  sim_cmd->add_option("--out", sim_args.out, "Output graph file")->required();
  sim_cmd->add_option("--gt-out", sim_args.gt_out, "Ground-truth output (default: derived)");

  OptimizeArgs opt_args;
  auto* opt_cmd = app.add_subcommand("optimize", "Optimize a graph file");
  opt_cmd->add_option("--graph", opt_args.graph_path, "Input graph file")->required();
  opt_cmd->add_option("--param", opt_args.param, "Parameterization: D, F or RF");
  opt_cmd->add_option("--max-iters", opt_args.options.max_iters, "Iteration budget");
  opt_cmd->add_option("--out", opt_args.out, "Optimized graph output");
  opt_cmd->add_option("--trace-out", opt_args.trace_out, "Convergence trace CSV");
  opt_cmd->add_option("--lambda0", opt_args.options.lambda0, "Initial LM damping");
  opt_cmd->add_option("--lambda-up", opt_args.options.lambda_up, "Damping increase factor");
  opt_cmd->add_option("--lambda-down", opt_args.options.lambda_down, "Damping decrease factor");
  opt_cmd->add_option("--cost-tol", opt_args.options.cost_tol, "Relative cost tolerance");
  opt_cmd->add_option("--delta-tol", opt_args.options.delta_tol, "Step norm tolerance");
  opt_cmd->add_option("--zero-tol", opt_args.options.tol.zero_rel,
                      "Relative zero-eigenvalue tolerance");
  opt_cmd->add_option("--eq-tol", opt_args.options.tol.eq_rel,
                      "Relative equal-eigenvalue tolerance");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Compare an estimate against ground truth");
  eval_cmd->add_option("--estimate", eval_args.estimate_path, "Optimized graph")->required();
  eval_cmd->add_option("--ground-truth", eval_args.ground_truth_path, "Ground-truth graph")
      ->required();
  eval_cmd->add_option("--out", eval_args.out, "Metrics CSV (default: stdout)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Run the full simulate/optimize/eval grid");
  bench_cmd->add_option("--seeds", bench_args.seeds, "Seeds per cell");
  bench_cmd->add_option("--presets", bench_args.presets,
                        "Comma-separated OBS-INIT pairs (default: the 6-row grid)");
  bench_cmd->add_option("--out-dir", bench_args.out_dir, "Output directory")->required();
  bench_cmd->add_option("--landmarks", bench_args.landmarks, "Number of landmarks");
  bench_cmd->add_option("--frames", bench_args.frames, "Number of trajectory frames");
  bench_cmd->add_option("--k", bench_args.k, "Nearest landmarks observed per frame");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) return run_simulate(sim_args);
    if (*opt_cmd) return run_optimize(opt_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*bench_cmd) return run_bench_cmd(bench_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
