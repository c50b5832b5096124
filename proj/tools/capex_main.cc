// Copyright 2026 The capex Authors
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


// Command-line front end: solve, benchmark, validate, aggregate.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "capex/aggregation.h"
#include "capex/benders.h"
#include "capex/case_io.h"
#include "capex/model.h"

namespace {

namespace fs = std::filesystem;
using namespace capex;

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIterations = 2;

SystemSpec Reduce(const SystemSpec& full, int weeks, uint64_t seed) {
  if (weeks <= 0) return full;
  const Partition p = ClusterPeriods(CollectSeries(full),
                                     full.sets.hours_per_subperiod, weeks,
                                     seed);
  return ApplyWeights(full, p);
}

Algorithm RequireAlgorithm(const std::string& name) {
  if (auto a = ParseAlgorithm(name)) return *a;
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm '" + name + "'");
}

void PrintSummary(const SolveReport& r) {
  std::printf("%s: %s objective=%.10g lb=%.10g gap=%.3e iterations=%d "
              "time=%.3fs\n",
              std::string(AlgorithmName(r.algorithm)).c_str(),
              r.converged ? "converged" : "not converged", r.objective,
              r.lower_bound, r.gap, r.iterations, r.seconds);
  for (const auto& [label, v] : r.capacities) {
    std::printf("  %-28s %.6g\n", label.c_str(), v);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capex: capacity expansion by regularized Benders"};
  app.require_subcommand(1);

  std::string case_dir, algorithm = "monolithic", out_dir;
  int weeks = 0, max_iters = 400, workers = 0;
  double tol = 1e-3, stage2_tol = 1e-2, alpha = 0.5;
  uint64_t seed = 1;
  bool verbose = false;
  CLI::App* solve = app.add_subcommand("solve", "Solve one case");
  solve->add_option("--case", case_dir, "Case directory")->required();
  solve->add_option("--algorithm", algorithm,
                    "monolithic|temporal|sectoral|spatial|"
                    "two-stage-sectoral|two-stage-spatial");
  solve->add_option("--weeks", weeks,
                    "Representative subperiods (0 keeps the full horizon)");
  solve->add_option("--tol", tol, "Relative gap tolerance");
  solve->add_option("--stage2-tol", stage2_tol,
                    "Relative gap tolerance of the two-stage second stage");
  solve->add_option("--max-iters", max_iters, "Iteration limit per stage");
  solve->add_option("--alpha", alpha, "Level-set parameter");
  solve->add_option("--workers", workers,
                    "Subproblem workers (0: CAPEX_WORKERS or all cores)");
  solve->add_option("--seed", seed, "Clustering seed");
  solve->add_option("--out", out_dir, "Results directory");
  solve->add_flag("-v,--verbose", verbose, "Print every iteration");

  std::string cases_dir, algorithms = "monolithic,temporal,sectoral,spatial,"
                                      "two-stage-sectoral,two-stage-spatial";
  std::string bench_out = "benchmark";
  std::vector<int> bench_weeks;
  CLI::App* bench = app.add_subcommand("benchmark", "Run a case sweep");
  bench->add_option("--cases", cases_dir, "Directory of case directories")
      ->required();
  bench->add_option("--algorithms", algorithms, "Comma-separated list");
  bench->add_option("--weeks", bench_weeks,
                    "Representative subperiod counts (default: full)");
  bench->add_option("--workers", workers, "Subproblem workers");
  bench->add_option("--out", bench_out, "Output directory");

  CLI::App* validate = app.add_subcommand("validate", "Check a case");
  validate->add_option("--case", case_dir, "Case directory")->required();

  CLI::App* aggregate =
      app.add_subcommand("aggregate", "Print a representative partition");
  aggregate->add_option("--case", case_dir, "Case directory")->required();
  aggregate->add_option("--weeks", weeks, "Number of clusters")->required();
  aggregate->add_option("--seed", seed, "Clustering seed");
  aggregate->add_option("--out", out_dir, "Write partition.csv here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      ValidatedSystem sys = ValidateSystem(LoadCase(case_dir));
      std::printf("%s: %d zones, %d sectors, %d vectors, %d subperiods of "
                  "%d h, %zu technologies\n",
                  sys.spec().name.c_str(), sys.num_zones(), sys.num_sectors(),
                  sys.num_vectors(), sys.num_subperiods(),
                  sys.hours_per_subperiod(), sys.spec().technologies.size());
      return kExitConverged;
    }
    if (*aggregate) {
      const SystemSpec full = LoadCase(case_dir);
      const Partition p = ClusterPeriods(CollectSeries(full),
                                         full.sets.hours_per_subperiod, weeks,
                                         seed);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        WritePartition(p, fs::path(out_dir) / "partition.csv");
      }
      for (size_t c = 0; c < p.representatives.size(); ++c) {
        std::printf("cluster %zu: representative %d weight %g\n", c,
                    p.representatives[c], p.weights[c]);
      }
      return kExitConverged;
    }
    if (*solve) {
      const Algorithm a = RequireAlgorithm(algorithm);
      const ValidatedSystem sys =
          ValidateSystem(Reduce(LoadCase(case_dir), weeks, seed));
      BendersConfig config = DefaultConfig(a);
      config.tolerance = tol;
      config.stage2_tolerance = stage2_tol;
      config.max_iterations = max_iters;
      config.alpha = alpha;
      config.verbose = verbose;
      config.executor.workers = workers;
      const SolveReport report = Solve(sys, a, config);
      PrintSummary(report);
      if (!out_dir.empty()) WriteResults(report, out_dir);
      return report.converged ? kExitConverged : kExitMaxIterations;
    }
    if (*bench) {
      std::vector<Algorithm> list;
      std::stringstream ss(algorithms);
      for (std::string item; std::getline(ss, item, ',');) {
        list.push_back(RequireAlgorithm(item));
      }
      std::vector<fs::path> cases;
      for (const auto& entry : fs::directory_iterator(cases_dir)) {
        if (fs::exists(entry.path() / "system.txt")) {
          cases.push_back(entry.path());
        }
      }
      std::sort(cases.begin(), cases.end());
      if (bench_weeks.empty()) bench_weeks.push_back(0);
      std::vector<SystemSpec> specs;
      specs.reserve(cases.size() * bench_weeks.size());
      std::vector<BenchmarkEntry> entries;
      bool all_converged = true;
      for (const fs::path& c : cases) {
        for (int k : bench_weeks) {
          specs.push_back(Reduce(LoadCase(c), k, seed));
          const ValidatedSystem sys = ValidateSystem(specs.back());
          for (Algorithm a : list) {
            BendersConfig config = DefaultConfig(a);
            config.executor.workers = workers;
            BenchmarkEntry e;
            e.case_name = c.filename().string();
            e.weeks = sys.num_subperiods();
            e.spec = &specs.back();
            e.report = Solve(sys, a, config);
            all_converged = all_converged && e.report.converged;
            std::printf("%-16s weeks=%d %-20s %.3fs obj=%.10g\n",
                        e.case_name.c_str(), e.weeks,
                        std::string(AlgorithmName(a)).c_str(),
                        e.report.seconds, e.report.objective);
            entries.push_back(std::move(e));
          }
        }
      }
      EmitBenchmark(BuildBenchmark(entries), bench_out);
      return all_converged ? kExitConverged : kExitMaxIterations;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    for (const Violation& v : e.violations()) {
      std::fprintf(stderr, "  [%s] %s\n",
                   std::string(ErrorCodeName(v.code)).c_str(),
                   v.message.c_str());
    }
    return kExitError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n",
                 std::string(ErrorCodeName(e.code())).c_str(), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
