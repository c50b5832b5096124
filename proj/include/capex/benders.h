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

// Regularized Benders iterations over the decomposition modes, the
// two-stage refinement, and the monolithic reference solve.

#ifndef CAPEX_BENDERS_H_
#define CAPEX_BENDERS_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capex/builder.h"
#include "capex/executor.h"
#include "capex/model.h"

namespace capex {

enum class Algorithm {
  kMonolithic,
  kTemporal,
  kSectoral,
  kSpatial,
  kTwoStageSectoral,
  kTwoStageSpatial,
};

std::string_view AlgorithmName(Algorithm algorithm);
std::optional<Algorithm> ParseAlgorithm(std::string_view name);
const std::vector<Algorithm>& AllAlgorithms();

struct BendersConfig {
  double tolerance = 1e-3;
  double stage2_tolerance = 1e-2;
  int max_iterations = 400;
  double alpha = 0.5;
  bool regularize = true;
  double slack_threshold = 10.0;  // same currency as the objective
  int prune_every = 0;            // 0 disables periodic pruning
  double theta_floor = 0.0;
  double stage2_margin = 0.05;
  bool verbose = false;  // one stderr line per iteration
  ExecutorOptions executor;
};

// Defaults per algorithm: spatial runs prune every 10 iterations.
BendersConfig DefaultConfig(Algorithm algorithm);

struct IterationRecord {
  int stage = 1;
  int k = 0;
  double lb = 0.0;
  double ub = 0.0;
  double gap = 0.0;
  int cuts_added = 0;
  int cuts_pruned = 0;
  int pool_size = 0;
  double wall_ms = 0.0;
};

struct BlockEmission {
  std::string block;
  double realized = 0.0;
  double budget = 0.0;
};

struct DispatchRecord {
  std::string block;
  std::string label;
  double value = 0.0;
};

struct StageResult {
  Mode mode = Mode::kTemporal;
  bool converged = false;
  int iterations = 0;
  double lb = 0.0;
  double ub = kInf;
  double gap = kInf;
  ComplicatingVector incumbent;      // best upper-bound iterate
  ComplicatingVector final_iterate;  // last upper-problem solution
  std::vector<double> final_theta;   // per block, at final_iterate
  std::vector<Cut> pool;             // cuts alive at the end
  std::vector<Cut> generated;        // every cut produced
  std::vector<BlockEmission> emissions;  // at the incumbent
  std::vector<DispatchRecord> dispatch;  // at the incumbent
  // Capacity bounds imposed on this stage; empty for unrestricted runs.
  std::map<std::string, std::pair<double, double>, std::less<>>
      capacity_bounds;
};

struct SolveReport {
  Algorithm algorithm = Algorithm::kMonolithic;
  bool converged = false;
  double objective = 0.0;  // certified upper bound, or the LP optimum
  double lower_bound = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  std::vector<IterationRecord> trace;
  std::vector<StageResult> stages;
  std::map<std::string, double> capacities;        // incumbent
  std::map<std::string, double> final_capacities;  // last upper solution
  std::map<std::string, double> complicating;      // incumbent, all entries
  std::vector<BlockEmission> emissions;
  std::vector<DispatchRecord> dispatch;
};

SolveReport SolveMonolithic(const ValidatedSystem& system);

// One run of the regularized loop in `mode`.
SolveReport RunBenders(const ValidatedSystem& system, Mode mode,
                       const BendersConfig& config);

// Budget-mode run followed by a temporal run seeded with its cuts.
SolveReport RunTwoStage(const ValidatedSystem& system, Mode budget_mode,
                        const BendersConfig& config);

SolveReport Solve(const ValidatedSystem& system, Algorithm algorithm,
                  const BendersConfig& config);

// Cuts whose slack at (x, theta) exceeds `threshold`.
std::vector<int> NonBindingCuts(const std::vector<Cut>& pool,
                                const std::vector<double>& x,
                                const std::vector<double>& theta,
                                double threshold);

double RelativeGap(double lb, double ub);

}  // namespace capex

#endif  // CAPEX_BENDERS_H_
