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

// Concurrent solution of independent LPs.

#ifndef CAPEX_EXECUTOR_H_
#define CAPEX_EXECUTOR_H_

#include <span>
#include <string>
#include <vector>

#include "capex/lp.h"

namespace capex {

struct ExecutorOptions {
  int workers = 0;  // <= 0: CAPEX_WORKERS, else hardware threads
  LpOptions lp;     // lp.time_limit_seconds applies to each problem
};

struct BatchResult {
  std::vector<LpSolution> solutions;  // same order as the input
  int workers = 1;
  int peak_concurrency = 0;
  double seconds = 0.0;
};

int ResolveWorkers(int requested);

// OpenMP dynamic schedule, one solve per task.
BatchResult SolveBatch(std::span<const StandardLp> problems,
                       const LpSolver& solver, const ExecutorOptions& options);

// Reference implementation: one problem after another on the caller thread.
BatchResult SolveBatchSerial(std::span<const StandardLp> problems,
                             const LpSolver& solver,
                             const ExecutorOptions& options);

// Throws kTimeout or kSolverFailure naming the first non-optimal problem.
void RequireOptimal(const BatchResult& result,
                    std::span<const std::string> names);

}  // namespace capex

#endif  // CAPEX_EXECUTOR_H_
