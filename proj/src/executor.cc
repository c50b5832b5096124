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

#include "capex/executor.h"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <thread>

#include "capex/common.h"

namespace capex {

int ResolveWorkers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CAPEX_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BatchResult SolveBatch(std::span<const StandardLp> problems,
                       const LpSolver& solver, const ExecutorOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const int n = static_cast<int>(problems.size());
  BatchResult result;
  result.workers = ResolveWorkers(options.workers);
  result.solutions.resize(n);
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(result.workers)
  for (int i = 0; i < n; ++i) {
    const int now = ++active;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    try {
      result.solutions[i] = solver.Solve(problems[i], options.lp);
    } catch (...) {
      errors[i] = std::current_exception();
    }
    --active;
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.peak_concurrency = peak.load();
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

BatchResult SolveBatchSerial(std::span<const StandardLp> problems,
                             const LpSolver& solver,
                             const ExecutorOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  BatchResult result;
  result.workers = 1;
  for (const StandardLp& lp : problems) {
    result.solutions.push_back(solver.Solve(lp, options.lp));
  }
  result.peak_concurrency = problems.empty() ? 0 : 1;
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

void RequireOptimal(const BatchResult& result,
                    std::span<const std::string> names) {
  for (size_t i = 0; i < result.solutions.size(); ++i) {
    const LpStatus status = result.solutions[i].status;
    if (status == LpStatus::kOptimal) continue;
    const std::string name = i < names.size() ? names[i] : std::to_string(i);
    if (status == LpStatus::kTimeLimit) {
      throw Error(ErrorCode::kTimeout, "block " + name + " hit its time limit");
    }
    throw Error(ErrorCode::kSolverFailure,
                "block " + name + " ended " +
                    std::string(LpStatusName(status)));
  }
}

}  // namespace capex
