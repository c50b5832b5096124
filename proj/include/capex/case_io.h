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


// Plain-text case directories, result files and benchmark tables.

#ifndef CAPEX_CASE_IO_H_
#define CAPEX_CASE_IO_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "capex/aggregation.h"
#include "capex/benders.h"
#include "capex/model.h"

namespace capex {

namespace fs = std::filesystem;

// Reads system.txt, technologies.csv, links.csv, demand_*.csv and
// profile_*.csv. A partition.csv, when present, is applied to the result.
SystemSpec LoadCase(const fs::path& dir);

// Writes `spec` so that LoadCase returns an equal spec.
void WriteCase(const SystemSpec& spec, const fs::path& dir);

Partition ReadPartition(const fs::path& file, int period_length);
void WritePartition(const Partition& partition, const fs::path& file);

// capacities.csv, final_capacities.csv, complicating.csv, bounds_trace.csv,
// emissions.csv, dispatch_<subperiod>.csv and report.txt.
void WriteResults(const SolveReport& report, const fs::path& dir);

std::map<std::string, double> ReadValues(const fs::path& file);
std::vector<IterationRecord> ReadBoundsTrace(const fs::path& file);
std::vector<DispatchRecord> ReadDispatch(const fs::path& file);

struct BenchmarkEntry {
  std::string case_name;
  int weeks = 0;
  const SystemSpec* spec = nullptr;  // for capacity grouping
  SolveReport report;
};

struct BenchmarkRow {
  std::string case_name;
  int weeks = 0;
  std::string algorithm;
  bool converged = false;
  double seconds = 0.0;
  int iterations = 0;
  double seconds_per_iteration = 0.0;
  double gap = 0.0;
  double objective = 0.0;
  bool fastest = false;
  // (decomposed - monolithic) / monolithic per "<kind>:<vector>" total.
  std::map<std::string, double> capacity_errors;
};

// "<kind>:<vector>" group of every capacity label of `spec`.
std::map<std::string, std::string> CapacityGroups(const SystemSpec& spec);

// Rows in entry order. Every row whose runtime equals the minimum of its
// (case, weeks) configuration is marked fastest.
std::vector<BenchmarkRow> BuildBenchmark(
    const std::vector<BenchmarkEntry>& entries);

// benchmark.csv and benchmark.md under `dir`.
void EmitBenchmark(const std::vector<BenchmarkRow>& rows, const fs::path& dir);

}  // namespace capex

#endif  // CAPEX_CASE_IO_H_
