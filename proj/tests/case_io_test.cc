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


#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "capex/case_io.h"
#include "oracle.h"

namespace capex {
namespace {

using testing::LoadFixture;

const SimplexSolver kSimplex;

fs::path Fixture(const char* name) { return fs::path(CAPEX_CASES_DIR) / name; }

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("capex_" + std::string(info->test_suite_name()) + "_" +
             info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string Slurp(const fs::path& file) {
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Replace(const fs::path& file, const std::string& from,
             const std::string& to) {
  std::string text = Slurp(file);
  const size_t at = text.find(from);
  ASSERT_NE(at, std::string::npos) << from;
  text.replace(at, from.size(), to);
  std::ofstream(file) << text;
}

ErrorCode LoadError(const fs::path& dir, std::string* message = nullptr) {
  try {
    LoadCase(dir);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "loaded without error";
  return ErrorCode::kInvalidArgument;
}

// Exercises the optional columns and keys the fixtures leave out.
SystemSpec Everything() {
  SystemSpec spec;
  spec.name = "everything";
  spec.sets = {{"a", "b"}, {"elec", "heat"}, {"elec", "heat"}, {"w1", "w2"}, 3};
  spec.emission_cap = 123.25;
  spec.default_nse_penalty = 5000.0;
  spec.nse_penalties = {{"heat", "heat", 700.0}};
  spec.technologies = {
      {.id = "pv", .zone = "a", .sector = "elec", .output = "elec",
       .investment_cost = 0.1, .profile = "sun", .capacity_max = 50.0},
      {.id = "boiler", .kind = TechKind::kConversion, .zone = "b",
       .sector = "heat", .output = "heat", .input = "elec",
       .investment_cost = 1.0 / 3.0, .variable_cost = 2.5, .efficiency = 0.95,
       .emission_rate = 0.01},
      {.id = "pit", .kind = TechKind::kStorage, .zone = "b", .sector = "heat",
       .output = "heat", .investment_cost = 0.7, .variable_cost = 0.125,
       .charge_efficiency = 0.9, .discharge_efficiency = 0.85,
       .power_ratio = 0.2, .long_duration = true, .capacity_min = 1.0,
       .capacity_max = 90.0}};
  spec.transmission = {{.id = "ab", .vector = "elec", .sector = "elec",
                        .from_zone = "a", .to_zone = "b",
                        .investment_cost = 3.0, .variable_cost = 0.5,
                        .capacity_min = 2.0, .capacity_max = 20.0}};
  spec.couplings = {{.id = "e2h", .vector = "elec", .zone = "b",
                     .from_sector = "elec", .to_sector = "heat",
                     .bidirectional = true}};
  spec.demand = {{"elec", "a", "elec", {1, 2, 3, 4, 5, 6}},
                 {"elec", "b", "elec", {0, 0, 0, 0, 0, 0}},
                 {"heat", "a", "heat", {2, 2, 2, 2, 2, 2}},
                 {"heat", "b", "heat", {0.5, 0, 0.25, 1e-7, 3, 1e6}}};
  spec.profiles = {{"sun", "a", {0, 0.5, 1, 0.1, 0.2, 0.3}}};
  spec.subperiod_weights = {2.0, 1.0};
  spec.chronology = {0, 1, 0};
  spec.representative_period = {0, 1};
  return spec;
}

TEST(Load, SmallestFixtureValidates) {
  const SystemSpec spec = LoadCase(Fixture("toy-1z-1s"));
  EXPECT_EQ(spec.name, "toy-1z-1s");
  EXPECT_TRUE(CheckSystem(spec).empty());
}

TEST(Load, TwoVectorsAndPowerToGas) {
  const SystemSpec spec = LoadCase(Fixture("toy-2z-2s"));
  EXPECT_EQ(spec.sets.vectors, (std::vector<std::string>{"elec", "h2"}));
  ASSERT_EQ(spec.couplings.size(), 2u);
  for (const CouplingLink& c : spec.couplings) {
    EXPECT_EQ(c.vector, "h2");
    EXPECT_EQ(c.from_sector, "elec");
    EXPECT_EQ(c.to_sector, "h2");
    EXPECT_FALSE(c.bidirectional);
  }
  EXPECT_EQ(spec.transmission.size(), 1u);
}

TEST(Load, NonNumericCellNamesRowAndColumn) {
  TempDir tmp;
  fs::copy(Fixture("toy-1z-1s"), tmp.path());
  Replace(tmp.path() / "technologies.csv", "25.0,40.0", "25.0,forty");
  std::string message;
  EXPECT_EQ(LoadError(tmp.path(), &message), ErrorCode::kParseError);
  EXPECT_NE(message.find("technologies.csv:3"), std::string::npos) << message;
  EXPECT_NE(message.find("variable_cost"), std::string::npos) << message;
}

TEST(Load, NonNumericDemand) {
  TempDir tmp;
  fs::copy(Fixture("toy-1z-1s"), tmp.path());
  std::string text = Slurp(tmp.path() / "demand_elec.csv");
  const size_t line = text.find("\n5,");
  ASSERT_NE(line, std::string::npos);
  text.replace(line + 3, text.find('\n', line + 1) - line - 3, "n/a");
  std::ofstream(tmp.path() / "demand_elec.csv") << text;
  std::string message;
  EXPECT_EQ(LoadError(tmp.path(), &message), ErrorCode::kParseError);
  EXPECT_NE(message.find("demand_elec.csv:7"), std::string::npos) << message;
}

TEST(Load, UnknownKey) {
  TempDir tmp;
  fs::copy(Fixture("toy-1z-1s"), tmp.path());
  std::ofstream(tmp.path() / "system.txt", std::ios::app) << "voltage = 400\n";
  EXPECT_EQ(LoadError(tmp.path()), ErrorCode::kUnknownKey);
}

TEST(Load, MissingKey) {
  TempDir tmp;
  fs::copy(Fixture("toy-1z-1s"), tmp.path());
  Replace(tmp.path() / "system.txt", "sectors = elec\n", "");
  EXPECT_EQ(LoadError(tmp.path()), ErrorCode::kSchemaViolation);
}

TEST(Load, WrongUnits) {
  TempDir tmp;
  fs::copy(Fixture("toy-1z-1s"), tmp.path());
  std::ofstream(tmp.path() / "system.txt", std::ios::app) << "power_unit = kW\n";
  EXPECT_EQ(LoadError(tmp.path()), ErrorCode::kSchemaViolation);
}

TEST(Load, ShortSeries) {
  TempDir tmp;
  fs::copy(Fixture("toy-1z-1s"), tmp.path());
  std::string text = Slurp(tmp.path() / "profile_solar.csv");
  text.erase(text.rfind('\n', text.size() - 2) + 1);
  std::ofstream(tmp.path() / "profile_solar.csv") << text;
  EXPECT_EQ(LoadError(tmp.path()), ErrorCode::kSchemaViolation);
}

TEST(Load, MissingDirectory) {
  EXPECT_EQ(LoadError(fs::path(CAPEX_CASES_DIR) / "no-such-case"),
            ErrorCode::kIo);
}

TEST(RoundTrip, FixturesAreFixedPoints) {
  for (const std::string& name : testing::FixtureNames()) {
    TempDir tmp;
    const SystemSpec spec = LoadCase(Fixture(name.c_str()));
    WriteCase(spec, tmp.path() / name);
    EXPECT_EQ(LoadCase(tmp.path() / name), spec) << name;
  }
}

TEST(RoundTrip, OptionalFields) {
  TempDir tmp;
  const SystemSpec spec = Everything();
  for (const Violation& v : CheckSystem(spec)) ADD_FAILURE() << v.message;
  WriteCase(spec, tmp.path());
  EXPECT_EQ(LoadCase(tmp.path()), spec);
}

TEST(RoundTrip, PartitionFile) {
  TempDir tmp;
  const SystemSpec full = LoadCase(Fixture("storage-stress"));
  const Partition p = ClusterPeriods(CollectSeries(full), 24, 2, 4);
  WritePartition(p, tmp.path() / "partition.csv");
  EXPECT_EQ(ReadPartition(tmp.path() / "partition.csv", 24), p);
  fs::copy(Fixture("storage-stress"), tmp.path() / "case");
  WritePartition(p, tmp.path() / "case" / "partition.csv");
  EXPECT_EQ(LoadCase(tmp.path() / "case"), ApplyWeights(full, p));
}

TEST(Results, ZeroDemandWritesZeroCapacities) {
  TempDir tmp;
  SystemSpec spec = LoadCase(Fixture("toy-1z-1s"));
  for (DemandSeries& d : spec.demand) {
    std::fill(d.values.begin(), d.values.end(), 0.0);
  }
  const SolveReport r =
      RunBenders(ValidateSystem(spec), Mode::kTemporal, BendersConfig{});
  WriteResults(r, tmp.path());
  const auto caps = ReadValues(tmp.path() / "capacities.csv");
  EXPECT_EQ(caps.size(), 3u);
  for (const auto& [label, v] : caps) EXPECT_EQ(v, 0.0) << label;
}

TEST(Results, FilesRoundTrip) {
  TempDir tmp;
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  const SolveReport r = Solve(sys, Algorithm::kTwoStageSectoral,
                              DefaultConfig(Algorithm::kTwoStageSectoral));
  WriteResults(r, tmp.path());
  EXPECT_EQ(ReadValues(tmp.path() / "capacities.csv"), r.capacities);
  EXPECT_EQ(ReadValues(tmp.path() / "complicating.csv"), r.complicating);
  EXPECT_EQ(ReadValues(tmp.path() / "final_capacities.csv"),
            r.final_capacities);
  const std::vector<IterationRecord> trace =
      ReadBoundsTrace(tmp.path() / "bounds_trace.csv");
  ASSERT_EQ(static_cast<int>(trace.size()), r.iterations);
  for (size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(trace[i].stage, r.trace[i].stage);
    EXPECT_EQ(trace[i].k, r.trace[i].k);
    EXPECT_EQ(trace[i].lb, r.trace[i].lb);
    EXPECT_EQ(trace[i].ub, r.trace[i].ub);
    EXPECT_EQ(trace[i].pool_size, r.trace[i].pool_size);
  }
  size_t records = 0;
  for (int w = 0; w < sys.num_subperiods(); ++w) {
    const fs::path file =
        tmp.path() / ("dispatch_" + sys.subperiod(w) + ".csv");
    ASSERT_TRUE(fs::exists(file)) << file;
    for (const DispatchRecord& d : ReadDispatch(file)) {
      EXPECT_EQ(d.block.substr(0, sys.subperiod(w).size()), sys.subperiod(w));
      ++records;
    }
  }
  EXPECT_EQ(records, r.dispatch.size());
  const std::string report = Slurp(tmp.path() / "report.txt");
  EXPECT_NE(report.find("[stage 1]"), std::string::npos);
  EXPECT_NE(report.find("[stage 2]"), std::string::npos);
}

// Fixing the written capacities and emission budgets in the monolithic
// model reproduces the reported upper bound.
TEST(Results, ReloadedCapacitiesReproduceObjective) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  for (Algorithm a : {Algorithm::kTemporal, Algorithm::kTwoStageSectoral,
                      Algorithm::kTwoStageSpatial}) {
    TempDir tmp;
    const SolveReport r = Solve(sys, a, DefaultConfig(a));
    WriteResults(r, tmp.path());
    const auto caps = ReadValues(tmp.path() / "capacities.csv");
    const auto all = ReadValues(tmp.path() / "complicating.csv");
    MonolithicOptions options;
    for (int w = 0; w < sys.num_subperiods(); ++w) {
      options.subperiod_emission_budgets.push_back(
          all.at("q(" + sys.subperiod(w) + ")"));
    }
    std::vector<Fixing> fixings;
    for (const auto& [label, v] : caps) fixings.push_back({label, v, ""});
    const StandardLp lp = FixVariables(BuildMonolithic(sys, options), fixings);
    const LpSolution sol = kSimplex.Solve(lp);
    ASSERT_EQ(sol.status, LpStatus::kOptimal);
    EXPECT_NEAR(sol.objective, r.objective, 1e-6 * r.objective)
        << AlgorithmName(a);
  }
}

SolveReport Fake(Algorithm a, double seconds, int iterations,
                 std::map<std::string, double> caps = {}) {
  SolveReport r;
  r.algorithm = a;
  r.converged = true;
  r.seconds = seconds;
  r.iterations = iterations;
  r.objective = 100.0;
  r.capacities = std::move(caps);
  return r;
}

std::vector<std::string> Fastest(const std::vector<BenchmarkRow>& rows) {
  std::vector<std::string> out;
  for (const BenchmarkRow& r : rows) {
    if (r.fastest) out.push_back(r.case_name + "/" + r.algorithm);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Benchmark, SingleAlgorithmIsFastest) {
  const auto rows =
      BuildBenchmark({{"c", 0, nullptr, Fake(Algorithm::kTemporal, 3.0, 4)}});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].fastest);
  EXPECT_EQ(rows[0].seconds_per_iteration, 0.75);
}

TEST(Benchmark, TiesAreAllMarked) {
  const auto rows = BuildBenchmark(
      {{"c", 0, nullptr, Fake(Algorithm::kTemporal, 2.0, 4)},
       {"c", 0, nullptr, Fake(Algorithm::kSectoral, 2.0, 9)},
       {"c", 0, nullptr, Fake(Algorithm::kSpatial, 2.5, 9)}});
  EXPECT_EQ(Fastest(rows),
            (std::vector<std::string>{"c/sectoral", "c/temporal"}));
}

TEST(Benchmark, SweepArgminPerCase) {
  const SystemSpec one = LoadCase(Fixture("toy-1z-1s"));
  const SystemSpec two = LoadCase(Fixture("toy-2z-2s"));
  std::vector<BenchmarkEntry> entries = {
      {"toy-1z-1s", 0, &one,
       Fake(Algorithm::kMonolithic, 0.4, 1, {{"cap(solar)", 100.0}})},
      {"toy-1z-1s", 0, &one,
       Fake(Algorithm::kTemporal, 0.2, 5, {{"cap(solar)", 110.0}})},
      {"toy-1z-1s", 0, &one,
       Fake(Algorithm::kSectoral, 0.3, 6, {{"cap(solar)", 90.0}})},
      {"toy-2z-2s", 0, &two,
       Fake(Algorithm::kMonolithic, 1.5, 1,
            {{"cap(solar_z1)", 10.0}, {"cap(solar_z2)", 30.0}})},
      {"toy-2z-2s", 0, &two,
       Fake(Algorithm::kTemporal, 0.9, 8,
            {{"cap(solar_z1)", 20.0}, {"cap(solar_z2)", 30.0}})},
      {"toy-2z-2s", 0, &two, Fake(Algorithm::kSectoral, 0.7, 8)}};
  const auto rows = BuildBenchmark(entries);
  ASSERT_EQ(rows.size(), 6u);
  const std::vector<std::string> expected = {"toy-1z-1s/temporal",
                                             "toy-2z-2s/sectoral"};
  EXPECT_EQ(Fastest(rows), expected);
  EXPECT_DOUBLE_EQ(rows[1].capacity_errors.at("generation:elec"), 0.1);
  EXPECT_DOUBLE_EQ(rows[2].capacity_errors.at("generation:elec"), -0.1);
  EXPECT_DOUBLE_EQ(rows[4].capacity_errors.at("generation:elec"), 0.25);

  std::mt19937 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(entries.begin(), entries.end(), rng);
    EXPECT_EQ(Fastest(BuildBenchmark(entries)), expected);
  }

  TempDir tmp;
  EmitBenchmark(rows, tmp.path());
  const std::string csv = Slurp(tmp.path() / "benchmark.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_NE(csv.find("err:generation:elec"), std::string::npos);
  const std::string md = Slurp(tmp.path() / "benchmark.md");
  EXPECT_NE(md.find("| toy-1z-1s | 0 | temporal | **0.200** |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| toy-2z-2s | 0 | sectoral | **0.700** |"),
            std::string::npos);
}

}  // namespace
}  // namespace capex
