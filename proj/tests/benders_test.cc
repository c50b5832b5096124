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

#include "capex/benders.h"
#include "oracle.h"

namespace capex {
namespace {

using testing::LoadFixture;
using testing::RelativeTo;

const SimplexSolver kSimplex;

// Two zones, two sectors, no demand.
SystemSpec Idle() {
  SystemSpec spec;
  spec.name = "idle";
  spec.sets = {{"z1", "z2"}, {"elec", "h2"}, {"elec", "h2"}, {"w1", "w2"}, 4};
  spec.emission_cap = 100.0;
  for (const char* z : {"z1", "z2"}) {
    spec.technologies.push_back({.id = std::string("gas_") + z, .zone = z,
                                 .sector = "elec", .output = "elec",
                                 .investment_cost = 5.0, .variable_cost = 20.0,
                                 .emission_rate = 0.5});
    spec.technologies.push_back({.id = std::string("ely_") + z,
                                 .kind = TechKind::kConversion, .zone = z,
                                 .sector = "elec", .output = "h2",
                                 .input = "elec", .investment_cost = 8.0,
                                 .efficiency = 0.7});
    spec.couplings.push_back({.id = std::string("p2g_") + z, .vector = "h2",
                              .zone = z, .from_sector = "elec",
                              .to_sector = "h2"});
  }
  spec.transmission.push_back({.id = "line", .vector = "elec",
                               .sector = "elec", .from_zone = "z1",
                               .to_zone = "z2", .investment_cost = 1.0});
  return spec;
}

double TotalDemand(const ValidatedSystem& sys) {
  double total = 0.0;
  for (const DemandSeries& d : sys.spec().demand) {
    for (double v : d.values) total += v;
  }
  return total;
}

int BlocksOf(const ValidatedSystem& sys, Mode mode) {
  return ComplicatingLayout::Create(sys, mode)->num_blocks();
}

void ExpectMonotone(const std::vector<IterationRecord>& trace) {
  for (size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].stage != trace[i - 1].stage) continue;
    EXPECT_LE(trace[i].ub, trace[i - 1].ub) << "k=" << trace[i].k;
    EXPECT_GE(trace[i].lb, trace[i - 1].lb) << "k=" << trace[i].k;
  }
}

TEST(Gap, Arithmetic) {
  EXPECT_EQ(RelativeGap(100.0, 100.0), 0.0);
  EXPECT_NEAR(RelativeGap(100.0, 101.0), 0.01, 1e-15);
  EXPECT_GT(RelativeGap(100.0, 101.0), 1e-3);
  EXPECT_NEAR(RelativeGap(100.0, 100.05), 5e-4, 1e-12);
  EXPECT_LE(RelativeGap(100.0, 100.05), BendersConfig{}.tolerance);
  EXPECT_EQ(RelativeGap(0.0, 0.5), 0.5);
  EXPECT_EQ(RelativeGap(-4.0, 4.0), 2.0);
  EXPECT_EQ(RelativeGap(1.0, kInf), kInf);
}

TEST(Prune, SlackAboveThresholdRemoved) {
  // theta >= 0 + x0, evaluated at x0 = 5.
  const std::vector<Cut> pool = {
      {.block = 0, .intercept = 0.0, .gradient = {{0, 1.0}}},
      {.block = 0, .intercept = -10.5, .gradient = {{0, 1.0}}},
      {.block = 0, .intercept = -10.0, .gradient = {{0, 1.0}}},
      {.block = 1, .intercept = 3.0}};
  const std::vector<double> x = {5.0};
  const std::vector<double> theta = {5.0, 3.0};
  EXPECT_EQ(NonBindingCuts(pool, x, theta, 10.0), std::vector<int>{1});
  EXPECT_TRUE(NonBindingCuts({pool[0], pool[3]}, x, theta, 10.0).empty());
}

TEST(Prune, RemovedCutsLeaveLowerBoundUnchanged) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  BendersConfig config = DefaultConfig(Algorithm::kSectoral);
  const SolveReport r = RunBenders(sys, Mode::kSectoral, config);
  const StageResult& s = r.stages.at(0);
  const LayoutPtr layout = s.incumbent.layout;
  const StandardLp full = BuildUpperProblem(sys, *layout, s.pool);
  const LpSolution at = kSimplex.Solve(full);
  ASSERT_EQ(at.status, LpStatus::kOptimal);
  const ComplicatingVector y = ExtractIterate(layout, full, at);
  std::vector<double> theta;
  for (int b = 0; b < layout->num_blocks(); ++b) {
    theta.push_back(PrimalOf(full, at, ThetaLabel(*layout, b)));
  }
  const std::vector<int> drop =
      NonBindingCuts(s.pool, y.values, theta, config.slack_threshold);
  EXPECT_FALSE(drop.empty());
  std::vector<Cut> kept;
  for (size_t i = 0; i < s.pool.size(); ++i) {
    if (!std::binary_search(drop.begin(), drop.end(), static_cast<int>(i))) {
      kept.push_back(s.pool[i]);
    }
  }
  const LpSolution pruned =
      kSimplex.Solve(BuildUpperProblem(sys, *layout, kept));
  ASSERT_EQ(pruned.status, LpStatus::kOptimal);
  EXPECT_NEAR(pruned.objective, at.objective, 1e-9 * at.objective);
}

TEST(Config, Defaults) {
  const BendersConfig c;
  EXPECT_EQ(c.tolerance, 1e-3);
  EXPECT_EQ(c.stage2_tolerance, 1e-2);
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_EQ(c.slack_threshold, 10.0);
  EXPECT_EQ(c.stage2_margin, 0.05);
  EXPECT_EQ(c.theta_floor, 0.0);
  EXPECT_EQ(DefaultConfig(Algorithm::kSpatial).prune_every, 10);
  EXPECT_EQ(DefaultConfig(Algorithm::kTwoStageSpatial).prune_every, 10);
  EXPECT_EQ(DefaultConfig(Algorithm::kSectoral).prune_every, 0);
  EXPECT_EQ(DefaultConfig(Algorithm::kTemporal).prune_every, 0);
}

TEST(Config, AlgorithmNames) {
  for (Algorithm a : AllAlgorithms()) {
    EXPECT_EQ(ParseAlgorithm(AlgorithmName(a)), a);
  }
  EXPECT_EQ(ParseAlgorithm("two-stage-spatial"), Algorithm::kTwoStageSpatial);
  EXPECT_FALSE(ParseAlgorithm("bundle"));
}

TEST(Run, ZeroDemandConvergesImmediately) {
  const ValidatedSystem sys = ValidateSystem(Idle());
  for (Algorithm a : AllAlgorithms()) {
    const SolveReport r = Solve(sys, a, DefaultConfig(a));
    EXPECT_TRUE(r.converged) << AlgorithmName(a);
    EXPECT_EQ(r.objective, 0.0) << AlgorithmName(a);
    if (a == Algorithm::kMonolithic) continue;
    EXPECT_EQ(r.stages.front().iterations, 1) << AlgorithmName(a);
    for (const auto& [label, value] : r.capacities) EXPECT_EQ(value, 0.0);
  }
}

TEST(Run, FirstUpperBoundIsShortfallCost) {
  const ValidatedSystem sys = LoadFixture("toy-1z-1s");
  const SolveReport r = RunBenders(sys, Mode::kTemporal, BendersConfig{});
  ASSERT_FALSE(r.trace.empty());
  EXPECT_NEAR(r.trace[0].ub, 10000.0 * TotalDemand(sys), 1e-6);
}

TEST(Run, CutCountLaw) {
  for (const char* name : {"toy-2z-2s", "ring-4z"}) {
    const ValidatedSystem sys = LoadFixture(name);
    for (Mode mode : {Mode::kTemporal, Mode::kSectoral, Mode::kSpatial}) {
      BendersConfig config;
      config.prune_every = 0;
      const SolveReport r = RunBenders(sys, mode, config);
      const int blocks = BlocksOf(sys, mode);
      for (const IterationRecord& it : r.trace) {
        EXPECT_EQ(it.pool_size, (it.k + 1) * blocks);
        EXPECT_EQ(it.cuts_added, blocks);
        EXPECT_EQ(it.cuts_pruned, 0);
      }
      EXPECT_EQ(r.stages[0].pool.size(), r.trace.size() * blocks);
      EXPECT_EQ(r.stages[0].generated.size(), r.trace.size() * blocks);
    }
  }
}

TEST(Run, PeriodicPruning) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  BendersConfig config;
  config.prune_every = 2;
  const SolveReport r = RunBenders(sys, Mode::kSpatial, config);
  int pruned = 0;
  for (const IterationRecord& it : r.trace) {
    if ((it.k + 1) % 2 != 0) EXPECT_EQ(it.cuts_pruned, 0);
    pruned += it.cuts_pruned;
  }
  EXPECT_EQ(r.stages[0].pool.size() + pruned,
            r.stages[0].generated.size());
}

TEST(Run, ModesMatchOracle) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  const double f = SolveMonolithic(sys).objective;
  std::vector<double> objectives;
  for (Algorithm a : {Algorithm::kTemporal, Algorithm::kSectoral,
                      Algorithm::kSpatial}) {
    const BendersConfig config = DefaultConfig(a);
    const SolveReport r = Solve(sys, a, config);
    ASSERT_TRUE(r.converged) << AlgorithmName(a);
    EXPECT_LE(r.gap, config.tolerance);
    EXPECT_LE(RelativeTo(r.objective, f), config.tolerance) << AlgorithmName(a);
    EXPECT_GE(r.objective, f * (1 - 1e-9));
    ExpectMonotone(r.trace);
    for (const IterationRecord& it : r.trace) {
      EXPECT_LE(it.lb, f * (1 + 1e-6));
      EXPECT_GE(it.ub, f * (1 - 1e-6));
    }
    objectives.push_back(r.objective);
  }
  const auto [lo, hi] = std::minmax_element(objectives.begin(),
                                            objectives.end());
  EXPECT_LE((*hi - *lo) / *lo, 2 * BendersConfig{}.tolerance);
}

TEST(Run, MaxIterationsReturnsIncumbent) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  BendersConfig config;
  config.max_iterations = 2;
  const SolveReport r = RunBenders(sys, Mode::kTemporal, config);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.objective, r.trace.back().ub);
  EXPECT_GT(r.gap, config.tolerance);
  EXPECT_FALSE(r.capacities.empty());
}

TEST(Run, IncumbentCostIsCertified) {
  const ValidatedSystem sys = LoadFixture("toy-1z-1s");
  const SolveReport r = RunBenders(sys, Mode::kTemporal, BendersConfig{});
  const StageResult& s = r.stages[0];
  const LayoutPtr layout = s.incumbent.layout;
  double total = s.incumbent.InvestmentCost();
  for (int b = 0; b < layout->num_blocks(); ++b) {
    total += kSimplex.Solve(BuildSubproblem(sys, layout, b, s.incumbent))
                 .objective;
  }
  EXPECT_NEAR(total, r.objective, 1e-9 * r.objective);
}

TEST(TwoStage, StageBoundsFollowFirstStage) {
  const ValidatedSystem sys = LoadFixture("storage-stress");
  const BendersConfig config = DefaultConfig(Algorithm::kTwoStageSectoral);
  const SolveReport r = RunTwoStage(sys, Mode::kSectoral, config);
  ASSERT_EQ(r.stages.size(), 2u);
  EXPECT_EQ(r.stages[0].mode, Mode::kSectoral);
  EXPECT_EQ(r.stages[1].mode, Mode::kTemporal);
  EXPECT_TRUE(r.stages[0].capacity_bounds.empty());
  const ComplicatingVector& y1 = r.stages[0].final_iterate;
  const auto& bounds = r.stages[1].capacity_bounds;
  for (const TechnologySpec& t : sys.spec().technologies) {
    const std::string label = labels::Cap(t.id);
    const double v = y1.Get(label);
    const auto& [lo, hi] = bounds.at(label);
    if (t.kind == TechKind::kStorage && v <= 1e-9) {
      EXPECT_EQ(lo, t.capacity_min);
      EXPECT_EQ(hi, t.capacity_max);
      continue;
    }
    EXPECT_EQ(lo, std::max(t.capacity_min, v)) << label;
    EXPECT_EQ(hi, std::max(lo, std::min(t.capacity_max, 1.05 * v))) << label;
    EXPECT_GE(r.capacities.at(label), lo - 1e-9);
    EXPECT_LE(r.capacities.at(label), hi + 1e-9);
  }
  int stage1 = 0;
  for (const IterationRecord& it : r.trace) stage1 += it.stage == 1;
  EXPECT_EQ(stage1, r.stages[0].iterations);
  EXPECT_EQ(r.trace.back().stage, 2);
  EXPECT_LE(r.stages[1].gap, config.stage2_tolerance);
}

TEST(TwoStage, DecoupledFirstStageNeedsLittleRefinement) {
  const ValidatedSystem sys = LoadFixture("toy-1z-1s");
  for (Mode mode : {Mode::kSectoral, Mode::kSpatial}) {
    const SolveReport r = RunTwoStage(sys, mode, BendersConfig{});
    ASSERT_EQ(r.stages.size(), 2u);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.stages[1].iterations, 2) << ModeName(mode);
  }
}

TEST(TwoStage, RejectsTemporalFirstStage) {
  const ValidatedSystem sys = LoadFixture("toy-1z-1s");
  EXPECT_THROW(RunTwoStage(sys, Mode::kTemporal, BendersConfig{}), Error);
}

TEST(Monolithic, ReportShape) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  const SolveReport r = SolveMonolithic(sys);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.capacities.size(), 9u);
  ASSERT_EQ(r.emissions.size(), 1u);
  EXPECT_LE(r.emissions[0].realized, 9000.0 + 1e-6);
  EXPECT_FALSE(r.dispatch.empty());
}

}  // namespace
}  // namespace capex
