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

#include <numeric>
#include <set>

#include "capex/builder.h"
#include "capex/executor.h"
#include "oracle.h"

namespace capex {
namespace {

using testing::LoadFixture;
using testing::Oracle;
using testing::OracleBlockCost;
using testing::OracleIterate;
using testing::SolveOracle;
using testing::StartsWith;

const SimplexSolver kSimplex;
const InteriorPointSolver kInterior;
constexpr double kToyTwoZoneObjective = 843613.84057142795;

SystemSpec OneZone(double demand) {
  SystemSpec spec;
  spec.name = "one";
  spec.sets = {{"z"}, {"elec"}, {"elec"}, {"w1", "w2"}, 3};
  spec.demand.push_back({"elec", "z", "elec", std::vector<double>(6, demand)});
  return spec;
}

double DemandIn(const ValidatedSystem& sys, int w, int zone, int sector) {
  double total = 0.0;
  for (int v = 0; v < sys.num_vectors(); ++v) {
    for (int z = 0; z < sys.num_zones(); ++z) {
      if (zone >= 0 && z != zone) continue;
      for (int s = 0; s < sys.num_sectors(); ++s) {
        if (sector >= 0 && s != sector) continue;
        for (int t = sys.first_hour(w);
             t < sys.first_hour(w) + sys.hours_per_subperiod(); ++t) {
          total += sys.demand(v, z, s, t);
        }
      }
    }
  }
  return total;
}

TEST(Monolithic, ZeroDemand) {
  SystemSpec spec = OneZone(0.0);
  spec.technologies.push_back({.id = "g", .zone = "z", .sector = "elec",
                               .output = "elec", .investment_cost = 3.0,
                               .variable_cost = 1.0});
  const Oracle o = SolveOracle(ValidateSystem(spec));
  ASSERT_EQ(o.solution.status, LpStatus::kOptimal);
  EXPECT_EQ(o.solution.objective, 0.0);
  EXPECT_EQ(o.Value(labels::Cap("g")), 0.0);
}

TEST(Monolithic, NoTechnologiesPaysShortfall) {
  const Oracle o = SolveOracle(ValidateSystem(OneZone(4.0)));
  ASSERT_EQ(o.solution.status, LpStatus::kOptimal);
  EXPECT_DOUBLE_EQ(o.solution.objective, 10000.0 * 4.0 * 6);
}

TEST(Monolithic, TwoZoneGoldenObjective) {
  const Oracle o = SolveOracle(LoadFixture("toy-2z-2s"));
  ASSERT_EQ(o.solution.status, LpStatus::kOptimal);
  EXPECT_NEAR(o.solution.objective, kToyTwoZoneObjective,
              1e-9 * kToyTwoZoneObjective);
  const OptimalityResiduals r = CheckOptimality(o.lp, o.solution);
  EXPECT_LE(r.primal_infeasibility, 1e-7);
  EXPECT_LE(r.dual_infeasibility, 1e-7);
  EXPECT_LE(r.duality_gap, 1e-9);
  const LpSolution ipm = kInterior.Solve(o.lp);
  ASSERT_EQ(ipm.status, LpStatus::kOptimal);
  EXPECT_NEAR(ipm.objective, kToyTwoZoneObjective,
              1e-7 * kToyTwoZoneObjective);
}

TEST(Temporal, OracleCapacitiesReproduceSubperiodCost) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  const Oracle o = SolveOracle(sys);
  const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kTemporal);
  const ComplicatingVector x = OracleIterate(sys, layout, o);
  double total = x.InvestmentCost();
  for (int b = 0; b < layout->num_blocks(); ++b) {
    const StandardLp sub = BuildSubproblem(sys, layout, b, x);
    const LpSolution sol = kSimplex.Solve(sub);
    ASSERT_EQ(sol.status, LpStatus::kOptimal);
    EXPECT_NEAR(sol.objective, OracleBlockCost(sub, *layout, o),
                1e-7 * o.solution.objective);
    total += sol.objective;
  }
  EXPECT_NEAR(total, o.solution.objective, 1e-9 * o.solution.objective);
}

TEST(Temporal, NoCapacityPaysShortfall) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kTemporal);
  ComplicatingVector x = ComplicatingVector::Zero(layout);
  for (int b = 0; b < layout->num_blocks(); ++b) {
    x.values[layout->emission_entry(b)] = 1e9;
  }
  for (int w = 0; w < sys.num_subperiods(); ++w) {
    const LpSolution sol = kSimplex.Solve(BuildSubproblem(sys, layout, w, x));
    ASSERT_EQ(sol.status, LpStatus::kOptimal);
    EXPECT_NEAR(sol.objective, 10000.0 * DemandIn(sys, w, -1, -1), 1e-6);
  }
}

TEST(Temporal, RowCount) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  const StandardLp mono = BuildMonolithic(sys);
  const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kTemporal);
  // Operational rows of the first subperiod: every row of the monolithic
  // model whose label ends in an hour of w1.
  int operational = 0;
  for (const Row& r : mono.rows()) {
    const size_t comma = r.label.rfind(',');
    if (comma == std::string::npos) continue;
    const int t = std::stoi(r.label.substr(comma + 1));
    if (t < sys.hours_per_subperiod()) ++operational;
  }
  const StandardLp sub =
      BuildSubproblem(sys, layout, 0, ComplicatingVector::Zero(layout));
  const int fixed = static_cast<int>(layout->block_entries(0).size());
  EXPECT_EQ(fixed, 9);
  EXPECT_EQ(sub.num_rows(), operational + 1 + fixed + 1);
  EXPECT_TRUE(sub.FindRow("emis(w1)"));
  EXPECT_TRUE(sub.FindRow("fix_q(w1)"));
  EXPECT_TRUE(sub.FindRow("fix_y(cap(line_12))"));
}

TEST(Budget, NoBudgetsDecouple) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  for (Mode mode : {Mode::kSectoral, Mode::kSpatial}) {
    const LayoutPtr layout = ComplicatingLayout::Create(sys, mode);
    ComplicatingVector x = ComplicatingVector::Zero(layout);
    for (int b = 0; b < layout->num_blocks(); ++b) {
      const BlockKey key = layout->block(b);
      const LpSolution sol =
          kSimplex.Solve(BuildSubproblem(sys, layout, b, x));
      ASSERT_EQ(sol.status, LpStatus::kOptimal);
      const double local =
          mode == Mode::kSectoral ? DemandIn(sys, key.w, -1, key.delta)
                                  : DemandIn(sys, key.w, key.delta, -1);
      EXPECT_NEAR(sol.objective, 10000.0 * local, 1e-6)
          << layout->block_name(b);
    }
  }
}

TEST(Budget, SectorBlocksHoldOnlyTheirTechnologies) {
  const ValidatedSystem sys = LoadFixture("storage-stress");
  const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kSectoral);
  const ComplicatingVector x = ComplicatingVector::Zero(layout);
  for (int b = 0; b < layout->num_blocks(); ++b) {
    const StandardLp sub = BuildSubproblem(sys, layout, b, x);
    const std::string sector = sys.sector(layout->block(b).delta);
    int own = 0;
    for (const TechRef& ref : sys.techs()) {
      const TechnologySpec& t = sys.tech_spec(ref.index);
      for (int j = 0; j < sub.num_variables(); ++j) {
        const std::string& label = sub.variable_label(j);
        if (StartsWith(label, "cap(")) continue;
        if (label.find("(" + t.id + ",") == std::string::npos) continue;
        EXPECT_EQ(t.sector, sector) << label << " in " << layout->block_name(b);
        ++own;
      }
    }
    EXPECT_GT(own, 0);
  }
}

TEST(Budget, OracleBudgetsReproduceBlockCost) {
  for (const char* name : {"toy-2z-2s", "ring-4z"}) {
    const ValidatedSystem sys = LoadFixture(name);
    const Oracle o = SolveOracle(sys);
    for (Mode mode : {Mode::kSectoral, Mode::kSpatial}) {
      const LayoutPtr layout = ComplicatingLayout::Create(sys, mode);
      const ComplicatingVector x = OracleIterate(sys, layout, o);
      double total = x.InvestmentCost();
      for (int b = 0; b < layout->num_blocks(); ++b) {
        const StandardLp sub = BuildSubproblem(sys, layout, b, x);
        const LpSolution sol = kSimplex.Solve(sub);
        ASSERT_EQ(sol.status, LpStatus::kOptimal);
        EXPECT_NEAR(sol.objective, OracleBlockCost(sub, *layout, o),
                    1e-7 * o.solution.objective)
            << name << " " << layout->block_name(b);
        total += sol.objective;
      }
      EXPECT_NEAR(total, o.solution.objective, 1e-7 * o.solution.objective)
          << name << " " << ModeName(mode);
    }
  }
}

TEST(Coverage, BlocksAndUpperSpanMonolithicVariables) {
  for (const std::string& name : testing::FixtureNames()) {
    const ValidatedSystem sys = LoadFixture(name);
    const StandardLp mono = BuildMonolithic(sys);
    std::set<std::string> expected;
    for (int j = 0; j < mono.num_variables(); ++j) {
      expected.insert(mono.variable_label(j));
    }
    for (Mode mode : {Mode::kTemporal, Mode::kSectoral, Mode::kSpatial}) {
      const LayoutPtr layout = ComplicatingLayout::Create(sys, mode);
      std::set<std::string> seen;
      for (int b = 0; b < layout->num_blocks(); ++b) {
        const StandardLp sub =
            BuildSubproblem(sys, layout, b, ComplicatingVector::Zero(layout));
        for (int j = 0; j < sub.num_variables(); ++j) {
          const std::string& label = sub.variable_label(j);
          if (!layout->Find(label)) seen.insert(label);
        }
      }
      for (const LayoutEntry& e : layout->entries()) {
        if (e.kind != EntryKind::kExportBudget &&
            e.kind != EntryKind::kTransportBudget &&
            e.kind != EntryKind::kEmissionBudget) {
          seen.insert(e.label);
        }
      }
      EXPECT_EQ(seen, expected) << name << " " << ModeName(mode);
    }
  }
}

TEST(Upper, EmptyPoolFreeInvestment) {
  SystemSpec spec = OneZone(2.0);
  spec.technologies.push_back({.id = "g", .zone = "z", .sector = "elec",
                               .output = "elec", .variable_cost = 1.0,
                               .capacity_max = 10.0});
  const ValidatedSystem sys = ValidateSystem(spec);
  const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kTemporal);
  const LpSolution sol = kSimplex.Solve(BuildUpperProblem(sys, *layout, {}));
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_EQ(sol.objective, 0.0);
}

TEST(Upper, ConstantCut) {
  const ValidatedSystem sys = LoadFixture("storage-stress");
  const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kTemporal);
  const std::vector<Cut> cuts = {{.block = 1, .iterate = 0, .value = 5.0,
                                  .intercept = 5.0}};
  const StandardLp upper = BuildUpperProblem(sys, *layout, cuts);
  const LpSolution sol = kSimplex.Solve(upper);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  // The electrolyzer is fixed at 20 MW for 50 per MW; nothing else is forced.
  EXPECT_NEAR(sol.objective, 5.0 + 20.0 * 50.0, 1e-9);
  EXPECT_NEAR(PrimalOf(upper, sol, ThetaLabel(*layout, 1)), 5.0, 1e-12);
  EXPECT_TRUE(upper.FindRow("cut(0,w2)"));
}

TEST(Upper, FreshCutIsTightAtItsIterate) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  const Oracle o = SolveOracle(sys);
  for (Mode mode : {Mode::kTemporal, Mode::kSectoral, Mode::kSpatial}) {
    const LayoutPtr layout = ComplicatingLayout::Create(sys, mode);
    ComplicatingVector x = OracleIterate(sys, layout, o);
    for (double& v : x.values) v *= 0.9;
    for (int b = 0; b < layout->num_blocks(); ++b) {
      const StandardLp sub = BuildSubproblem(sys, layout, b, x);
      const LpSolution sol = kSimplex.Solve(sub);
      ASSERT_EQ(sol.status, LpStatus::kOptimal);
      const Cut cut = MakeCut(*layout, b, 0, sub, sol, x);
      EXPECT_NEAR(cut.Evaluate(x.values), sol.objective,
                  1e-9 * std::max(1.0, sol.objective));
    }
  }
}

// One plain Benders step from zero capacity.
struct FirstStep {
  StandardLp upper;
  LpSolution upper_solution;
  std::vector<Cut> cuts;
  double ub = 0.0;
};

FirstStep StepFromZero(const ValidatedSystem& sys, const LayoutPtr& layout) {
  FirstStep out;
  const ComplicatingVector x = ComplicatingVector::Zero(layout);
  const SubproblemFactory factory(sys, layout);
  out.ub = x.InvestmentCost();
  for (int b = 0; b < layout->num_blocks(); ++b) {
    const StandardLp sub = factory.Build(b, x);
    const LpSolution sol = kSimplex.Solve(sub);
    EXPECT_EQ(sol.status, LpStatus::kOptimal);
    out.cuts.push_back(MakeCut(*layout, b, 0, sub, sol, x));
    out.ub += sol.objective;
  }
  out.upper = BuildUpperProblem(sys, *layout, out.cuts);
  out.upper_solution = kSimplex.Solve(out.upper);
  return out;
}

TEST(Upper, FirstIterationBrackets) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  for (Mode mode : {Mode::kTemporal, Mode::kSectoral, Mode::kSpatial}) {
    const FirstStep step =
        StepFromZero(sys, ComplicatingLayout::Create(sys, mode));
    ASSERT_EQ(step.upper_solution.status, LpStatus::kOptimal);
    EXPECT_LE(step.upper_solution.objective, kToyTwoZoneObjective);
    EXPECT_GE(step.ub, kToyTwoZoneObjective);
  }
}

TEST(Upper, SectoralAntisymmetryAndSpatialConservation) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  {
    const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kSectoral);
    const FirstStep step = StepFromZero(sys, layout);
    const ComplicatingVector y =
        ExtractIterate(layout, step.upper, step.upper_solution);
    for (int w = 1; w <= 3; ++w) {
      for (const char* z : {"z1", "z2"}) {
        const std::string wn = "w" + std::to_string(w);
        const double ab =
            y.Get("yexp(h2," + std::string(z) + ",elec,h2," + wn + ")");
        const double ba =
            y.Get("yexp(h2," + std::string(z) + ",h2,elec," + wn + ")");
        EXPECT_EQ(ab + ba, 0.0);
      }
    }
  }
  {
    const LayoutPtr layout = ComplicatingLayout::Create(sys, Mode::kSpatial);
    const FirstStep step = StepFromZero(sys, layout);
    const ComplicatingVector y =
        ExtractIterate(layout, step.upper, step.upper_solution);
    for (int w = 1; w <= 3; ++w) {
      const std::string wn = "w" + std::to_string(w);
      EXPECT_NEAR(y.Get("ytrn(elec,z1," + wn + ")") +
                      y.Get("ytrn(elec,z2," + wn + ")"),
                  0.0, 1e-9);
    }
  }
}

TEST(Regularization, LevelArithmetic) {
  StandardLp upper;
  upper.AddVariable("y", 0.0, 10.0, 2.0);
  upper.AddVariable("theta", 0.0, kInf, 1.0);
  const StandardLp reg = BuildRegularizationProblem(upper, 100.0, 110.0, 0.5);
  const Row& row = reg.row(reg.RowIndex("levelset"));
  EXPECT_EQ(row.rhs, 105.0);
  EXPECT_EQ(row.sense, RowSense::kLessEqual);
  for (int j = 0; j < reg.num_variables(); ++j) EXPECT_EQ(reg.cost(j), 0.0);
  const StandardLp pinned = BuildRegularizationProblem(upper, 42.0, 42.0, 0.5);
  EXPECT_EQ(pinned.row(pinned.RowIndex("levelset")).rhs, 42.0);
}

TEST(Regularization, InteriorIterateSatisfiesCutsAndLevel) {
  const ValidatedSystem sys = LoadFixture("toy-2z-2s");
  for (Mode mode : {Mode::kTemporal, Mode::kSectoral, Mode::kSpatial}) {
    const FirstStep step =
        StepFromZero(sys, ComplicatingLayout::Create(sys, mode));
    const double lb = step.upper_solution.objective;
    const StandardLp reg =
        BuildRegularizationProblem(step.upper, lb, step.ub, 0.5);
    const LpSolution sol = kInterior.Solve(reg);
    ASSERT_EQ(sol.status, LpStatus::kOptimal) << ModeName(mode);
    for (int i = 0; i < reg.num_rows(); ++i) {
      const Row& row = reg.row(i);
      if (!StartsWith(row.label, "cut(") && row.label != "levelset") continue;
      const double act = RowActivity(reg, i, sol.primal);
      const double slack = 1e-6 * std::max(1.0, std::abs(row.rhs));
      if (row.sense != RowSense::kGreaterEqual) {
        EXPECT_LE(act, row.rhs + slack) << row.label;
      }
      if (row.sense != RowSense::kLessEqual) {
        EXPECT_GE(act, row.rhs - slack) << row.label;
      }
    }
    for (int j = 0; j < reg.num_variables(); ++j) {
      EXPECT_GE(sol.primal[j], reg.lower(j));
      EXPECT_LE(sol.primal[j], reg.upper(j));
    }
  }
}

}  // namespace
}  // namespace capex
