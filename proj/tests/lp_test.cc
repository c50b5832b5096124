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

#include <random>
#include <sstream>

#include "capex/common.h"
#include "capex/lp.h"

namespace capex {
namespace {

const SimplexSolver kSimplex;
const InteriorPointSolver kInterior;

StandardLp SingleBound() {
  StandardLp lp;
  const int x = lp.AddVariable("x", -kInf, kInf, 1.0);
  lp.AddRow("floor", {{x, 1.0}}, RowSense::kGreaterEqual, 3.0);
  return lp;
}

// Small production plan with a unique, non-degenerate optimum.
StandardLp ProductionPlan(double capacity_a = 40.0, double capacity_b = 60.0) {
  StandardLp lp;
  const int p = lp.AddVariable("make(p)", 0, kInf, -3.0);
  const int q = lp.AddVariable("make(q)", 0, kInf, -5.0);
  lp.AddRow("machine(a)", {{p, 1.0}, {q, 2.0}}, RowSense::kLessEqual,
            capacity_a);
  lp.AddRow("machine(b)", {{p, 3.0}, {q, 2.0}}, RowSense::kLessEqual,
            capacity_b);
  lp.AddRow("demand(q)", {{q, 1.0}}, RowSense::kGreaterEqual, 5.0);
  return lp;
}

StandardLp RandomFeasibleLp(std::mt19937& rng, int n, int m) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  StandardLp lp;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = unit(rng) < 0.8 ? 0.0 : -5.0;
    const double hi = unit(rng) < 0.5 ? kInf : 10.0 + 10 * unit(rng);
    x0[j] = lo + (std::isfinite(hi) ? (hi - lo) * unit(rng) : 4 * unit(rng));
    lp.AddVariable("x" + std::to_string(j), lo, hi, 2 * unit(rng) + 0.1);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<Term> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < 0.4) {
        const double a = coef(rng) * 10;
        terms.push_back({j, a});
        act += a * x0[j];
      }
    }
    const double r = unit(rng);
    if (r < 0.3) {
      lp.AddRow("r" + std::to_string(i), terms, RowSense::kEqual, act);
    } else if (r < 0.65) {
      lp.AddRow("r" + std::to_string(i), terms, RowSense::kLessEqual,
                act + 2 * unit(rng));
    } else {
      lp.AddRow("r" + std::to_string(i), terms, RowSense::kGreaterEqual,
                act - 2 * unit(rng));
    }
  }
  return lp;
}

TEST(LpTest, SingleLowerBoundRow) {
  for (const LpSolver* solver : {static_cast<const LpSolver*>(&kSimplex),
                                 static_cast<const LpSolver*>(&kInterior)}) {
    StandardLp lp = SingleBound();
    LpSolution sol = solver->Solve(lp);
    ASSERT_EQ(sol.status, LpStatus::kOptimal) << solver->name();
    EXPECT_NEAR(sol.objective, 3.0, 1e-7) << solver->name();
    EXPECT_NEAR(DualOf(lp, sol, "floor"), 1.0, 1e-7) << solver->name();
  }
}

TEST(LpTest, InfeasibleIsReported) {
  StandardLp lp;
  const int x = lp.AddVariable("x", 0.0, kInf, 0.0);
  lp.AddRow("cap", {{x, 1.0}}, RowSense::kLessEqual, -1.0);
  EXPECT_EQ(kSimplex.Solve(lp).status, LpStatus::kInfeasible);
  EXPECT_EQ(kInterior.Solve(lp).status, LpStatus::kInfeasible);
}

TEST(LpTest, EmptyInfeasibleRow) {
  StandardLp lp;
  lp.AddVariable("x", 0.0, 1.0, 1.0);
  lp.AddRow("nothing", {}, RowSense::kGreaterEqual, 1.0);
  EXPECT_EQ(kSimplex.Solve(lp).status, LpStatus::kInfeasible);
}

TEST(LpTest, UnboundedIsReported) {
  StandardLp lp;
  const int x = lp.AddVariable("x", 0.0, kInf, -1.0);
  const int y = lp.AddVariable("y", 0.0, kInf, 0.0);
  lp.AddRow("r", {{x, 1.0}, {y, -1.0}}, RowSense::kLessEqual, 1.0);
  EXPECT_EQ(kSimplex.Solve(lp).status, LpStatus::kUnbounded);
}

TEST(LpTest, DualOfNonOptimalThrows) {
  StandardLp lp;
  const int x = lp.AddVariable("x", 0.0, kInf, 0.0);
  lp.AddRow("cap", {{x, 1.0}}, RowSense::kLessEqual, -1.0);
  LpSolution sol = kSimplex.Solve(lp);
  try {
    DualOf(lp, sol, "cap");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotOptimal);
  }
}

TEST(LpTest, UnknownRowLabelThrows) {
  StandardLp lp = SingleBound();
  LpSolution sol = kSimplex.Solve(lp);
  try {
    DualOf(lp, sol, "ceiling");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownLabel);
  }
}

TEST(LpTest, DuplicateEntriesRejected) {
  StandardLp lp;
  const int x = lp.AddVariable("x", 0.0, 1.0);
  EXPECT_THROW(lp.AddRow("r", {{x, 1.0}, {x, 2.0}}, RowSense::kEqual, 0.0),
               Error);
  EXPECT_THROW(lp.AddVariable("x", 0.0, 1.0), Error);
  lp.AddRow("r", {{x, 1.0}}, RowSense::kEqual, 0.0);
  EXPECT_THROW(lp.AddRow("r", {{x, 1.0}}, RowSense::kEqual, 0.0), Error);
}

TEST(LpTest, FixingTwiceIsAnError) {
  StandardLp lp = ProductionPlan();
  std::vector<Fixing> fixes = {{"make(p)", 1.0, ""}, {"make(p)", 2.0, ""}};
  try {
    FixVariables(lp, fixes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateLabel);
  }
}

TEST(LpTest, FixingDualIsObjectiveSlope) {
  StandardLp lp = ProductionPlan();
  std::vector<Fixing> fixes = {{"make(p)", 8.0, ""}};
  StandardLp fixed = FixVariables(lp, fixes);
  LpSolution base = kSimplex.Solve(fixed);
  ASSERT_EQ(base.status, LpStatus::kOptimal);
  const double pi = DualOf(fixed, base, "fix_y(make(p))");
  const double delta = 1e-4;
  fixes[0].value += delta;
  LpSolution bumped = kSimplex.Solve(FixVariables(lp, fixes));
  ASSERT_EQ(bumped.status, LpStatus::kOptimal);
  EXPECT_NEAR((bumped.objective - base.objective) / delta, pi, 1e-3);
}

TEST(LpTest, RowDualsMatchFiniteDifferences) {
  StandardLp lp = ProductionPlan();
  LpSolution base = kSimplex.Solve(lp);
  ASSERT_EQ(base.status, LpStatus::kOptimal);
  const double delta = 1e-4;
  for (int i = 0; i < lp.num_rows(); ++i) {
    StandardLp bumped = lp;
    bumped.SetRhs(i, lp.row(i).rhs + delta);
    LpSolution s = kSimplex.Solve(bumped);
    ASSERT_EQ(s.status, LpStatus::kOptimal);
    EXPECT_NEAR((s.objective - base.objective) / delta, base.duals[i], 1e-3)
        << lp.row(i).label;
  }
  // Hand solution: p = 10, q = 15, objective -105.
  EXPECT_NEAR(base.objective, -105.0, 1e-9);
  EXPECT_NEAR(base.primal[0], 10.0, 1e-9);
  EXPECT_NEAR(base.primal[1], 15.0, 1e-9);
}

TEST(LpTest, RandomInstancesSatisfyOptimalityConditions) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    StandardLp lp = RandomFeasibleLp(rng, 12 + trial % 9, 8 + trial % 7);
    LpSolution s = kSimplex.Solve(lp);
    if (s.status == LpStatus::kUnbounded) continue;
    ASSERT_EQ(s.status, LpStatus::kOptimal) << trial;
    OptimalityResiduals r = CheckOptimality(lp, s);
    EXPECT_LE(r.primal_infeasibility, 1e-7) << trial;
    EXPECT_LE(r.dual_infeasibility, 1e-7) << trial;
    EXPECT_LE(r.complementarity, 1e-7) << trial;
    EXPECT_LE(r.duality_gap, 1e-7) << trial;
    LpSolution ip = kInterior.Solve(lp);
    ASSERT_EQ(ip.status, LpStatus::kOptimal) << trial;
    EXPECT_NEAR(ip.objective, s.objective,
                1e-6 * std::max(1.0, std::abs(s.objective)))
        << trial;
  }
}

TEST(LpTest, RepeatedSolvesAreBitIdentical) {
  std::mt19937 rng(11);
  StandardLp lp = RandomFeasibleLp(rng, 30, 20);
  LpSolution a = kSimplex.Solve(lp);
  LpSolution b = kSimplex.Solve(lp);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.basis, b.basis);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.primal, b.primal);
}

TEST(LpTest, TimeLimitIsHonoured) {
  std::mt19937 rng(3);
  StandardLp lp = RandomFeasibleLp(rng, 200, 150);
  LpOptions options;
  options.time_limit_seconds = 0.0;
  EXPECT_EQ(kSimplex.Solve(lp, options).status, LpStatus::kTimeLimit);
}

TEST(LpTest, TextExportKeepsLabels) {
  StandardLp lp = ProductionPlan();
  std::ostringstream out;
  WriteLpFormat(lp, out);
  const std::string text = out.str();
  EXPECT_NE(text.find(" machine(a): 1 make(p) + 2 make(q) <= 40\n"),
            std::string::npos);
  EXPECT_NE(text.find(" demand(q): 1 make(q) >= 5\n"), std::string::npos);
  EXPECT_NE(text.find("Minimize\n obj: -3 make(p) - 5 make(q)\n"),
            std::string::npos);
  EXPECT_NE(text.find("End\n"), std::string::npos);
}

}  // namespace
}  // namespace capex
