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

#include "capex/benders.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "capex/common.h"

namespace capex {
namespace {

using Clock = std::chrono::steady_clock;

double Millis(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since)
      .count();
}

bool IsOperational(const std::string& label) {
  static const char* kPrefixes[] = {"gen(", "chg(", "dis(", "soc(",
                                    "trn(", "exp(", "nse(", "crt("};
  for (const char* p : kPrefixes) {
    if (label.rfind(p, 0) == 0) return true;
  }
  return false;
}

int HourOf(const std::string& label) {
  const size_t comma = label.rfind(',');
  return std::stoi(label.substr(comma + 1, label.size() - comma - 2));
}

struct LoopSpec {
  Mode mode = Mode::kTemporal;
  int stage = 1;
  double tolerance = 1e-3;
  int prune_every = 0;
  UpperOptions upper;
  std::vector<double> start;  // empty: all zeros
};

class Loop {
 public:
  Loop(const ValidatedSystem& sys, const BendersConfig& config,
       std::vector<IterationRecord>& trace)
      : sys_(sys), config_(config), trace_(trace) {}

  StageResult Run(const LoopSpec& spec);

 private:
  void RecordIncumbent(const ComplicatingLayout& layout,
                       const std::vector<StandardLp>& subs,
                       const std::vector<LpSolution>& sols,
                       const ComplicatingVector& x, StageResult& out) const;

  const ValidatedSystem& sys_;
  const BendersConfig& config_;
  std::vector<IterationRecord>& trace_;
  SimplexSolver simplex_;
  InteriorPointSolver interior_;
};

void Loop::RecordIncumbent(const ComplicatingLayout& layout,
                           const std::vector<StandardLp>& subs,
                           const std::vector<LpSolution>& sols,
                           const ComplicatingVector& x,
                           StageResult& out) const {
  out.emissions.clear();
  out.dispatch.clear();
  for (int b = 0; b < layout.num_blocks(); ++b) {
    const StandardLp& lp = subs[b];
    const LpSolution& sol = sols[b];
    const int q = layout.emission_entry(b);
    if (q >= 0) {
      const int row = lp.RowIndex(EmissionRowLabel(layout, b));
      out.emissions.push_back({layout.block_name(b),
                               RowActivity(lp, row, sol.primal) + x.values[q],
                               x.values[q]});
    }
    for (int j = 0; j < lp.num_variables(); ++j) {
      if (sol.primal[j] != 0.0 && IsOperational(lp.variable_label(j))) {
        out.dispatch.push_back(
            {layout.block_name(b), lp.variable_label(j), sol.primal[j]});
      }
    }
  }
}

StageResult Loop::Run(const LoopSpec& spec) {
  LayoutPtr layout = ComplicatingLayout::Create(sys_, spec.mode);
  SubproblemFactory factory(sys_, layout);
  const int blocks = layout->num_blocks();
  std::vector<std::string> names;
  for (int b = 0; b < blocks; ++b) names.push_back(layout->block_name(b));

  StageResult out;
  out.mode = spec.mode;
  out.capacity_bounds = spec.upper.capacity_bounds;
  ComplicatingVector x = ComplicatingVector::Zero(layout);
  if (!spec.start.empty()) x.values = spec.start;
  out.incumbent = x;
  double lb = -kInf;
  double ub = kInf;
  std::vector<Cut> pool;

  for (int k = 0; k < config_.max_iterations; ++k) {
    const auto iter_start = Clock::now();
    std::vector<StandardLp> subs;
    subs.reserve(blocks);
    for (int b = 0; b < blocks; ++b) subs.push_back(factory.Build(b, x));
    BatchResult batch = SolveBatch(subs, simplex_, config_.executor);
    RequireOptimal(batch, names);
    double candidate = x.InvestmentCost();
    for (const LpSolution& s : batch.solutions) candidate += s.objective;
    for (int b = 0; b < blocks; ++b) {
      Cut cut = MakeCut(*layout, b, k, subs[b], batch.solutions[b], x);
      out.generated.push_back(cut);
      pool.push_back(std::move(cut));
    }
    if (candidate < ub) {
      ub = candidate;
      out.incumbent = x;
      RecordIncumbent(*layout, subs, batch.solutions, x, out);
    }

    const StandardLp upper = BuildUpperProblem(sys_, *layout, pool, spec.upper);
    const LpSolution usol = simplex_.Solve(upper);
    if (usol.status != LpStatus::kOptimal) {
      throw Error(spec.stage == 2 && usol.status == LpStatus::kInfeasible
                      ? ErrorCode::kStage2Infeasible
                      : ErrorCode::kSolverFailure,
                  "upper problem ended " +
                      std::string(LpStatusName(usol.status)));
    }
    lb = std::max(lb, usol.objective);
    out.final_iterate = ExtractIterate(layout, upper, usol);
    out.final_theta.assign(blocks, 0.0);
    for (int b = 0; b < blocks; ++b) {
      out.final_theta[b] =
          usol.primal[upper.VariableIndex(ThetaLabel(*layout, b))];
    }
    const double gap = RelativeGap(lb, ub);

    int pruned = 0;
    if (spec.prune_every > 0 && (k + 1) % spec.prune_every == 0) {
      std::vector<int> drop = NonBindingCuts(pool, out.final_iterate.values,
                                             out.final_theta,
                                             config_.slack_threshold);
      for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
        pool.erase(pool.begin() + *it);
      }
      pruned = static_cast<int>(drop.size());
    }

    IterationRecord rec;
    rec.stage = spec.stage;
    rec.k = k;
    rec.lb = lb;
    rec.ub = ub;
    rec.gap = gap;
    rec.cuts_added = blocks;
    rec.cuts_pruned = pruned;
    rec.pool_size = static_cast<int>(pool.size());
    out.iterations = k + 1;
    out.lb = lb;
    out.ub = ub;
    out.gap = gap;

    if (gap <= spec.tolerance) {
      out.converged = true;
    } else if (k + 1 < config_.max_iterations) {
      const bool level_set = config_.regularize && std::isfinite(ub) &&
                             !(lb == 0.0 && pool.empty());
      if (level_set) {
        const StandardLp reg =
            BuildRegularizationProblem(upper, lb, ub, config_.alpha);
        const LpSolution rsol = interior_.Solve(reg);
        if (rsol.status != LpStatus::kOptimal) {
          throw Error(ErrorCode::kLevelSetInfeasible,
                      "level-set problem ended " +
                          std::string(LpStatusName(rsol.status)) +
                          " at iteration " + std::to_string(k));
        }
        x = ExtractIterate(layout, reg, rsol);
      } else {
        x = out.final_iterate;
      }
    }
    rec.wall_ms = Millis(iter_start);
    trace_.push_back(rec);
    if (config_.verbose) {
      std::fprintf(stderr,
                   "[%s stage %d] k=%d lb=%.6g ub=%.6g gap=%.3e pool=%d "
                   "%.0fms\n",
                   std::string(ModeName(spec.mode)).c_str(), spec.stage, k, lb,
                   ub, gap, rec.pool_size, rec.wall_ms);
    }
    if (out.converged) break;
  }
  out.pool = std::move(pool);
  return out;
}

void FillFromStage(const StageResult& stage, SolveReport& report) {
  report.converged = stage.converged;
  report.objective = stage.ub;
  report.lower_bound = stage.lb;
  report.gap = stage.gap;
  report.emissions = stage.emissions;
  report.dispatch = stage.dispatch;
  const ComplicatingLayout& layout = *stage.incumbent.layout;
  for (int i = 0; i < layout.size(); ++i) {
    const LayoutEntry& e = layout.entry(i);
    report.complicating[e.label] = stage.incumbent.values[i];
    if (e.kind == EntryKind::kCapacity) {
      report.capacities[e.label] = stage.incumbent.values[i];
      report.final_capacities[e.label] = stage.final_iterate.values[i];
    }
  }
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kMonolithic: return "monolithic";
    case Algorithm::kTemporal: return "temporal";
    case Algorithm::kSectoral: return "sectoral";
    case Algorithm::kSpatial: return "spatial";
    case Algorithm::kTwoStageSectoral: return "two-stage-sectoral";
    case Algorithm::kTwoStageSpatial: return "two-stage-spatial";
  }
  return "unknown";
}

const std::vector<Algorithm>& AllAlgorithms() {
  static const std::vector<Algorithm> all = {
      Algorithm::kMonolithic,       Algorithm::kTemporal,
      Algorithm::kSectoral,         Algorithm::kSpatial,
      Algorithm::kTwoStageSectoral, Algorithm::kTwoStageSpatial};
  return all;
}

std::optional<Algorithm> ParseAlgorithm(std::string_view name) {
  for (Algorithm a : AllAlgorithms()) {
    if (AlgorithmName(a) == name) return a;
  }
  return std::nullopt;
}

BendersConfig DefaultConfig(Algorithm algorithm) {
  BendersConfig config;
  if (algorithm == Algorithm::kSpatial ||
      algorithm == Algorithm::kTwoStageSpatial) {
    config.prune_every = 10;
  }
  return config;
}

double RelativeGap(double lb, double ub) {
  if (!std::isfinite(ub) || !std::isfinite(lb)) return kInf;
  const double denom = lb > 0.0 ? lb : std::max(std::abs(lb), 1.0);
  return (ub - lb) / denom;
}

std::vector<int> NonBindingCuts(const std::vector<Cut>& pool,
                                const std::vector<double>& x,
                                const std::vector<double>& theta,
                                double threshold) {
  std::vector<int> out;
  for (size_t i = 0; i < pool.size(); ++i) {
    const double slack = theta.at(pool[i].block) - pool[i].Evaluate(x);
    if (slack > threshold) out.push_back(static_cast<int>(i));
  }
  return out;
}

SolveReport SolveMonolithic(const ValidatedSystem& sys) {
  const auto start = Clock::now();
  const StandardLp lp = BuildMonolithic(sys);
  const LpSolution sol = SimplexSolver().Solve(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw Error(ErrorCode::kSolverFailure,
                "monolithic model ended " +
                    std::string(LpStatusName(sol.status)));
  }
  SolveReport report;
  report.algorithm = Algorithm::kMonolithic;
  report.converged = true;
  report.objective = sol.objective;
  report.lower_bound = sol.objective;
  report.iterations = 1;
  for (int j = 0; j < lp.num_variables(); ++j) {
    const std::string& label = lp.variable_label(j);
    if (label.rfind("cap(", 0) == 0) {
      report.capacities[label] = sol.primal[j];
      report.final_capacities[label] = sol.primal[j];
      report.complicating[label] = sol.primal[j];
    } else if (label.rfind("lvl(", 0) == 0 || label.rfind("dlvl(", 0) == 0) {
      report.complicating[label] = sol.primal[j];
    } else if (sol.primal[j] != 0.0 && IsOperational(label)) {
      report.dispatch.push_back(
          {sys.subperiod(sys.subperiod_of_hour(HourOf(label))), label,
           sol.primal[j]});
    }
  }
  if (auto row = lp.FindRow("emis")) {
    report.emissions.push_back({"all", RowActivity(lp, *row, sol.primal),
                                sys.spec().emission_cap});
  }
  report.seconds = Millis(start) / 1000.0;
  report.trace.push_back(
      {1, 0, sol.objective, sol.objective, 0.0, 0, 0, 0, report.seconds * 1e3});
  return report;
}

SolveReport RunBenders(const ValidatedSystem& sys, Mode mode,
                       const BendersConfig& config) {
  const auto start = Clock::now();
  SolveReport report;
  report.algorithm = mode == Mode::kTemporal   ? Algorithm::kTemporal
                     : mode == Mode::kSectoral ? Algorithm::kSectoral
                                               : Algorithm::kSpatial;
  Loop loop(sys, config, report.trace);
  LoopSpec spec;
  spec.mode = mode;
  spec.tolerance = config.tolerance;
  spec.prune_every = config.prune_every;
  spec.upper.theta_floor = config.theta_floor;
  report.stages.push_back(loop.Run(spec));
  FillFromStage(report.stages.back(), report);
  report.iterations = report.stages.back().iterations;
  report.seconds = Millis(start) / 1000.0;
  return report;
}

SolveReport RunTwoStage(const ValidatedSystem& sys, Mode budget_mode,
                        const BendersConfig& config) {
  if (budget_mode == Mode::kTemporal) {
    throw Error(ErrorCode::kInvalidArgument,
                "two-stage runs need a budget-based first stage");
  }
  const auto start = Clock::now();
  SolveReport report;
  report.algorithm = budget_mode == Mode::kSectoral
                         ? Algorithm::kTwoStageSectoral
                         : Algorithm::kTwoStageSpatial;
  Loop loop(sys, config, report.trace);
  LoopSpec first;
  first.mode = budget_mode;
  first.stage = 1;
  first.tolerance = config.tolerance;
  first.prune_every = config.prune_every;
  first.upper.theta_floor = config.theta_floor;
  StageResult s1 = loop.Run(first);

  const ComplicatingVector& y1 = s1.final_iterate;
  std::vector<Cut> kept;
  {
    std::vector<int> drop = NonBindingCuts(s1.pool, y1.values, s1.final_theta,
                                           config.slack_threshold);
    size_t next = 0;
    for (size_t i = 0; i < s1.pool.size(); ++i) {
      if (next < drop.size() && drop[next] == static_cast<int>(i)) {
        ++next;
        continue;
      }
      kept.push_back(s1.pool[i]);
    }
  }

  LayoutPtr temporal = ComplicatingLayout::Create(sys, Mode::kTemporal);
  LoopSpec second;
  second.mode = Mode::kTemporal;
  second.stage = 2;
  second.tolerance = config.stage2_tolerance;
  second.upper.theta_floor = config.theta_floor;
  second.upper.stage1_layout = y1.layout;
  second.upper.stage1_cuts = std::move(kept);
  second.start.assign(temporal->size(), 0.0);
  for (int i = 0; i < temporal->size(); ++i) {
    const LayoutEntry& e = temporal->entry(i);
    if (e.kind == EntryKind::kEmissionBudget) continue;
    const double v = y1.Get(e.label);
    if (e.kind != EntryKind::kCapacity) {
      second.start[i] = v;
      continue;
    }
    bool storage = false;
    for (const TechnologySpec& t : sys.spec().technologies) {
      if (labels::Cap(t.id) == e.label) storage = t.kind == TechKind::kStorage;
    }
    double lo = e.lower;
    double hi = e.upper;
    if (!(storage && v <= 1e-9)) {
      lo = std::max(e.lower, v);
      hi = std::min(e.upper, (1.0 + config.stage2_margin) * v);
      if (hi < lo) hi = lo;
    }
    second.upper.capacity_bounds[e.label] = {lo, hi};
    second.start[i] = std::clamp(v, lo, hi);
  }
  if (temporal->has_emission_budgets()) {
    const ComplicatingLayout& inner = *y1.layout;
    for (int b = 0; b < temporal->num_blocks(); ++b) {
      double q = 0.0;
      for (int d = 0; d < inner.num_blocks(); ++d) {
        if (inner.block(d).w == temporal->block(b).w) {
          q += y1.values[inner.emission_entry(d)];
        }
      }
      second.start[temporal->emission_entry(b)] = q;
    }
  }
  StageResult s2 = loop.Run(second);
  report.stages.push_back(std::move(s1));
  report.stages.push_back(std::move(s2));
  FillFromStage(report.stages.back(), report);
  report.iterations =
      report.stages[0].iterations + report.stages[1].iterations;
  report.seconds = Millis(start) / 1000.0;
  return report;
}

SolveReport Solve(const ValidatedSystem& sys, Algorithm algorithm,
                  const BendersConfig& config) {
  switch (algorithm) {
    case Algorithm::kMonolithic: return SolveMonolithic(sys);
    case Algorithm::kTemporal: return RunBenders(sys, Mode::kTemporal, config);
    case Algorithm::kSectoral: return RunBenders(sys, Mode::kSectoral, config);
    case Algorithm::kSpatial: return RunBenders(sys, Mode::kSpatial, config);
    case Algorithm::kTwoStageSectoral:
      return RunTwoStage(sys, Mode::kSectoral, config);
    case Algorithm::kTwoStageSpatial:
      return RunTwoStage(sys, Mode::kSpatial, config);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm");
}

}  // namespace capex
