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

// Labelled linear programs in a small standard form, plus the solver
// interface shared by the simplex and interior-point backends.

#ifndef CAPEX_LP_H_
#define CAPEX_LP_H_

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace capex {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

struct Term {
  int var;
  double coef;
};

struct Row {
  std::string label;
  std::vector<Term> terms;  // sorted by var, no duplicates
  RowSense sense;
  double rhs;
};

// min c'x  s.t.  rows, lower <= x <= upper.
class StandardLp {
 public:
  int AddVariable(std::string label, double lower, double upper,
                  double cost = 0.0);
  // Terms may arrive in any order; duplicate variables are rejected.
  int AddRow(std::string label, std::vector<Term> terms, RowSense sense,
             double rhs);

  void SetCost(int var, double cost);
  void SetBounds(int var, double lower, double upper);
  void SetRhs(int row, double rhs);

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  size_t num_nonzeros() const;

  const std::string& variable_label(int var) const { return var_labels_[var]; }
  double cost(int var) const { return cost_[var]; }
  double lower(int var) const { return lower_[var]; }
  double upper(int var) const { return upper_[var]; }
  const Row& row(int index) const { return rows_[index]; }
  const std::vector<Row>& rows() const { return rows_; }

  std::optional<int> FindVariable(std::string_view label) const;
  std::optional<int> FindRow(std::string_view label) const;
  // Throw kUnknownLabel.
  int VariableIndex(std::string_view label) const;
  int RowIndex(std::string_view label) const;

 private:
  std::vector<std::string> var_labels_;
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kTimeLimit,
  kNumericalFailure,
};

std::string_view LpStatusName(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> primal;
  // Sensitivity of the objective to each row's right-hand side.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  // Basic variables at termination; index >= num_variables denotes the
  // logical of row (index - num_variables). Empty for interior-point runs.
  std::vector<int> basis;
  int iterations = 0;
  double seconds = 0.0;
};

struct LpOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  int max_iterations = 0;  // 0 picks a size-dependent default
  double time_limit_seconds = kInf;
};

class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual std::string_view name() const = 0;
  virtual LpSolution Solve(const StandardLp& lp,
                           const LpOptions& options = {}) const = 0;
};

// Bounded primal revised simplex with LU factorization and eta updates.
class SimplexSolver : public LpSolver {
 public:
  std::string_view name() const override { return "simplex"; }
  LpSolution Solve(const StandardLp& lp,
                   const LpOptions& options = {}) const override;
};

// Mehrotra predictor-corrector on the regularized augmented system. Returns
// points near the analytic centre of the optimal face.
class InteriorPointSolver : public LpSolver {
 public:
  std::string_view name() const override { return "interior-point"; }
  LpSolution Solve(const StandardLp& lp,
                   const LpOptions& options = {}) const override;
};

struct Fixing {
  std::string var_label;
  double value;
  std::string row_label;  // empty means "fix_y(<var_label>)"
};

// Returns a copy of `lp` with one equality row per fixing.
StandardLp FixVariables(const StandardLp& lp, std::span<const Fixing> fixings);

double DualOf(const StandardLp& lp, const LpSolution& solution,
              std::string_view row_label);
double PrimalOf(const StandardLp& lp, const LpSolution& solution,
                std::string_view var_label);

struct OptimalityResiduals {
  double primal_infeasibility = 0.0;  // rows and bounds
  double dual_infeasibility = 0.0;    // reduced-cost sign violations
  double complementarity = 0.0;       // |d_j| * distance to the active bound
  double duality_gap = 0.0;           // relative |primal - dual| objective
};

OptimalityResiduals CheckOptimality(const StandardLp& lp,
                                    const LpSolution& solution);

double RowActivity(const StandardLp& lp, int row,
                   std::span<const double> primal);

// CPLEX-style text: one constraint per line, labels kept verbatim.
void WriteLpFormat(const StandardLp& lp, std::ostream& out);

}  // namespace capex

#endif  // CAPEX_LP_H_
