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

#include "capex/lp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "capex/common.h"

namespace capex {

int StandardLp::AddVariable(std::string label, double lower, double upper,
                            double cost) {
  if (std::isnan(lower) || std::isnan(upper) || std::isnan(cost) ||
      lower > upper) {
    throw Error(ErrorCode::kInvalidValue, "bad bounds or cost for " + label);
  }
  const int index = num_variables();
  if (!var_index_.emplace(label, index).second) {
    throw Error(ErrorCode::kDuplicateLabel, "variable " + label);
  }
  var_labels_.push_back(std::move(label));
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return index;
}

int StandardLp::AddRow(std::string label, std::vector<Term> terms,
                       RowSense sense, double rhs) {
  if (!std::isfinite(rhs)) {
    throw Error(ErrorCode::kInvalidValue, "non-finite rhs for row " + label);
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  for (size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].var < 0 || terms[k].var >= num_variables()) {
      throw Error(ErrorCode::kInvalidArgument, "row " + label +
                                                   " references a missing "
                                                   "variable");
    }
    if (!std::isfinite(terms[k].coef)) {
      throw Error(ErrorCode::kInvalidValue, "non-finite coefficient in " +
                                                label);
    }
    if (k > 0 && terms[k].var == terms[k - 1].var) {
      throw Error(ErrorCode::kDuplicateLabel,
                  "row " + label + " repeats variable " +
                      var_labels_[terms[k].var]);
    }
  }
  std::erase_if(terms, [](const Term& t) { return t.coef == 0.0; });
  const int index = num_rows();
  if (!row_index_.emplace(label, index).second) {
    throw Error(ErrorCode::kDuplicateLabel, "row " + label);
  }
  rows_.push_back(Row{std::move(label), std::move(terms), sense, rhs});
  return index;
}

void StandardLp::SetCost(int var, double cost) { cost_.at(var) = cost; }

void StandardLp::SetBounds(int var, double lower, double upper) {
  if (lower > upper) {
    throw Error(ErrorCode::kInvalidValue, "lower > upper for " +
                                              var_labels_.at(var));
  }
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

void StandardLp::SetRhs(int row, double rhs) { rows_.at(row).rhs = rhs; }

size_t StandardLp::num_nonzeros() const {
  size_t total = 0;
  for (const Row& r : rows_) total += r.terms.size();
  return total;
}

std::optional<int> StandardLp::FindVariable(std::string_view label) const {
  auto it = var_index_.find(std::string(label));
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> StandardLp::FindRow(std::string_view label) const {
  auto it = row_index_.find(std::string(label));
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

int StandardLp::VariableIndex(std::string_view label) const {
  auto found = FindVariable(label);
  if (!found) {
    throw Error(ErrorCode::kUnknownLabel, "variable " + std::string(label));
  }
  return *found;
}

int StandardLp::RowIndex(std::string_view label) const {
  auto found = FindRow(label);
  if (!found) throw Error(ErrorCode::kUnknownLabel, "row " + std::string(label));
  return *found;
}

std::string_view LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration_limit";
    case LpStatus::kTimeLimit: return "time_limit";
    case LpStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

StandardLp FixVariables(const StandardLp& lp, std::span<const Fixing> fixings) {
  StandardLp fixed = lp;
  for (const Fixing& f : fixings) {
    const int var = lp.VariableIndex(f.var_label);
    std::string label =
        f.row_label.empty() ? "fix_y(" + f.var_label + ")" : f.row_label;
    if (fixed.FindRow(label)) {
      throw Error(ErrorCode::kDuplicateLabel, "variable fixed twice: " +
                                                  f.var_label);
    }
    fixed.AddRow(std::move(label), {{var, 1.0}}, RowSense::kEqual, f.value);
  }
  return fixed;
}

double DualOf(const StandardLp& lp, const LpSolution& solution,
              std::string_view row_label) {
  if (solution.status != LpStatus::kOptimal) {
    throw Error(ErrorCode::kNotOptimal, "dual requested from a " +
                                            std::string(LpStatusName(
                                                solution.status)) +
                                            " solution");
  }
  return solution.duals.at(lp.RowIndex(row_label));
}

double PrimalOf(const StandardLp& lp, const LpSolution& solution,
                std::string_view var_label) {
  if (solution.status != LpStatus::kOptimal) {
    throw Error(ErrorCode::kNotOptimal, "primal requested from a non-optimal "
                                        "solution");
  }
  return solution.primal.at(lp.VariableIndex(var_label));
}

double RowActivity(const StandardLp& lp, int row,
                   std::span<const double> primal) {
  double activity = 0.0;
  for (const Term& t : lp.row(row).terms) activity += t.coef * primal[t.var];
  return activity;
}

OptimalityResiduals CheckOptimality(const StandardLp& lp,
                                    const LpSolution& solution) {
  OptimalityResiduals res;
  const int n = lp.num_variables();
  const auto& x = solution.primal;
  const auto& y = solution.duals;
  std::vector<double> d(n);
  for (int j = 0; j < n; ++j) d[j] = lp.cost(j);
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  for (int j = 0; j < n; ++j) {
    primal_obj += lp.cost(j) * x[j];
    res.primal_infeasibility =
        std::max({res.primal_infeasibility, lp.lower(j) - x[j],
                  x[j] - lp.upper(j)});
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    const Row& row = lp.row(i);
    const double act = RowActivity(lp, i, x);
    const double slack = row.rhs - act;
    double viol = 0.0;
    double dual_viol = 0.0;
    switch (row.sense) {
      case RowSense::kLessEqual:
        viol = -slack;
        dual_viol = std::max(0.0, y[i]);
        break;
      case RowSense::kGreaterEqual:
        viol = slack;
        dual_viol = std::max(0.0, -y[i]);
        break;
      case RowSense::kEqual:
        viol = std::abs(slack);
        break;
    }
    res.primal_infeasibility = std::max(res.primal_infeasibility, viol);
    res.dual_infeasibility = std::max(res.dual_infeasibility, dual_viol);
    if (row.sense != RowSense::kEqual) {
      res.complementarity =
          std::max(res.complementarity, std::abs(y[i] * slack));
    }
    dual_obj += y[i] * row.rhs;
    for (const Term& t : row.terms) d[t.var] -= y[i] * t.coef;
  }
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower(j);
    const double hi = lp.upper(j);
    if (d[j] > 0.0) {
      if (std::isfinite(lo)) {
        res.complementarity = std::max(res.complementarity, d[j] * (x[j] - lo));
        dual_obj += d[j] * lo;
      } else {
        res.dual_infeasibility = std::max(res.dual_infeasibility, d[j]);
        dual_obj += d[j] * x[j];
      }
    } else if (d[j] < 0.0) {
      if (std::isfinite(hi)) {
        res.complementarity =
            std::max(res.complementarity, -d[j] * (hi - x[j]));
        dual_obj += d[j] * hi;
      } else {
        res.dual_infeasibility = std::max(res.dual_infeasibility, -d[j]);
        dual_obj += d[j] * x[j];
      }
    }
  }
  res.duality_gap =
      std::abs(primal_obj - dual_obj) / std::max(1.0, std::abs(primal_obj));
  return res;
}

namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteTerm(std::ostream& out, double coef, const std::string& name,
               bool first) {
  if (coef < 0) {
    out << (first ? "-" : " - ") << Num(-coef) << " " << name;
  } else {
    out << (first ? "" : " + ") << Num(coef) << " " << name;
  }
}

}  // namespace

void WriteLpFormat(const StandardLp& lp, std::ostream& out) {
  out << "Minimize\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (lp.cost(j) == 0.0) continue;
    if (first) out << " ";
    WriteTerm(out, lp.cost(j), lp.variable_label(j), first);
    first = false;
  }
  if (first) out << " 0 " << (lp.num_variables() ? lp.variable_label(0) : "");
  out << "\nSubject To\n";
  for (const Row& row : lp.rows()) {
    out << " " << row.label << ":";
    bool head = true;
    for (const Term& t : row.terms) {
      if (head) out << " ";
      WriteTerm(out, t.coef, lp.variable_label(t.var), head);
      head = false;
    }
    if (head) out << " 0 " << (lp.num_variables() ? lp.variable_label(0) : "");
    switch (row.sense) {
      case RowSense::kLessEqual: out << " <= "; break;
      case RowSense::kEqual: out << " = "; break;
      case RowSense::kGreaterEqual: out << " >= "; break;
    }
    out << Num(row.rhs) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double lo = lp.lower(j);
    const double hi = lp.upper(j);
    const std::string& name = lp.variable_label(j);
    if (lo == hi) {
      out << " " << name << " = " << Num(lo) << "\n";
    } else if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out << " " << name << " free\n";
    } else {
      out << " " << (std::isfinite(lo) ? Num(lo) : "-inf") << " <= " << name
          << " <= " << (std::isfinite(hi) ? Num(hi) : "+inf") << "\n";
    }
  }
  out << "End\n";
}

}  // namespace capex
