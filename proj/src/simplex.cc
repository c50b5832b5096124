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

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "capex/lp.h"

namespace capex {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Clock = std::chrono::steady_clock;

enum class State : unsigned char { kBasic, kLower, kUpper, kFree };

constexpr int kRefactorEvery = 64;
constexpr int kDegenerateLimit = 40;
constexpr double kPivotTolerance = 1e-9;

double PowerOfTwoScale(double magnitude) {
  if (magnitude <= 0.0) return 1.0;
  return std::exp2(-std::round(std::log2(magnitude)));
}

class Simplex {
 public:
  Simplex(const StandardLp& lp, const LpOptions& options);
  LpSolution Run();

 private:
  struct Eta {
    int pivot_row;
    double pivot;
    std::vector<std::pair<int, double>> entries;  // off-pivot alphas
  };

  void Column(int j, std::vector<double>& out) const;
  double DotColumn(const Eigen::VectorXd& y, int j) const;
  bool Refactor();
  void ResetToSlackBasis();
  void ComputeBasics();
  Eigen::VectorXd Ftran(Eigen::VectorXd v) const;
  Eigen::VectorXd Btran(Eigen::VectorXd v) const;
  double Tol(double bound) const {
    return ptol_ * std::max(1.0, std::abs(bound));
  }
  bool BelowLower(int v) const { return x_[v] < lo_[v] - Tol(lo_[v]); }
  bool AboveUpper(int v) const { return x_[v] > hi_[v] + Tol(hi_[v]); }
  LpSolution Finish(LpStatus status);

  const StandardLp& lp_;
  LpOptions options_;
  int m_ = 0;
  int n_ = 0;
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> row_scale_;
  std::vector<double> cost_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<double> x_;
  std::vector<State> state_;
  std::vector<int> basis_;
  std::vector<int> pos_;
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  double ptol_;
  double dtol_;
  int iterations_ = 0;
  int resets_ = 0;
  Clock::time_point start_;
};

Simplex::Simplex(const StandardLp& lp, const LpOptions& options)
    : lp_(lp), options_(options) {
  m_ = lp.num_rows();
  n_ = lp.num_variables();
  const int total = n_ + m_;
  row_scale_.assign(m_, 1.0);
  for (int i = 0; i < m_; ++i) {
    double big = 0.0;
    for (const Term& t : lp.row(i).terms) big = std::max(big, std::abs(t.coef));
    row_scale_[i] = PowerOfTwoScale(big);
  }
  std::vector<int> count(n_ + 1, 0);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : lp.row(i).terms) ++count[t.var + 1];
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
  col_row_.resize(col_start_[n_]);
  col_val_.resize(col_start_[n_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : lp.row(i).terms) {
      col_row_[fill[t.var]] = i;
      col_val_[fill[t.var]++] = t.coef * row_scale_[i];
    }
  }
  cost_.assign(total, 0.0);
  lo_.assign(total, 0.0);
  hi_.assign(total, 0.0);
  double cmax = 1.0;
  for (int j = 0; j < n_; ++j) {
    cost_[j] = lp.cost(j);
    lo_[j] = lp.lower(j);
    hi_[j] = lp.upper(j);
    cmax = std::max(cmax, std::abs(cost_[j]));
  }
  for (int i = 0; i < m_; ++i) {
    const Row& row = lp.row(i);
    const double b = row.rhs * row_scale_[i];
    lo_[n_ + i] = row.sense == RowSense::kLessEqual ? -kInf : b;
    hi_[n_ + i] = row.sense == RowSense::kGreaterEqual ? kInf : b;
  }
  ptol_ = options.primal_tolerance;
  dtol_ = options.dual_tolerance * cmax;
  if (options_.max_iterations <= 0) {
    options_.max_iterations = std::max(20000, 20 * (m_ + n_));
  }
  x_.assign(total, 0.0);
  state_.assign(total, State::kFree);
  pos_.assign(total, -1);
  basis_.assign(m_, 0);
}

void Simplex::Column(int j, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (j < n_) {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      out[col_row_[k]] = col_val_[k];
    }
  } else {
    out[j - n_] = -1.0;
  }
}

double Simplex::DotColumn(const Eigen::VectorXd& y, int j) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
    s += y[col_row_[k]] * col_val_[k];
  }
  return s;
}

void Simplex::ResetToSlackBasis() {
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j]) && std::isfinite(hi_[j])) {
      const bool upper = std::abs(x_[j] - hi_[j]) < std::abs(x_[j] - lo_[j]);
      state_[j] = upper ? State::kUpper : State::kLower;
      x_[j] = upper ? hi_[j] : lo_[j];
    } else if (std::isfinite(lo_[j])) {
      state_[j] = State::kLower;
      x_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
      state_[j] = State::kUpper;
      x_[j] = hi_[j];
    } else {
      state_[j] = State::kFree;
      x_[j] = 0.0;
    }
    pos_[j] = -1;
  }
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    pos_[n_ + i] = i;
    state_[n_ + i] = State::kBasic;
  }
}

bool Simplex::Refactor() {
  etas_.clear();
  if (m_ == 0) return true;
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < m_; ++i) {
    const int j = basis_[i];
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        triplets.emplace_back(col_row_[k], i, col_val_[k]);
      }
    } else {
      triplets.emplace_back(j - n_, i, -1.0);
    }
  }
  SpMat b(m_, m_);
  b.setFromTriplets(triplets.begin(), triplets.end());
  b.makeCompressed();
  lu_.analyzePattern(b);
  lu_.factorize(b);
  return lu_.info() == Eigen::Success;
}

Eigen::VectorXd Simplex::Ftran(Eigen::VectorXd v) const {
  Eigen::VectorXd x = lu_.solve(v);
  for (const Eta& e : etas_) {
    const double t = x[e.pivot_row] / e.pivot;
    if (t != 0.0) {
      for (const auto& [i, a] : e.entries) x[i] -= a * t;
    }
    x[e.pivot_row] = t;
  }
  return x;
}

Eigen::VectorXd Simplex::Btran(Eigen::VectorXd v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->pivot_row];
    for (const auto& [i, a] : it->entries) s -= a * v[i];
    v[it->pivot_row] = s / it->pivot;
  }
  return lu_.transpose().solve(v);
}

void Simplex::ComputeBasics() {
  if (m_ == 0) return;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j) {
    if (state_[j] == State::kBasic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        rhs[col_row_[k]] -= col_val_[k] * x_[j];
      }
    } else {
      rhs[j - n_] += x_[j];
    }
  }
  Eigen::VectorXd xb = Ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
}

LpSolution Simplex::Run() {
  start_ = Clock::now();
  ResetToSlackBasis();
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j];
      state_[j] = State::kLower;
    } else if (std::isfinite(hi_[j])) {
      x_[j] = hi_[j];
      state_[j] = State::kUpper;
    }
  }
  if (!Refactor()) return Finish(LpStatus::kNumericalFailure);
  ComputeBasics();

  Eigen::VectorXd cb(m_);
  std::vector<double> column(m_);
  int degenerate = 0;
  bool bland = false;
  bool fresh = true;
  int verify_rounds = 0;

  while (true) {
    if (iterations_ >= options_.max_iterations) {
      return Finish(LpStatus::kIterationLimit);
    }
    if ((iterations_ & 63) == 0) {
      const double elapsed =
          std::chrono::duration<double>(Clock::now() - start_).count();
      if (elapsed > options_.time_limit_seconds) {
        return Finish(LpStatus::kTimeLimit);
      }
    }
    if (static_cast<int>(etas_.size()) >= kRefactorEvery) {
      if (!Refactor()) {
        if (++resets_ > 3) return Finish(LpStatus::kNumericalFailure);
        ResetToSlackBasis();
        Refactor();
      }
      ComputeBasics();
      fresh = true;
    }

    bool phase1 = false;
    for (int i = 0; i < m_; ++i) {
      const int v = basis_[i];
      if (BelowLower(v)) {
        cb[i] = -1.0;
        phase1 = true;
      } else if (AboveUpper(v)) {
        cb[i] = 1.0;
        phase1 = true;
      } else {
        cb[i] = 0.0;
      }
    }
    if (!phase1) {
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    }
    const Eigen::VectorXd y = m_ > 0 ? Btran(cb) : Eigen::VectorXd();
    const double dtol = phase1 ? options_.dual_tolerance : dtol_;

    int enter = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const State s = state_[j];
      if (s == State::kBasic || lo_[j] == hi_[j]) continue;
      const double cj = phase1 ? 0.0 : cost_[j];
      const double d = cj - DotColumn(y, j);
      int want = 0;
      if ((s == State::kLower || s == State::kFree) && d < -dtol) want = 1;
      if ((s == State::kUpper || s == State::kFree) && d > dtol) want = -1;
      if (want == 0) continue;
      if (bland) {
        enter = j;
        dir = want;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        enter = j;
        dir = want;
      }
    }

    if (enter < 0) {
      if (!fresh && verify_rounds < 3) {
        ++verify_rounds;
        if (!Refactor()) return Finish(LpStatus::kNumericalFailure);
        ComputeBasics();
        fresh = true;
        continue;
      }
      return Finish(phase1 ? LpStatus::kInfeasible : LpStatus::kOptimal);
    }

    Column(enter, column);
    Eigen::VectorXd alpha =
        Ftran(Eigen::Map<Eigen::VectorXd>(column.data(), m_));

    // Harris two-pass ratio test; in phase 1 infeasible basics may travel
    // until they reach the bound they violate.
    double relaxed = kInf;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) <= kPivotTolerance) continue;
      const int v = basis_[i];
      const double rate = -dir * a;
      double bound;
      if (rate < 0) {
        if (phase1 && BelowLower(v)) continue;
        bound = (phase1 && AboveUpper(v)) ? hi_[v] : lo_[v];
        if (!std::isfinite(bound)) continue;
        relaxed = std::min(relaxed, (x_[v] - bound + Tol(bound)) / -rate);
      } else {
        if (phase1 && AboveUpper(v)) continue;
        bound = (phase1 && BelowLower(v)) ? lo_[v] : hi_[v];
        if (!std::isfinite(bound)) continue;
        relaxed = std::min(relaxed, (bound + Tol(bound) - x_[v]) / rate);
      }
    }
    int leave_row = -1;
    double step = kInf;
    double leave_bound = 0.0;
    double leave_pivot = 0.0;
    if (std::isfinite(relaxed)) {
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[i];
        if (std::abs(a) <= kPivotTolerance) continue;
        const int v = basis_[i];
        const double rate = -dir * a;
        double bound;
        double ratio;
        if (rate < 0) {
          if (phase1 && BelowLower(v)) continue;
          bound = (phase1 && AboveUpper(v)) ? hi_[v] : lo_[v];
          if (!std::isfinite(bound)) continue;
          ratio = (x_[v] - bound) / -rate;
        } else {
          if (phase1 && AboveUpper(v)) continue;
          bound = (phase1 && BelowLower(v)) ? lo_[v] : hi_[v];
          if (!std::isfinite(bound)) continue;
          ratio = (bound - x_[v]) / rate;
        }
        if (ratio > relaxed) continue;
        const bool better =
            leave_row < 0 ||
            (bland ? v < basis_[leave_row]
                   : std::abs(a) > std::abs(leave_pivot));
        if (better) {
          leave_row = i;
          leave_pivot = a;
          leave_bound = bound;
          step = std::max(0.0, ratio);
        }
      }
    }
    const double range = hi_[enter] - lo_[enter];
    const bool flip = std::isfinite(range) && range <= step;
    if (leave_row < 0 && !flip) {
      if (phase1) return Finish(LpStatus::kNumericalFailure);
      return Finish(LpStatus::kUnbounded);
    }
    if (flip) step = range;

    const double theta = dir * step;
    for (int i = 0; i < m_; ++i) {
      if (alpha[i] != 0.0) x_[basis_[i]] -= alpha[i] * theta;
    }
    ++iterations_;
    fresh = false;
    if (step <= 1e-12) {
      if (++degenerate > kDegenerateLimit) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
    if (flip) {
      x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
      state_[enter] = dir > 0 ? State::kUpper : State::kLower;
      continue;
    }
    x_[enter] += theta;
    const int leave = basis_[leave_row];
    x_[leave] = leave_bound;
    state_[leave] = (leave_bound == lo_[leave]) ? State::kLower : State::kUpper;
    pos_[leave] = -1;
    basis_[leave_row] = enter;
    pos_[enter] = leave_row;
    state_[enter] = State::kBasic;

    Eta eta{leave_row, alpha[leave_row], {}};
    for (int i = 0; i < m_; ++i) {
      if (i != leave_row && std::abs(alpha[i]) > 1e-14) {
        eta.entries.emplace_back(i, alpha[i]);
      }
    }
    etas_.push_back(std::move(eta));
  }
}

LpSolution Simplex::Finish(LpStatus status) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations_;
  sol.primal.assign(x_.begin(), x_.begin() + n_);
  sol.duals.assign(m_, 0.0);
  sol.reduced_costs.assign(n_, 0.0);
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  sol.objective = obj;
  if (status == LpStatus::kOptimal && m_ > 0) {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    const Eigen::VectorXd y = Btran(cb);
    for (int i = 0; i < m_; ++i) sol.duals[i] = y[i] * row_scale_[i];
    for (int j = 0; j < n_; ++j) {
      sol.reduced_costs[j] =
          state_[j] == State::kBasic ? 0.0 : cost_[j] - DotColumn(y, j);
    }
  } else if (status == LpStatus::kOptimal) {
    for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = cost_[j];
  }
  sol.basis = basis_;
  std::sort(sol.basis.begin(), sol.basis.end());
  sol.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
  return sol;
}

}  // namespace

LpSolution SimplexSolver::Solve(const StandardLp& lp,
                                const LpOptions& options) const {
  Simplex simplex(lp, options);
  return simplex.Run();
}

}  // namespace capex
