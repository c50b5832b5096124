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

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "capex/lp.h"

namespace capex {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kFreeRegularization = 1e-8;
constexpr double kDualRegularization = 1e-8;
constexpr double kStepFraction = 0.995;

double MaxStep(const Vec& s, const Vec& ds, const std::vector<bool>& active) {
  double alpha = 1.0 / kStepFraction;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (active[j] && ds[j] < 0.0) alpha = std::min(alpha, -s[j] / ds[j]);
  }
  return alpha;
}

}  // namespace

LpSolution InteriorPointSolver::Solve(const StandardLp& lp,
                                      const LpOptions& options) const {
  const auto start = std::chrono::steady_clock::now();
  const int n0 = lp.num_variables();
  const int m = lp.num_rows();

  std::vector<int> column_of(n0, -1);
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> c;
  std::vector<int> structural;
  for (int j = 0; j < n0; ++j) {
    if (lp.lower(j) == lp.upper(j)) continue;
    column_of[j] = static_cast<int>(lo.size());
    structural.push_back(j);
    lo.push_back(lp.lower(j));
    hi.push_back(lp.upper(j));
    c.push_back(lp.cost(j));
  }
  // Ruiz equilibration of the structural block: A' = R A C, x = C x'.
  const int ns = static_cast<int>(structural.size());
  std::vector<double> scale(m, 1.0);
  std::vector<double> col_scale(ns, 1.0);
  for (int pass = 0; pass < 8; ++pass) {
    std::vector<double> row_max(m, 0.0);
    std::vector<double> col_max(ns, 0.0);
    for (int i = 0; i < m; ++i) {
      for (const Term& t : lp.row(i).terms) {
        const int col = column_of[t.var];
        if (col < 0) continue;
        const double v = std::abs(t.coef) * scale[i] * col_scale[col];
        row_max[i] = std::max(row_max[i], v);
        col_max[col] = std::max(col_max[col], v);
      }
    }
    for (int i = 0; i < m; ++i) {
      if (row_max[i] > 0.0) scale[i] /= std::sqrt(row_max[i]);
    }
    for (int j = 0; j < ns; ++j) {
      if (col_max[j] > 0.0) col_scale[j] /= std::sqrt(col_max[j]);
    }
  }
  for (int j = 0; j < ns; ++j) {
    lo[j] /= col_scale[j];
    hi[j] /= col_scale[j];
    c[j] *= col_scale[j];
  }
  Vec b(m);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < m; ++i) {
    const Row& row = lp.row(i);
    double rhs = row.rhs;
    for (const Term& t : row.terms) {
      const int col = column_of[t.var];
      if (col < 0) {
        rhs -= t.coef * lp.lower(t.var);
      } else {
        triplets.emplace_back(i, col, t.coef * scale[i] * col_scale[col]);
      }
    }
    b[i] = rhs * scale[i];
    if (row.sense != RowSense::kEqual) {
      const int col = static_cast<int>(lo.size());
      triplets.emplace_back(i, col,
                            row.sense == RowSense::kLessEqual ? 1.0 : -1.0);
      lo.push_back(0.0);
      hi.push_back(kInf);
      c.push_back(0.0);
    }
  }
  const int n = static_cast<int>(lo.size());
  SpMat a(m, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  const SpMat at = a.transpose();

  // Quasidefinite augmented system [-D^-1 A'; A delta*I], with a larger
  // regularization retried when a pivot vanishes.
  Eigen::SimplicialLDLT<SpMat> ldlt;
  SpMat exact;
  bool analyzed = false;
  auto factor = [&](const Vec& dinv) {
    std::vector<Eigen::Triplet<double>> kt;
    kt.reserve(2 * (n + m) + 2 * a.nonZeros());
    for (int j = 0; j < n; ++j) kt.emplace_back(j, j, -dinv[j]);
    for (int j = 0; j < n; ++j) {
      for (SpMat::InnerIterator it(a, j); it; ++it) {
        kt.emplace_back(n + it.row(), j, it.value());
        kt.emplace_back(j, n + it.row(), it.value());
      }
    }
    exact.resize(n + m, n + m);
    exact.setFromTriplets(kt.begin(), kt.end());
    const size_t base = kt.size();
    for (double reg = kDualRegularization; reg <= 1e-3; reg *= 100.0) {
      kt.resize(base);
      for (int j = 0; j < n; ++j) kt.emplace_back(j, j, -reg);
      for (int i = 0; i < m; ++i) kt.emplace_back(n + i, n + i, reg);
      SpMat augmented(n + m, n + m);
      augmented.setFromTriplets(kt.begin(), kt.end());
      if (!analyzed) {
        ldlt.analyzePattern(augmented);
        analyzed = true;
      }
      ldlt.factorize(augmented);
      if (ldlt.info() == Eigen::Success) return true;
    }
    return false;
  };
  auto solve = [&](const Vec& rhs) {
    Vec out = ldlt.solve(rhs);
    for (int refine = 0; refine < 5; ++refine) {
      out += ldlt.solve(rhs - exact * out);
    }
    return out;
  };

  std::vector<bool> has_lo(n);
  std::vector<bool> has_hi(n);
  int num_bounds = 0;
  Vec x(n);
  Vec cv(n);
  for (int j = 0; j < n; ++j) {
    has_lo[j] = std::isfinite(lo[j]);
    has_hi[j] = std::isfinite(hi[j]);
    num_bounds += has_lo[j] + has_hi[j];
    cv[j] = c[j];
    if (has_lo[j] && has_hi[j]) {
      x[j] = lo[j] + std::min(0.5 * (hi[j] - lo[j]), 1.0);
    } else if (has_lo[j]) {
      x[j] = lo[j] + 1.0;
    } else if (has_hi[j]) {
      x[j] = hi[j] - 1.0;
    } else {
      x[j] = 0.0;
    }
  }
  // Least-norm correction onto Ax = b, then pushed inside the bounds.
  if (m > 0 && factor(Vec::Ones(n))) {
    Vec rhs = Vec::Zero(n + m);
    rhs.tail(m) = b - a * x;
    x += solve(rhs).head(n);
  }
  Vec y = Vec::Zero(m);
  Vec zl = Vec::Zero(n);
  Vec zu = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double margin = std::max(1.0, 0.1 * std::abs(x[j]));
    if (has_lo[j] && has_hi[j]) {
      const double inner = std::min(margin, 0.5 * (hi[j] - lo[j]));
      x[j] = std::clamp(x[j], lo[j] + inner, hi[j] - inner);
    } else if (has_lo[j]) {
      x[j] = std::max(x[j], lo[j] + margin);
    } else if (has_hi[j]) {
      x[j] = std::min(x[j], hi[j] - margin);
    }
    if (has_lo[j]) zl[j] = std::max(cv[j], 0.0) + 1.0;
    if (has_hi[j]) zu[j] = std::max(-cv[j], 0.0) + 1.0;
  }
  const double bnorm = b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0;
  const double cnorm = cv.size() ? cv.lpNorm<Eigen::Infinity>() : 0.0;
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : 200;
  const double tol = std::max(options.primal_tolerance, 1e-10);

  LpSolution sol;
  sol.status = LpStatus::kIterationLimit;
  Vec sl(n);
  Vec su(n);
  Vec dinv(n);
  Vec d(n);
  int stalled = 0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const double elapsed = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    if (elapsed > options.time_limit_seconds) {
      sol.status = LpStatus::kTimeLimit;
      break;
    }
    double mu = 0.0;
    for (int j = 0; j < n; ++j) {
      sl[j] = has_lo[j] ? x[j] - lo[j] : 1.0;
      su[j] = has_hi[j] ? hi[j] - x[j] : 1.0;
      mu += (has_lo[j] ? sl[j] * zl[j] : 0.0) + (has_hi[j] ? su[j] * zu[j] : 0.0);
    }
    mu = num_bounds > 0 ? mu / num_bounds : 0.0;
    const Vec rp = b - a * x;
    const Vec rd = cv - at * y - zl + zu;
    const double pinf = (rp.size() ? rp.lpNorm<Eigen::Infinity>() : 0.0) /
                        (1.0 + bnorm);
    const double dinf = (rd.size() ? rd.lpNorm<Eigen::Infinity>() : 0.0) /
                        (1.0 + cnorm);
    const double obj = cv.dot(x);
    if (pinf <= tol && dinf <= tol && mu <= tol * (1.0 + std::abs(obj))) {
      sol.status = LpStatus::kOptimal;
      break;
    }
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      if (has_lo[j]) v += zl[j] / sl[j];
      if (has_hi[j]) v += zu[j] / su[j];
      if (!has_lo[j] && !has_hi[j]) v = kFreeRegularization;
      dinv[j] = std::clamp(v, 1e-12, 1e12);
      d[j] = 1.0 / dinv[j];
    }
    if (!factor(dinv)) {
      sol.status = LpStatus::kNumericalFailure;
      break;
    }
    auto direction = [&](const Vec& rcl, const Vec& rcu, Vec& dx, Vec& dy,
                         Vec& dzl, Vec& dzu) {
      Vec rt = rd;
      for (int j = 0; j < n; ++j) {
        if (has_lo[j]) rt[j] -= rcl[j] / sl[j];
        if (has_hi[j]) rt[j] += rcu[j] / su[j];
      }
      Vec rhs(n + m);
      rhs << rt, rp;
      const Vec sol_xy = solve(rhs);
      dx = sol_xy.head(n);
      dy = sol_xy.tail(m);
      dzl = Vec::Zero(n);
      dzu = Vec::Zero(n);
      for (int j = 0; j < n; ++j) {
        if (has_lo[j]) dzl[j] = (rcl[j] - zl[j] * dx[j]) / sl[j];
        if (has_hi[j]) dzu[j] = (rcu[j] + zu[j] * dx[j]) / su[j];
      }
    };
    auto steps = [&](const Vec& dx, const Vec& dzl, const Vec& dzu,
                     double& ap, double& ad) {
      ap = std::min(MaxStep(sl, dx, has_lo), MaxStep(su, -dx, has_hi));
      ad = std::min(MaxStep(zl, dzl, has_lo), MaxStep(zu, dzu, has_hi));
    };
    Vec rcl(n);
    Vec rcu(n);
    for (int j = 0; j < n; ++j) {
      rcl[j] = has_lo[j] ? -sl[j] * zl[j] : 0.0;
      rcu[j] = has_hi[j] ? -su[j] * zu[j] : 0.0;
    }
    Vec dx, dy, dzl, dzu;
    direction(rcl, rcu, dx, dy, dzl, dzu);
    double ap, ad;
    steps(dx, dzl, dzu, ap, ad);
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);
    double mu_aff = 0.0;
    for (int j = 0; j < n; ++j) {
      if (has_lo[j]) mu_aff += (sl[j] + ap * dx[j]) * (zl[j] + ad * dzl[j]);
      if (has_hi[j]) mu_aff += (su[j] - ap * dx[j]) * (zu[j] + ad * dzu[j]);
    }
    mu_aff = num_bounds > 0 ? mu_aff / num_bounds : 0.0;
    const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;
    for (int j = 0; j < n; ++j) {
      if (has_lo[j]) rcl[j] = sigma * mu - sl[j] * zl[j] - dx[j] * dzl[j];
      if (has_hi[j]) rcu[j] = sigma * mu - su[j] * zu[j] + dx[j] * dzu[j];
    }
    direction(rcl, rcu, dx, dy, dzl, dzu);
    steps(dx, dzl, dzu, ap, ad);
    ap = std::min(1.0, kStepFraction * ap);
    ad = std::min(1.0, kStepFraction * ad);
    x += ap * dx;
    y += ad * dy;
    zl += ad * dzl;
    zu += ad * dzu;
    stalled = (ap < 1e-8 && ad < 1e-8) ? stalled + 1 : 0;
    if (stalled > 5 || !x.allFinite() || !y.allFinite()) {
      sol.status = LpStatus::kInfeasible;
      break;
    }
  }
  if (sol.status == LpStatus::kIterationLimit) {
    const Vec rp = b - a * x;
    const double pinf = (rp.size() ? rp.lpNorm<Eigen::Infinity>() : 0.0) /
                        (1.0 + bnorm);
    if (pinf > 1e-6) sol.status = LpStatus::kInfeasible;
  }

  sol.iterations = iter;
  sol.primal.assign(n0, 0.0);
  sol.reduced_costs.assign(n0, 0.0);
  for (int j = 0; j < n0; ++j) {
    const int col = column_of[j];
    if (col < 0) {
      sol.primal[j] = lp.lower(j);
      continue;
    }
    sol.primal[j] =
        std::clamp(x[col] * col_scale[col], lp.lower(j), lp.upper(j));
    sol.reduced_costs[j] = (zl[col] - zu[col]) / col_scale[col];
  }
  sol.duals.assign(m, 0.0);
  for (int i = 0; i < m; ++i) sol.duals[i] = y[i] * scale[i];
  double obj = 0.0;
  for (int j = 0; j < n0; ++j) obj += lp.cost(j) * sol.primal[j];
  sol.objective = obj;
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
  return sol;
}

}  // namespace capex
