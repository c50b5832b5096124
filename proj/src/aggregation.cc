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

#include "capex/aggregation.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace capex {
namespace {

constexpr int kRestarts = 8;
constexpr int kMaxLloydIterations = 100;

double SquaredDistance(const Eigen::MatrixXd& a, int i,
                       const Eigen::MatrixXd& b, int j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Eigen::MatrixXd Features(const std::vector<std::vector<double>>& series,
                         int period_length, int periods) {
  const int dims = static_cast<int>(series.size()) * period_length;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(periods, std::max(dims, 1));
  for (size_t k = 0; k < series.size(); ++k) {
    const auto [lo_it, hi_it] =
        std::minmax_element(series[k].begin(), series[k].end());
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    for (int p = 0; p < periods; ++p) {
      for (int h = 0; h < period_length; ++h) {
        const double v = series[k][p * period_length + h];
        f(p, k * period_length + h) = span > 0.0 ? (v - lo) / span : 0.0;
      }
    }
  }
  return f;
}

struct Clustering {
  std::vector<int> assignment;
  Eigen::MatrixXd centroids;
  double inertia = std::numeric_limits<double>::infinity();
};

Clustering Lloyd(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const int n = static_cast<int>(x.rows());
  Clustering c;
  c.centroids.resize(k, x.cols());
  // k-means++ seeding.
  std::uniform_int_distribution<int> pick(0, n - 1);
  c.centroids.row(0) = x.row(pick(rng));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x, i, c.centroids, j - 1));
      total += d2[i];
    }
    int chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        r -= d2[chosen];
        if (r <= 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    c.centroids.row(j) = x.row(chosen);
  }
  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    std::vector<int> next = AssignNearest(x, c.centroids, true);
    std::vector<int> count(k, 0);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, x.cols());
    for (int i = 0; i < n; ++i) {
      sum.row(next[i]) += x.row(i);
      ++count[next[i]];
    }
    for (int j = 0; j < k; ++j) {
      if (count[j] > 0) {
        c.centroids.row(j) = sum.row(j) / count[j];
        continue;
      }
      // Empty cluster: move it to the point farthest from its centroid.
      int far = 0;
      double best = -1.0;
      for (int i = 0; i < n; ++i) {
        const double d = SquaredDistance(x, i, c.centroids, next[i]);
        if (d > best && count[next[i]] > 1) {
          best = d;
          far = i;
        }
      }
      --count[next[far]];
      next[far] = j;
      count[j] = 1;
      c.centroids.row(j) = x.row(far);
    }
    const bool stable = next == c.assignment;
    c.assignment = std::move(next);
    if (stable) break;
  }
  c.inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    c.inertia += SquaredDistance(x, i, c.centroids, c.assignment[i]);
  }
  return c;
}

}  // namespace

std::vector<int> AssignNearest(const Eigen::MatrixXd& points,
                               const Eigen::MatrixXd& centroids,
                               bool parallel) {
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(centroids.rows());
  std::vector<int> out(n, 0);
  auto nearest = [&](int i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      const double d = SquaredDistance(points, i, centroids, j);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[i] = nearest(i);
  } else {
    for (int i = 0; i < n; ++i) out[i] = nearest(i);
  }
  return out;
}

std::vector<std::vector<double>> CollectSeries(const SystemSpec& spec) {
  std::vector<std::vector<double>> out;
  for (const DemandSeries& d : spec.demand) out.push_back(d.values);
  for (const AvailabilityProfile& p : spec.profiles) out.push_back(p.values);
  return out;
}

Partition ClusterPeriods(const std::vector<std::vector<double>>& series,
                         int period_length, int k, uint64_t seed) {
  if (period_length <= 0 || series.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to cluster");
  }
  const size_t hours = series.front().size();
  for (const auto& s : series) {
    if (s.size() != hours) {
      throw Error(ErrorCode::kMismatch, "series lengths differ");
    }
  }
  if (hours == 0 || hours % period_length != 0) {
    throw Error(ErrorCode::kMismatch,
                "horizon is not a whole number of periods");
  }
  const int periods = static_cast<int>(hours / period_length);
  if (k <= 0 || k > periods) {
    throw Error(ErrorCode::kInvalidArgument,
                "k = " + std::to_string(k) + " with " +
                    std::to_string(periods) + " periods");
  }
  Partition part;
  part.period_length = period_length;
  if (k == periods) {
    part.representatives.resize(periods);
    std::iota(part.representatives.begin(), part.representatives.end(), 0);
    part.weights.assign(periods, 1.0);
    part.assignment = part.representatives;
    return part;
  }
  const Eigen::MatrixXd x = Features(series, period_length, periods);
  std::mt19937_64 rng(seed);
  Clustering best;
  for (int r = 0; r < kRestarts; ++r) {
    Clustering c = Lloyd(x, k, rng);
    if (c.inertia < best.inertia) best = std::move(c);
  }
  std::vector<int> medoid(k, -1);
  std::vector<double> medoid_d(k, std::numeric_limits<double>::infinity());
  std::vector<double> size(k, 0.0);
  for (int i = 0; i < periods; ++i) {
    const int j = best.assignment[i];
    size[j] += 1.0;
    const double d = SquaredDistance(x, i, best.centroids, j);
    if (d < medoid_d[j]) {
      medoid_d[j] = d;
      medoid[j] = i;
    }
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return medoid[a] < medoid[b]; });
  std::vector<int> rank(k);
  for (int r = 0; r < k; ++r) {
    rank[order[r]] = r;
    part.representatives.push_back(medoid[order[r]]);
    part.weights.push_back(size[order[r]]);
  }
  for (int i = 0; i < periods; ++i) {
    part.assignment.push_back(rank[best.assignment[i]]);
  }
  return part;
}

SystemSpec ApplyWeights(const SystemSpec& full, const Partition& partition) {
  const int length = full.sets.hours_per_subperiod;
  const int periods = static_cast<int>(full.sets.subperiods.size());
  if (partition.period_length != length ||
      static_cast<int>(partition.assignment.size()) != periods) {
    throw Error(ErrorCode::kMismatch,
                "partition does not match the system horizon");
  }
  if (!full.subperiod_weights.empty() || !full.chronology.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "system is already aggregated");
  }
  const int k = static_cast<int>(partition.representatives.size());
  if (static_cast<int>(partition.weights.size()) != k) {
    throw Error(ErrorCode::kMismatch, "one weight per representative");
  }
  for (int a : partition.assignment) {
    if (a < 0 || a >= k) {
      throw Error(ErrorCode::kMismatch, "assignment out of range");
    }
  }
  bool identity = k == periods;
  for (int j = 0; j < k && identity; ++j) {
    identity = partition.representatives[j] == j &&
               partition.weights[j] == 1.0 && partition.assignment[j] == j;
  }
  if (identity) return full;

  auto slice = [&](const std::vector<double>& values) {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(k) * length);
    for (int rep : partition.representatives) {
      if (rep < 0 || rep >= periods) {
        throw Error(ErrorCode::kMismatch, "representative out of range");
      }
      out.insert(out.end(), values.begin() + rep * length,
                 values.begin() + (rep + 1) * length);
    }
    return out;
  };
  SystemSpec out = full;
  out.sets.subperiods.clear();
  for (int rep : partition.representatives) {
    out.sets.subperiods.push_back(full.sets.subperiods.at(rep));
  }
  for (DemandSeries& d : out.demand) d.values = slice(d.values);
  for (AvailabilityProfile& p : out.profiles) p.values = slice(p.values);
  out.subperiod_weights = partition.weights;
  out.chronology = partition.assignment;
  out.representative_period = partition.representatives;
  return out;
}

}  // namespace capex
