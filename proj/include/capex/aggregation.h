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

// Representative-period selection by k-means over hourly profiles.

#ifndef CAPEX_AGGREGATION_H_
#define CAPEX_AGGREGATION_H_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "capex/model.h"

namespace capex {

struct Partition {
  int period_length = 0;
  std::vector<int> representatives;  // original period of each cluster
  std::vector<double> weights;       // periods represented by each cluster
  std::vector<int> assignment;       // original period -> cluster

  bool operator==(const Partition&) const = default;
};

// Each inner vector is one hourly series over the whole horizon.
Partition ClusterPeriods(const std::vector<std::vector<double>>& series,
                         int period_length, int k, uint64_t seed);

// Demand and availability series of `spec`, in declaration order.
std::vector<std::vector<double>> CollectSeries(const SystemSpec& spec);

// Reduces a full-horizon system to the representatives of `partition`.
SystemSpec ApplyWeights(const SystemSpec& full, const Partition& partition);

// Row-wise nearest centroid; `parallel` selects the OpenMP kernel.
std::vector<int> AssignNearest(const Eigen::MatrixXd& points,
                               const Eigen::MatrixXd& centroids,
                               bool parallel);

}  // namespace capex

#endif  // CAPEX_AGGREGATION_H_
