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

// LP construction: the monolithic model, per-block subproblems, and the
// upper (cut-collecting) and level-set problems of each decomposition mode.

#ifndef CAPEX_BUILDER_H_
#define CAPEX_BUILDER_H_

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capex/lp.h"
#include "capex/model.h"

namespace capex {

enum class Mode { kTemporal, kSectoral, kSpatial };

std::string_view ModeName(Mode mode);

struct BlockKey {
  int w;
  int delta;  // sector (sectoral), zone (spatial), -1 (temporal)
  bool operator==(const BlockKey&) const = default;
};

enum class EntryKind {
  kCapacity,
  kStorageStart,
  kStorageDelta,
  kExportBudget,
  kTransportBudget,
  kEmissionBudget,
};

struct LayoutEntry {
  std::string label;
  EntryKind kind;
  double cost = 0.0;  // investment cost, capacities only
  double lower = -kInf;
  double upper = kInf;
};

// Names and indexes the complicating variables of one decomposition mode.
class ComplicatingLayout {
 public:
  static std::shared_ptr<const ComplicatingLayout> Create(
      const ValidatedSystem& system, Mode mode);

  Mode mode() const { return mode_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const LayoutEntry& entry(int i) const { return entries_[i]; }
  const std::vector<LayoutEntry>& entries() const { return entries_; }
  std::optional<int> Find(std::string_view label) const;
  int Index(std::string_view label) const;  // throws kUnknownLabel

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const BlockKey& block(int b) const { return blocks_[b]; }
  int BlockIndex(BlockKey key) const;
  // "w1" or "w1,elec".
  const std::string& block_name(int b) const { return block_names_[b]; }
  // Entries a block's subproblem is fixed to, excluding its emission budget.
  const std::vector<int>& block_entries(int b) const { return refs_[b]; }
  // -1 when the system has no emission cap.
  int emission_entry(int b) const { return emission_[b]; }
  bool has_emission_budgets() const { return !emission_.empty() &&
                                              emission_[0] >= 0; }

 private:
  Mode mode_ = Mode::kTemporal;
  std::vector<LayoutEntry> entries_;
  std::map<std::string, int, std::less<>> index_;
  std::vector<BlockKey> blocks_;
  std::vector<std::string> block_names_;
  std::vector<std::vector<int>> refs_;
  std::vector<int> emission_;
};

using LayoutPtr = std::shared_ptr<const ComplicatingLayout>;

struct ComplicatingVector {
  LayoutPtr layout;
  std::vector<double> values;

  static ComplicatingVector Zero(LayoutPtr layout);
  double Get(std::string_view label) const;
  void Set(std::string_view label, double value);
  // Sum of investment cost times capacity.
  double InvestmentCost() const;
};

// theta_b >= intercept + sum gradient_i x_i
struct Cut {
  int block = 0;
  int iterate = 0;
  double value = 0.0;  // subproblem objective at the iterate
  double intercept = 0.0;
  std::vector<std::pair<int, double>> gradient;  // layout index -> slope

  double Evaluate(std::span<const double> x) const;
};

std::string ThetaLabel(const ComplicatingLayout& layout, int block);
std::string CutLabel(const ComplicatingLayout& layout, const Cut& cut);
std::string EmissionRowLabel(const ComplicatingLayout& layout, int block);
std::string FixQRowLabel(const ComplicatingLayout& layout, int block);

struct MonolithicOptions {
  // One budget per subperiod replaces the horizon-wide emission row.
  std::vector<double> subperiod_emission_budgets;
};

StandardLp BuildMonolithic(const ValidatedSystem& system,
                           const MonolithicOptions& options = {});

// Builds each block's subproblem once and refreshes the fixing values.
class SubproblemFactory {
 public:
  SubproblemFactory(const ValidatedSystem& system, LayoutPtr layout);
  int num_blocks() const { return static_cast<int>(templates_.size()); }
  StandardLp Build(int block, const ComplicatingVector& iterate) const;
  const LayoutPtr& layout() const { return layout_; }

 private:
  LayoutPtr layout_;
  std::vector<StandardLp> templates_;
  std::vector<std::vector<std::pair<int, int>>> fix_rows_;  // row, entry
};

StandardLp BuildSubproblem(const ValidatedSystem& system, LayoutPtr layout,
                           int block, const ComplicatingVector& iterate);

// Cut from a solved subproblem: slopes are the duals of its fixing rows.
Cut MakeCut(const ComplicatingLayout& layout, int block, int iterate,
            const StandardLp& subproblem, const LpSolution& solution,
            const ComplicatingVector& at);

struct UpperOptions {
  double theta_floor = 0.0;
  // label -> (lower, upper), overriding capacity bounds.
  std::map<std::string, std::pair<double, double>, std::less<>>
      capacity_bounds;
  // Earlier budget-mode cuts kept below the temporal thetas.
  LayoutPtr stage1_layout;
  std::vector<Cut> stage1_cuts;
};

StandardLp BuildUpperProblem(const ValidatedSystem& system,
                             const ComplicatingLayout& layout,
                             std::span<const Cut> cuts,
                             const UpperOptions& options = {});

// Feasibility problem over the upper problem's constraints with the
// objective capped at lb + alpha (ub - lb).
StandardLp BuildRegularizationProblem(const StandardLp& upper, double lb,
                                      double ub, double alpha);

ComplicatingVector ExtractIterate(const LayoutPtr& layout,
                                  const StandardLp& upper,
                                  const LpSolution& solution);

}  // namespace capex

#endif  // CAPEX_BUILDER_H_
