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

#include "capex/builder.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace capex {
namespace {

std::string Tuple(std::string_view head,
                  std::initializer_list<std::string_view> parts) {
  std::string out(head);
  out += '(';
  bool first = true;
  for (std::string_view p : parts) {
    if (!first) out += ',';
    out += p;
    first = false;
  }
  return out + ')';
}

std::string Hour(int t) { return std::to_string(t); }

std::string ExportBudgetLabel(const ValidatedSystem& sys, int v, int z, int s,
                              int s2, int w) {
  return Tuple("yexp", {sys.vector(v), sys.zone(z), sys.sector(s),
                        sys.sector(s2), sys.subperiod(w)});
}

std::string TransportBudgetLabel(const ValidatedSystem& sys, int v, int z,
                                 int w) {
  return Tuple("ytrn", {sys.vector(v), sys.zone(z), sys.subperiod(w)});
}

struct Scope {
  int w;
  std::vector<bool> zone_in;
  std::vector<bool> sector_in;
};

Scope ScopeOf(const ValidatedSystem& sys, Mode mode, BlockKey key) {
  Scope scope{key.w, std::vector<bool>(sys.num_zones(), true),
              std::vector<bool>(sys.num_sectors(), true)};
  if (mode == Mode::kSectoral) {
    std::fill(scope.sector_in.begin(), scope.sector_in.end(), false);
    scope.sector_in[key.delta] = true;
  } else if (mode == Mode::kSpatial) {
    std::fill(scope.zone_in.begin(), scope.zone_in.end(), false);
    scope.zone_in[key.delta] = true;
  }
  return scope;
}

// Operational variables and rows of one block. Investment and budget
// variables are looked up by label and must already exist in `lp`.
// Returns the weighted emission terms.
std::vector<Term> AddOperations(StandardLp& lp, const ValidatedSystem& sys,
                                const Scope& scope) {
  const int w = scope.w;
  const int t0 = sys.first_hour(w);
  const int len = sys.hours_per_subperiod();
  const int t1 = t0 + len;
  const double weight = sys.weight(w);
  const std::string& wname = sys.subperiod(w);
  std::vector<Term> emissions;
  std::vector<Row> rows;
  auto row = [&](std::string label, std::vector<Term> terms, RowSense sense,
                 double rhs) {
    rows.push_back({std::move(label), std::move(terms), sense, rhs});
  };

  for (const TechRef& ref : sys.techs()) {
    if (!scope.zone_in[ref.zone] || !scope.sector_in[ref.sector]) continue;
    const TechnologySpec& tech = sys.tech_spec(ref.index);
    const int cap = lp.VariableIndex(labels::Cap(tech.id));
    if (tech.kind != TechKind::kStorage) {
      for (int t = t0; t < t1; ++t) {
        const int g = lp.AddVariable(labels::Gen(tech.id, t), 0.0, kInf,
                                     weight * tech.variable_cost);
        row(Tuple("genmax", {tech.id, Hour(t)}),
            {{g, 1.0}, {cap, -sys.availability(ref, t)}}, RowSense::kLessEqual,
            0.0);
        if (tech.emission_rate > 0.0) {
          emissions.push_back({g, weight * tech.emission_rate});
        }
      }
      continue;
    }
    const double in2 = tech.charge_efficiency * tech.charge_efficiency;
    const double out2 = tech.discharge_efficiency * tech.discharge_efficiency;
    std::vector<int> chg(len);
    std::vector<int> dis(len);
    std::vector<int> soc(len);
    for (int t = t0; t < t1; ++t) {
      chg[t - t0] = lp.AddVariable(labels::Charge(tech.id, t), 0.0, kInf);
      dis[t - t0] = lp.AddVariable(labels::Discharge(tech.id, t), 0.0, kInf,
                                   weight * tech.variable_cost);
      soc[t - t0] = lp.AddVariable(labels::Soc(tech.id, t), 0.0, kInf);
    }
    const int start =
        tech.long_duration
            ? lp.VariableIndex(labels::StorageStart(tech.id, wname))
            : -1;
    for (int k = 0; k < len; ++k) {
      const int t = t0 + k;
      row(Tuple("chgmax", {tech.id, Hour(t)}),
          {{chg[k], 1.0}, {cap, -tech.power_ratio}}, RowSense::kLessEqual,
          0.0);
      row(Tuple("dismax", {tech.id, Hour(t)}),
          {{dis[k], 1.0}, {cap, -tech.power_ratio}}, RowSense::kLessEqual,
          0.0);
      row(Tuple("socmax", {tech.id, Hour(t)}), {{soc[k], 1.0}, {cap, -1.0}},
          RowSense::kLessEqual, 0.0);
      std::vector<Term> terms = {{chg[k], -in2}, {dis[k], 1.0 / out2}};
      const int prev = k > 0 ? soc[k - 1] : (start >= 0 ? start : soc[len - 1]);
      if (prev != soc[k]) {
        terms.push_back({soc[k], 1.0});
        terms.push_back({prev, -1.0});
      }
      row(Tuple("socbal", {tech.id, Hour(t)}), std::move(terms),
          RowSense::kEqual, 0.0);
    }
    if (tech.long_duration) {
      const int delta = lp.VariableIndex(labels::StorageDelta(tech.id, wname));
      row(Tuple("socend", {tech.id, wname}),
          {{soc[len - 1], 1.0}, {start, -1.0}, {delta, -1.0}}, RowSense::kEqual,
          0.0);
    }
  }

  // Budget rows for links cut by the block boundary.
  std::map<std::string, std::vector<Term>> budgets;
  for (const TransmissionRef& ref : sys.transmission()) {
    if (!scope.sector_in[ref.sector]) continue;
    const bool from_in = scope.zone_in[ref.from];
    const bool to_in = scope.zone_in[ref.to];
    if (!from_in && !to_in) continue;
    const TransmissionLink& link = sys.transmission_spec(ref.index);
    const int cap = lp.VariableIndex(labels::Cap(link.id));
    const bool internal = from_in && to_in;
    // A link split across two blocks charges half its flow cost to each side.
    const double cost = weight * link.variable_cost * (internal ? 1.0 : 0.5);
    const int zin = from_in ? ref.from : ref.to;
    const double sign = zin == ref.from ? 1.0 : -1.0;
    std::vector<Term>* budget =
        internal ? nullptr
                 : &budgets[TransportBudgetLabel(sys, ref.vector, zin, w)];
    for (int t = t0; t < t1; ++t) {
      const int f = lp.AddVariable(labels::Transport(link.id, true, t), 0.0,
                                   kInf, cost);
      const int r = lp.AddVariable(labels::Transport(link.id, false, t), 0.0,
                                   kInf, cost);
      row(Tuple("flowmax", {link.id, "fwd", Hour(t)}), {{f, 1.0}, {cap, -1.0}},
          RowSense::kLessEqual, 0.0);
      row(Tuple("flowmax", {link.id, "rev", Hour(t)}), {{r, 1.0}, {cap, -1.0}},
          RowSense::kLessEqual, 0.0);
      if (budget) {
        budget->push_back({f, sign});
        budget->push_back({r, -sign});
      }
    }
  }
  for (const CouplingRef& ref : sys.couplings()) {
    if (!scope.zone_in[ref.zone]) continue;
    const bool from_in = scope.sector_in[ref.from];
    const bool to_in = scope.sector_in[ref.to];
    if (!from_in && !to_in) continue;
    const CouplingLink& link = sys.coupling_spec(ref.index);
    std::vector<Term>* budget = nullptr;
    double sign = 1.0;
    if (!(from_in && to_in)) {
      const int sin = from_in ? ref.from : ref.to;
      const int sout = from_in ? ref.to : ref.from;
      sign = from_in ? 1.0 : -1.0;
      budget = &budgets[ExportBudgetLabel(sys, ref.vector, ref.zone, sin, sout,
                                          w)];
    }
    for (int t = t0; t < t1; ++t) {
      const int f = lp.AddVariable(labels::Export(link.id, true, t), 0.0, kInf);
      if (budget) budget->push_back({f, sign});
      if (link.bidirectional) {
        const int r =
            lp.AddVariable(labels::Export(link.id, false, t), 0.0, kInf);
        if (budget) budget->push_back({r, -sign});
      }
    }
  }
  for (int v = 0; v < sys.num_vectors(); ++v) {
    for (int z = 0; z < sys.num_zones(); ++z) {
      if (!scope.zone_in[z]) continue;
      for (int s = 0; s < sys.num_sectors(); ++s) {
        if (!scope.sector_in[s]) continue;
        const double penalty = weight * sys.nse_penalty(v, s);
        for (int t = t0; t < t1; ++t) {
          lp.AddVariable(
              labels::Nse(sys.vector(v), sys.zone(z), sys.sector(s), t), 0.0,
              kInf, penalty);
          lp.AddVariable(
              labels::Curtail(sys.vector(v), sys.zone(z), sys.sector(s), t),
              0.0, kInf);
        }
      }
    }
  }
  for (Row& r : rows) lp.AddRow(std::move(r.label), std::move(r.terms),
                                r.sense, r.rhs);
  for (int v = 0; v < sys.num_vectors(); ++v) {
    for (int z = 0; z < sys.num_zones(); ++z) {
      if (!scope.zone_in[z]) continue;
      for (int s = 0; s < sys.num_sectors(); ++s) {
        if (!scope.sector_in[s]) continue;
        for (int t = t0; t < t1; ++t) {
          BalanceRow bal = AssembleBalance(sys, v, z, s, t);
          std::vector<Term> terms;
          terms.reserve(bal.terms.size());
          for (const LabeledTerm& lt : bal.terms) {
            terms.push_back({lp.VariableIndex(lt.var), lt.coef});
          }
          lp.AddRow(std::move(bal.label), std::move(terms), RowSense::kEqual,
                    bal.rhs);
        }
      }
    }
  }
  for (auto& [label, terms] : budgets) {
    std::string name = label;
    const std::string budget_row =
        (name.rfind("ytrn", 0) == 0 ? "trnbudget" : "expbudget") +
        name.substr(4);
    terms.push_back({lp.VariableIndex(label), -1.0});
    lp.AddRow(budget_row, std::move(terms), RowSense::kEqual, 0.0);
  }
  return emissions;
}

std::vector<int> LongDurationStorage(const ValidatedSystem& sys) {
  std::vector<int> out;
  for (const TechRef& ref : sys.techs()) {
    if (sys.tech_spec(ref.index).long_duration) out.push_back(ref.index);
  }
  return out;
}

// Chronological level tracking for long-duration storage across the original
// periods, with per-subperiod net-change limits.
void AddStorageLinking(StandardLp& lp, const ValidatedSystem& sys) {
  const int periods = sys.num_periods();
  const int len = sys.hours_per_subperiod();
  for (int index : LongDurationStorage(sys)) {
    const TechnologySpec& tech = sys.tech_spec(index);
    const int cap = lp.VariableIndex(labels::Cap(tech.id));
    std::vector<int> level(periods);
    for (int o = 0; o < periods; ++o) {
      const std::string label = labels::StorageChrono(tech.id, o);
      level[o] = lp.FindVariable(label).value_or(-1);
      if (level[o] < 0) level[o] = lp.AddVariable(label, 0.0, kInf);
    }
    for (int o = 0; o < periods; ++o) {
      const int next = (o + 1) % periods;
      const int w = sys.chronology(o);
      const int delta = lp.VariableIndex(
          labels::StorageDelta(tech.id, sys.subperiod(w)));
      lp.AddRow(Tuple("lvlomax", {tech.id, Hour(o)}),
                {{level[o], 1.0}, {cap, -1.0}}, RowSense::kLessEqual, 0.0);
      std::vector<Term> terms = {{delta, -1.0}};
      if (next != o) {
        terms.push_back({level[next], 1.0});
        terms.push_back({level[o], -1.0});
      }
      lp.AddRow(Tuple("lvlonext", {tech.id, Hour(o)}), std::move(terms),
                RowSense::kEqual, 0.0);
    }
    const double in2 = tech.charge_efficiency * tech.charge_efficiency;
    const double out2 = tech.discharge_efficiency * tech.discharge_efficiency;
    for (int w = 0; w < sys.num_subperiods(); ++w) {
      const std::string& wname = sys.subperiod(w);
      const int start = lp.VariableIndex(labels::StorageStart(tech.id, wname));
      const int delta = lp.VariableIndex(labels::StorageDelta(tech.id, wname));
      lp.AddRow(Tuple("lvlstart", {tech.id, wname}),
                {{start, 1.0}, {level[sys.representative_period(w)], -1.0}},
                RowSense::kEqual, 0.0);
      lp.AddRow(Tuple("dlvlmax", {tech.id, wname}),
                {{delta, 1.0}, {cap, -len * in2 * tech.power_ratio}},
                RowSense::kLessEqual, 0.0);
      lp.AddRow(Tuple("dlvlmin", {tech.id, wname}),
                {{delta, -1.0}, {cap, -len * tech.power_ratio / out2}},
                RowSense::kLessEqual, 0.0);
    }
  }
}

void AddCapacityVariables(StandardLp& lp, const ValidatedSystem& sys) {
  for (const TechRef& ref : sys.techs()) {
    const TechnologySpec& t = sys.tech_spec(ref.index);
    lp.AddVariable(labels::Cap(t.id), t.capacity_min, t.capacity_max,
                   t.investment_cost);
  }
  for (const TransmissionRef& ref : sys.transmission()) {
    const TransmissionLink& l = sys.transmission_spec(ref.index);
    lp.AddVariable(labels::Cap(l.id), l.capacity_min, l.capacity_max,
                   l.investment_cost);
  }
  for (int index : LongDurationStorage(sys)) {
    const std::string& id = sys.tech_spec(index).id;
    for (int w = 0; w < sys.num_subperiods(); ++w) {
      lp.AddVariable(labels::StorageStart(id, sys.subperiod(w)), 0.0, kInf);
      lp.AddVariable(labels::StorageDelta(id, sys.subperiod(w)), -kInf, kInf);
    }
  }
}

struct ExportGroup {
  int v;
  int z;
  int a;  // lower sector index
  int b;
  bool a_to_b = false;  // some link lets a export to b
  bool b_to_a = false;
};

std::vector<ExportGroup> ExportGroups(const ValidatedSystem& sys) {
  std::vector<ExportGroup> groups;
  for (const CouplingRef& ref : sys.couplings()) {
    const int a = std::min(ref.from, ref.to);
    const int b = std::max(ref.from, ref.to);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return g.v == ref.vector && g.z == ref.zone && g.a == a && g.b == b;
    });
    if (it == groups.end()) {
      groups.push_back({ref.vector, ref.zone, a, b});
      it = groups.end() - 1;
    }
    const bool bidir = sys.coupling_spec(ref.index).bidirectional;
    if (ref.from == a || bidir) it->a_to_b = true;
    if (ref.from == b || bidir) it->b_to_a = true;
  }
  std::sort(groups.begin(), groups.end(), [](const auto& x, const auto& y) {
    return std::tie(x.v, x.z, x.a, x.b) < std::tie(y.v, y.z, y.a, y.b);
  });
  return groups;
}

std::vector<std::pair<int, int>> TransportNodes(const ValidatedSystem& sys) {
  std::set<std::pair<int, int>> nodes;
  for (const TransmissionRef& ref : sys.transmission()) {
    nodes.insert({ref.vector, ref.from});
    nodes.insert({ref.vector, ref.to});
  }
  return {nodes.begin(), nodes.end()};
}

std::string BlockSuffix(const ValidatedSystem& sys, Mode mode, BlockKey key) {
  std::string name = sys.subperiod(key.w);
  if (mode == Mode::kSectoral) name += "," + sys.sector(key.delta);
  if (mode == Mode::kSpatial) name += "," + sys.zone(key.delta);
  return name;
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kTemporal: return "temporal";
    case Mode::kSectoral: return "sectoral";
    case Mode::kSpatial: return "spatial";
  }
  return "unknown";
}

LayoutPtr ComplicatingLayout::Create(const ValidatedSystem& sys, Mode mode) {
  auto layout = std::make_shared<ComplicatingLayout>();
  layout->mode_ = mode;
  auto add = [&](LayoutEntry e) {
    const int index = static_cast<int>(layout->entries_.size());
    layout->index_[e.label] = index;
    layout->entries_.push_back(std::move(e));
    return index;
  };
  for (const TechRef& ref : sys.techs()) {
    const TechnologySpec& t = sys.tech_spec(ref.index);
    add({labels::Cap(t.id), EntryKind::kCapacity, t.investment_cost,
         t.capacity_min, t.capacity_max});
  }
  for (const TransmissionRef& ref : sys.transmission()) {
    const TransmissionLink& l = sys.transmission_spec(ref.index);
    add({labels::Cap(l.id), EntryKind::kCapacity, l.investment_cost,
         l.capacity_min, l.capacity_max});
  }
  const std::vector<int> ld = LongDurationStorage(sys);
  for (int index : ld) {
    const std::string& id = sys.tech_spec(index).id;
    for (int w = 0; w < sys.num_subperiods(); ++w) {
      add({labels::StorageStart(id, sys.subperiod(w)), EntryKind::kStorageStart,
           0.0, 0.0, kInf});
      add({labels::StorageDelta(id, sys.subperiod(w)), EntryKind::kStorageDelta,
           0.0, -kInf, kInf});
    }
  }
  const auto groups = ExportGroups(sys);
  if (mode == Mode::kSectoral) {
    for (const ExportGroup& g : groups) {
      for (int w = 0; w < sys.num_subperiods(); ++w) {
        add({ExportBudgetLabel(sys, g.v, g.z, g.a, g.b, w),
             EntryKind::kExportBudget, 0.0, g.b_to_a ? -kInf : 0.0,
             g.a_to_b ? kInf : 0.0});
        add({ExportBudgetLabel(sys, g.v, g.z, g.b, g.a, w),
             EntryKind::kExportBudget, 0.0, g.a_to_b ? -kInf : 0.0,
             g.b_to_a ? kInf : 0.0});
      }
    }
  }
  const auto nodes = TransportNodes(sys);
  if (mode == Mode::kSpatial) {
    for (const auto& [v, z] : nodes) {
      for (int w = 0; w < sys.num_subperiods(); ++w) {
        add({TransportBudgetLabel(sys, v, z, w), EntryKind::kTransportBudget,
             0.0, -kInf, kInf});
      }
    }
  }
  const int deltas = mode == Mode::kSectoral  ? sys.num_sectors()
                     : mode == Mode::kSpatial ? sys.num_zones()
                                              : 1;
  const bool capped = std::isfinite(sys.spec().emission_cap);
  for (int w = 0; w < sys.num_subperiods(); ++w) {
    for (int d = 0; d < deltas; ++d) {
      const BlockKey key{w, mode == Mode::kTemporal ? -1 : d};
      const Scope scope = ScopeOf(sys, mode, key);
      std::vector<int> refs;
      for (const TechRef& ref : sys.techs()) {
        if (scope.zone_in[ref.zone] && scope.sector_in[ref.sector]) {
          const std::string& id = sys.tech_spec(ref.index).id;
          refs.push_back(layout->Index(labels::Cap(id)));
          if (sys.tech_spec(ref.index).long_duration) {
            refs.push_back(layout->Index(
                labels::StorageStart(id, sys.subperiod(w))));
            refs.push_back(layout->Index(
                labels::StorageDelta(id, sys.subperiod(w))));
          }
        }
      }
      for (const TransmissionRef& ref : sys.transmission()) {
        if (scope.sector_in[ref.sector] &&
            (scope.zone_in[ref.from] || scope.zone_in[ref.to])) {
          refs.push_back(layout->Index(
              labels::Cap(sys.transmission_spec(ref.index).id)));
        }
      }
      if (mode == Mode::kSectoral) {
        for (const ExportGroup& g : groups) {
          if (g.a == d) {
            refs.push_back(layout->Index(
                ExportBudgetLabel(sys, g.v, g.z, g.a, g.b, w)));
          }
          if (g.b == d) {
            refs.push_back(layout->Index(
                ExportBudgetLabel(sys, g.v, g.z, g.b, g.a, w)));
          }
        }
      }
      if (mode == Mode::kSpatial) {
        for (const auto& [v, z] : nodes) {
          if (z == d) {
            refs.push_back(layout->Index(TransportBudgetLabel(sys, v, z, w)));
          }
        }
      }
      std::sort(refs.begin(), refs.end());
      layout->blocks_.push_back(key);
      layout->block_names_.push_back(BlockSuffix(sys, mode, key));
      layout->refs_.push_back(std::move(refs));
      layout->emission_.push_back(-1);
    }
  }
  if (capped) {
    for (int b = 0; b < layout->num_blocks(); ++b) {
      layout->emission_[b] =
          add({"q(" + layout->block_names_[b] + ")",
               EntryKind::kEmissionBudget, 0.0, 0.0, kInf});
    }
  }
  return layout;
}

std::optional<int> ComplicatingLayout::Find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int ComplicatingLayout::Index(std::string_view label) const {
  auto found = Find(label);
  if (!found) {
    throw Error(ErrorCode::kUnknownLabel,
                "complicating variable " + std::string(label));
  }
  return *found;
}

int ComplicatingLayout::BlockIndex(BlockKey key) const {
  for (int b = 0; b < num_blocks(); ++b) {
    if (blocks_[b] == key) return b;
  }
  throw Error(ErrorCode::kUnknownLabel, "no such block");
}

ComplicatingVector ComplicatingVector::Zero(LayoutPtr layout) {
  ComplicatingVector v;
  v.values.assign(layout->size(), 0.0);
  v.layout = std::move(layout);
  return v;
}

double ComplicatingVector::Get(std::string_view label) const {
  return values.at(layout->Index(label));
}

void ComplicatingVector::Set(std::string_view label, double value) {
  values.at(layout->Index(label)) = value;
}

double ComplicatingVector::InvestmentCost() const {
  double total = 0.0;
  for (int i = 0; i < layout->size(); ++i) {
    total += layout->entry(i).cost * values[i];
  }
  return total;
}

double Cut::Evaluate(std::span<const double> x) const {
  double v = intercept;
  for (const auto& [i, g] : gradient) v += g * x[i];
  return v;
}

std::string ThetaLabel(const ComplicatingLayout& layout, int block) {
  return "theta(" + layout.block_name(block) + ")";
}

std::string CutLabel(const ComplicatingLayout& layout, const Cut& cut) {
  return "cut(" + std::to_string(cut.iterate) + "," +
         layout.block_name(cut.block) + ")";
}

std::string EmissionRowLabel(const ComplicatingLayout& layout, int block) {
  return "emis(" + layout.block_name(block) + ")";
}

std::string FixQRowLabel(const ComplicatingLayout& layout, int block) {
  return "fix_q(" + layout.block_name(block) + ")";
}

StandardLp BuildMonolithic(const ValidatedSystem& sys,
                           const MonolithicOptions& options) {
  const auto& budgets = options.subperiod_emission_budgets;
  if (!budgets.empty() &&
      static_cast<int>(budgets.size()) != sys.num_subperiods()) {
    throw Error(ErrorCode::kMismatch, "one emission budget per subperiod");
  }
  StandardLp lp;
  AddCapacityVariables(lp, sys);
  std::vector<Term> all_emissions;
  for (int w = 0; w < sys.num_subperiods(); ++w) {
    Scope scope = ScopeOf(sys, Mode::kTemporal, {w, -1});
    std::vector<Term> e = AddOperations(lp, sys, scope);
    if (!budgets.empty()) {
      lp.AddRow("emis(" + sys.subperiod(w) + ")", std::move(e),
                RowSense::kLessEqual, budgets[w]);
    } else {
      all_emissions.insert(all_emissions.end(), e.begin(), e.end());
    }
  }
  AddStorageLinking(lp, sys);
  if (budgets.empty() && std::isfinite(sys.spec().emission_cap)) {
    lp.AddRow("emis", std::move(all_emissions), RowSense::kLessEqual,
              sys.spec().emission_cap);
  }
  return lp;
}

SubproblemFactory::SubproblemFactory(const ValidatedSystem& sys,
                                     LayoutPtr layout)
    : layout_(std::move(layout)) {
  const ComplicatingLayout& lay = *layout_;
  for (int b = 0; b < lay.num_blocks(); ++b) {
    StandardLp lp;
    std::vector<Fixing> fixings;
    for (int i : lay.block_entries(b)) {
      lp.AddVariable(lay.entry(i).label, -kInf, kInf);
      fixings.push_back({lay.entry(i).label, 0.0, ""});
    }
    const int q_entry = lay.emission_entry(b);
    int q = -1;
    if (q_entry >= 0) {
      q = lp.AddVariable(lay.entry(q_entry).label, -kInf, kInf);
      fixings.push_back({lay.entry(q_entry).label, 0.0, FixQRowLabel(lay, b)});
    }
    std::vector<Term> e =
        AddOperations(lp, sys, ScopeOf(sys, lay.mode(), lay.block(b)));
    if (q >= 0) {
      e.push_back({q, -1.0});
      lp.AddRow(EmissionRowLabel(lay, b), std::move(e), RowSense::kLessEqual,
                0.0);
    }
    const int first = lp.num_rows();
    StandardLp fixed = FixVariables(lp, fixings);
    std::vector<std::pair<int, int>> rows;
    size_t k = 0;
    for (int i : lay.block_entries(b)) rows.push_back({first + k++, i});
    if (q_entry >= 0) rows.push_back({first + k++, q_entry});
    templates_.push_back(std::move(fixed));
    fix_rows_.push_back(std::move(rows));
  }
}

StandardLp SubproblemFactory::Build(int block,
                                    const ComplicatingVector& iterate) const {
  if (iterate.layout.get() != layout_.get() &&
      iterate.layout->size() != layout_->size()) {
    throw Error(ErrorCode::kMismatch, "iterate belongs to another mode");
  }
  StandardLp lp = templates_.at(block);
  for (const auto& [row, entry] : fix_rows_[block]) {
    lp.SetRhs(row, iterate.values[entry]);
  }
  return lp;
}

StandardLp BuildSubproblem(const ValidatedSystem& sys, LayoutPtr layout,
                           int block, const ComplicatingVector& iterate) {
  SubproblemFactory factory(sys, std::move(layout));
  return factory.Build(block, iterate);
}

Cut MakeCut(const ComplicatingLayout& layout, int block, int iterate,
            const StandardLp& sub, const LpSolution& solution,
            const ComplicatingVector& at) {
  Cut cut;
  cut.block = block;
  cut.iterate = iterate;
  cut.value = solution.objective;
  cut.intercept = solution.objective;
  for (int i : layout.block_entries(block)) {
    const double pi = DualOf(sub, solution, "fix_y(" + layout.entry(i).label + ")");
    cut.gradient.push_back({i, pi});
    cut.intercept -= pi * at.values[i];
  }
  const int q = layout.emission_entry(block);
  if (q >= 0) {
    const double lambda = DualOf(sub, solution, FixQRowLabel(layout, block));
    cut.gradient.push_back({q, lambda});
    cut.intercept -= lambda * at.values[q];
  }
  return cut;
}

namespace {

// Layout variables, thetas, mode rows and cuts of one layout.
void AddLayout(StandardLp& lp, const ValidatedSystem& sys,
               const ComplicatingLayout& layout, std::span<const Cut> cuts,
               const UpperOptions& options, bool primary) {
  for (const LayoutEntry& e : layout.entries()) {
    if (lp.FindVariable(e.label)) continue;
    double lo = e.lower;
    double hi = e.upper;
    auto it = options.capacity_bounds.find(e.label);
    if (it != options.capacity_bounds.end()) {
      lo = it->second.first;
      hi = it->second.second;
    }
    lp.AddVariable(e.label, lo, hi, primary ? e.cost : 0.0);
  }
  for (int b = 0; b < layout.num_blocks(); ++b) {
    lp.AddVariable(ThetaLabel(layout, b), options.theta_floor, kInf,
                   primary ? 1.0 : 0.0);
  }
  const int len = sys.hours_per_subperiod();
  if (layout.mode() == Mode::kSectoral) {
    for (const ExportGroup& g : ExportGroups(sys)) {
      for (int w = 0; w < sys.num_subperiods(); ++w) {
        const int ab =
            lp.VariableIndex(ExportBudgetLabel(sys, g.v, g.z, g.a, g.b, w));
        const int ba =
            lp.VariableIndex(ExportBudgetLabel(sys, g.v, g.z, g.b, g.a, w));
        lp.AddRow(Tuple("antisym", {sys.vector(g.v), sys.zone(g.z),
                                    sys.sector(g.a), sys.sector(g.b),
                                    sys.subperiod(w)}),
                  {{ab, 1.0}, {ba, 1.0}}, RowSense::kEqual, 0.0);
        for (const auto& [var, s] : {std::pair{ab, g.a}, std::pair{ba, g.b}}) {
          // Exports are limited by what the exporting sector can supply.
          std::vector<Term> terms = {{var, 1.0}};
          for (const TechRef& ref : sys.techs()) {
            if (ref.zone != g.z || ref.sector != s || ref.output != g.v) {
              continue;
            }
            const TechnologySpec& t = sys.tech_spec(ref.index);
            const double per_hour = t.kind == TechKind::kStorage
                                        ? t.power_ratio / t.discharge_efficiency
                                        : 1.0;
            terms.push_back(
                {lp.VariableIndex(labels::Cap(t.id)), -len * per_hour});
          }
          for (const TransmissionRef& ref : sys.transmission()) {
            if (ref.vector == g.v && ref.sector == s &&
                (ref.from == g.z || ref.to == g.z)) {
              terms.push_back(
                  {lp.VariableIndex(
                       labels::Cap(sys.transmission_spec(ref.index).id)),
                   -static_cast<double>(len)});
            }
          }
          if (terms.size() == 1) {
            lp.SetBounds(var, lp.lower(var), std::min(lp.upper(var), 0.0));
            if (lp.lower(var) > lp.upper(var)) lp.SetBounds(var, 0.0, 0.0);
            continue;
          }
          lp.AddRow("expcap" + lp.variable_label(var).substr(4),
                    std::move(terms), RowSense::kLessEqual, 0.0);
        }
      }
    }
  }
  if (layout.mode() == Mode::kSpatial) {
    std::map<std::pair<int, int>, std::vector<std::vector<Term>>> net;
    for (const TransmissionRef& ref : sys.transmission()) {
      const TransmissionLink& link = sys.transmission_spec(ref.index);
      const int cap = lp.VariableIndex(labels::Cap(link.id));
      const bool closed = lp.upper(cap) == 0.0;
      auto& from = net[{ref.vector, ref.from}];
      auto& to = net[{ref.vector, ref.to}];
      from.resize(sys.num_subperiods());
      to.resize(sys.num_subperiods());
      for (int t = 0; t < sys.num_hours(); ++t) {
        const int w = sys.subperiod_of_hour(t);
        const int f = lp.AddVariable(Tuple("uflow", {link.id, "fwd", Hour(t)}),
                                     0.0, closed ? 0.0 : kInf);
        const int r = lp.AddVariable(Tuple("uflow", {link.id, "rev", Hour(t)}),
                                     0.0, closed ? 0.0 : kInf);
        lp.AddRow(Tuple("uflowmax", {link.id, "fwd", Hour(t)}),
                  {{f, 1.0}, {cap, -1.0}}, RowSense::kLessEqual, 0.0);
        lp.AddRow(Tuple("uflowmax", {link.id, "rev", Hour(t)}),
                  {{r, 1.0}, {cap, -1.0}}, RowSense::kLessEqual, 0.0);
        from[w].push_back({f, 1.0});
        from[w].push_back({r, -1.0});
        to[w].push_back({f, -1.0});
        to[w].push_back({r, 1.0});
      }
    }
    for (auto& [key, per_w] : net) {
      for (int w = 0; w < sys.num_subperiods(); ++w) {
        const std::string label =
            TransportBudgetLabel(sys, key.first, key.second, w);
        std::vector<Term> terms = std::move(per_w[w]);
        terms.push_back({lp.VariableIndex(label), -1.0});
        lp.AddRow("trnsum" + label.substr(4), std::move(terms),
                  RowSense::kEqual, 0.0);
      }
    }
  }
  if (primary && layout.has_emission_budgets()) {
    std::vector<Term> terms;
    for (int b = 0; b < layout.num_blocks(); ++b) {
      terms.push_back(
          {lp.VariableIndex(layout.entry(layout.emission_entry(b)).label),
           1.0});
    }
    lp.AddRow("emis_total", std::move(terms), RowSense::kLessEqual,
              sys.spec().emission_cap);
  }
  std::vector<int> var_of(layout.size());
  for (int i = 0; i < layout.size(); ++i) {
    var_of[i] = lp.VariableIndex(layout.entry(i).label);
  }
  for (const Cut& cut : cuts) {
    std::vector<Term> terms = {
        {lp.VariableIndex(ThetaLabel(layout, cut.block)), 1.0}};
    for (const auto& [i, g] : cut.gradient) {
      if (g != 0.0) terms.push_back({var_of[i], -g});
    }
    lp.AddRow(CutLabel(layout, cut), std::move(terms),
              RowSense::kGreaterEqual, cut.intercept);
  }
}

}  // namespace

StandardLp BuildUpperProblem(const ValidatedSystem& sys,
                             const ComplicatingLayout& layout,
                             std::span<const Cut> cuts,
                             const UpperOptions& options) {
  StandardLp lp;
  AddLayout(lp, sys, layout, cuts, options, true);
  if (options.stage1_layout) {
    const ComplicatingLayout& inner = *options.stage1_layout;
    AddLayout(lp, sys, inner, options.stage1_cuts, options, false);
    for (int b = 0; b < layout.num_blocks(); ++b) {
      const int w = layout.block(b).w;
      std::vector<Term> theta = {{lp.VariableIndex(ThetaLabel(layout, b)), 1.0}};
      std::vector<Term> q;
      if (layout.has_emission_budgets()) {
        q.push_back(
            {lp.VariableIndex(layout.entry(layout.emission_entry(b)).label),
             -1.0});
      }
      for (int d = 0; d < inner.num_blocks(); ++d) {
        if (inner.block(d).w != w) continue;
        theta.push_back({lp.VariableIndex(ThetaLabel(inner, d)), -1.0});
        if (inner.has_emission_budgets()) {
          q.push_back(
              {lp.VariableIndex(inner.entry(inner.emission_entry(d)).label),
               1.0});
        }
      }
      lp.AddRow("thetalink(" + sys.subperiod(w) + ")", std::move(theta),
                RowSense::kGreaterEqual, 0.0);
      if (!q.empty()) {
        lp.AddRow("qlink(" + sys.subperiod(w) + ")", std::move(q),
                  RowSense::kLessEqual, 0.0);
      }
    }
  }
  AddStorageLinking(lp, sys);
  // Storage whose capacity is pinned at zero cannot hold any level.
  for (int index : LongDurationStorage(sys)) {
    const std::string& id = sys.tech_spec(index).id;
    if (lp.upper(lp.VariableIndex(labels::Cap(id))) != 0.0) continue;
    for (int w = 0; w < sys.num_subperiods(); ++w) {
      lp.SetBounds(lp.VariableIndex(labels::StorageStart(id, sys.subperiod(w))),
                   0.0, 0.0);
      lp.SetBounds(lp.VariableIndex(labels::StorageDelta(id, sys.subperiod(w))),
                   0.0, 0.0);
    }
    for (int o = 0; o < sys.num_periods(); ++o) {
      lp.SetBounds(lp.VariableIndex(labels::StorageChrono(id, o)), 0.0, 0.0);
    }
  }
  return lp;
}

StandardLp BuildRegularizationProblem(const StandardLp& upper, double lb,
                                      double ub, double alpha) {
  if (!std::isfinite(lb) || !std::isfinite(ub) || ub < lb) {
    throw Error(ErrorCode::kInvalidArgument,
                "level set needs finite bounds with lb <= ub");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
  const double level = lb + alpha * (ub - lb);
  StandardLp lp = upper;
  std::vector<Term> terms;
  double floor_sum = 0.0;
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double c = lp.cost(j);
    if (c == 0.0) continue;
    terms.push_back({j, c});
    if (c > 0.0 && std::isfinite(lp.lower(j))) floor_sum += c * lp.lower(j);
    lp.SetCost(j, 0.0);
  }
  // Make implied upper bounds explicit so the level set is bounded.
  for (const Term& t : terms) {
    const int j = t.var;
    if (t.coef <= 0.0 || !std::isfinite(lp.lower(j))) continue;
    const double room = std::max(0.0, level - floor_sum);
    const double implied = lp.lower(j) + room / t.coef;
    if (implied < lp.upper(j)) lp.SetBounds(j, lp.lower(j), implied);
  }
  lp.AddRow("levelset", std::move(terms), RowSense::kLessEqual, level);
  return lp;
}

ComplicatingVector ExtractIterate(const LayoutPtr& layout,
                                  const StandardLp& upper,
                                  const LpSolution& solution) {
  ComplicatingVector x = ComplicatingVector::Zero(layout);
  for (int i = 0; i < layout->size(); ++i) {
    const int j = upper.VariableIndex(layout->entry(i).label);
    x.values[i] =
        std::clamp(solution.primal.at(j), upper.lower(j), upper.upper(j));
  }
  // Paired export budgets are exact negatives of each other.
  for (int i = 0; i < layout->size(); ++i) {
    const LayoutEntry& e = layout->entry(i);
    if (e.kind != EntryKind::kExportBudget) continue;
    // yexp(v,z,a,b,w) pairs with yexp(v,z,b,a,w).
    std::vector<std::string> parts;
    std::string inner = e.label.substr(5, e.label.size() - 6);
    size_t start = 0;
    for (size_t k = 0; k <= inner.size(); ++k) {
      if (k == inner.size() || inner[k] == ',') {
        parts.push_back(inner.substr(start, k - start));
        start = k + 1;
      }
    }
    const std::string partner = "yexp(" + parts[0] + "," + parts[1] + "," +
                                parts[3] + "," + parts[2] + "," + parts[4] +
                                ")";
    const int p = layout->Index(partner);
    if (p < i) continue;
    const double mid = 0.5 * (x.values[i] - x.values[p]);
    x.values[i] = mid;
    x.values[p] = -mid;
  }
  return x;
}

}  // namespace capex
