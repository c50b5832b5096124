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

#include "capex/model.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace capex {

std::string_view TechKindName(TechKind kind) {
  switch (kind) {
    case TechKind::kGeneration: return "generation";
    case TechKind::kStorage: return "storage";
    case TechKind::kConversion: return "conversion";
  }
  return "unknown";
}

namespace {

std::string JoinMessages(const std::vector<Violation>& violations) {
  std::string out;
  for (const Violation& v : violations) {
    if (!out.empty()) out += "; ";
    out += std::string(ErrorCodeName(v.code)) + ": " + v.message;
  }
  return out;
}

bool Contains(const std::vector<std::string>& names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

class Checker {
 public:
  explicit Checker(const SystemSpec& spec) : spec_(spec) {}

  std::vector<Violation> Run() {
    CheckSets();
    if (!out_.empty()) return out_;
    std::set<std::string> ids;
    for (const TechnologySpec& t : spec_.technologies) {
      if (!ids.insert(t.id).second) Add(ErrorCode::kDuplicateLabel, t.id);
      CheckTech(t);
    }
    for (const TransmissionLink& l : spec_.transmission) {
      if (!ids.insert(l.id).second) Add(ErrorCode::kDuplicateLabel, l.id);
      CheckTransmission(l);
    }
    for (const CouplingLink& c : spec_.couplings) {
      if (!ids.insert(c.id).second) Add(ErrorCode::kDuplicateLabel, c.id);
      CheckCoupling(c);
    }
    CheckSeries();
    CheckHorizon();
    return out_;
  }

 private:
  void Add(ErrorCode code, std::string message) {
    out_.push_back({code, std::move(message)});
  }
  void Ref(const std::vector<std::string>& names, const std::string& name,
           const std::string& what, const std::string& owner) {
    if (!Contains(names, name)) {
      Add(ErrorCode::kDanglingReference,
          owner + " references unknown " + what + " '" + name + "'");
    }
  }
  void NonNegative(double value, const std::string& what) {
    if (std::isnan(value) || value < 0.0) {
      Add(ErrorCode::kNegativeCost, what + " is negative");
    }
  }
  int Hours() const {
    return static_cast<int>(spec_.sets.subperiods.size()) *
           spec_.sets.hours_per_subperiod;
  }

  void CheckSets() {
    const IndexSets& s = spec_.sets;
    auto unique = [&](const std::vector<std::string>& names,
                      const std::string& what) {
      if (names.empty()) Add(ErrorCode::kSchemaViolation, "no " + what);
      std::set<std::string> seen(names.begin(), names.end());
      if (seen.size() != names.size()) {
        Add(ErrorCode::kDuplicateLabel, "repeated " + what + " name");
      }
    };
    unique(s.zones, "zones");
    unique(s.sectors, "sectors");
    unique(s.vectors, "vectors");
    unique(s.subperiods, "subperiods");
    if (s.hours_per_subperiod <= 0) {
      Add(ErrorCode::kInvalidValue, "hours_per_subperiod must be positive");
    }
  }

  void CheckCapacityRange(double lo, double hi, double cost,
                          const std::string& id) {
    if (std::isnan(lo) || std::isnan(hi) || lo < 0.0 || lo > hi) {
      Add(ErrorCode::kInvalidValue, id + " has an invalid capacity range");
    } else if (cost == 0.0 && std::isinf(hi)) {
      Add(ErrorCode::kInvalidValue,
          id + " is free to build and needs a finite capacity_max");
    }
  }

  void CheckTech(const TechnologySpec& t) {
    const IndexSets& s = spec_.sets;
    const std::string owner = "technology " + t.id;
    Ref(s.zones, t.zone, "zone", owner);
    Ref(s.sectors, t.sector, "sector", owner);
    Ref(s.vectors, t.output, "vector", owner);
    if (t.kind == TechKind::kConversion) {
      Ref(s.vectors, t.input, "vector", owner);
      if (t.input == t.output) {
        Add(ErrorCode::kInvalidValue, owner + " converts a vector into itself");
      }
      if (!(t.efficiency > 0.0) || !std::isfinite(t.efficiency)) {
        Add(ErrorCode::kInvalidValue, owner + " needs a positive efficiency");
      }
    } else if (!t.input.empty()) {
      Add(ErrorCode::kSchemaViolation, owner + " has an input but is not a "
                                               "conversion technology");
    }
    if (t.kind == TechKind::kStorage) {
      for (double eta : {t.charge_efficiency, t.discharge_efficiency}) {
        if (!(eta > 0.0 && eta <= 1.0)) {
          Add(ErrorCode::kInvalidValue, owner + " efficiency outside (0, 1]");
        }
      }
      if (!(t.power_ratio > 0.0) || !std::isfinite(t.power_ratio)) {
        Add(ErrorCode::kInvalidValue, owner + " needs a positive power ratio");
      }
    } else if (t.long_duration) {
      Add(ErrorCode::kSchemaViolation, owner + " is long-duration but not "
                                               "storage");
    }
    NonNegative(t.investment_cost, owner + " investment cost");
    NonNegative(t.variable_cost, owner + " variable cost");
    NonNegative(t.emission_rate, owner + " emission rate");
    CheckCapacityRange(t.capacity_min, t.capacity_max, t.investment_cost,
                       owner);
    if (!t.profile.empty() && t.kind != TechKind::kStorage) {
      const AvailabilityProfile* found = nullptr;
      for (const AvailabilityProfile& p : spec_.profiles) {
        if (p.name == t.profile && p.zone == t.zone) found = &p;
      }
      if (!found) {
        Add(ErrorCode::kMissingSeries,
            owner + " has no availability series '" + t.profile + "' in " +
                t.zone);
      }
    } else if (!t.profile.empty()) {
      Add(ErrorCode::kSchemaViolation, owner + " storage takes no profile");
    }
  }

  void CheckTransmission(const TransmissionLink& l) {
    const IndexSets& s = spec_.sets;
    const std::string owner = "link " + l.id;
    Ref(s.vectors, l.vector, "vector", owner);
    Ref(s.sectors, l.sector, "sector", owner);
    Ref(s.zones, l.from_zone, "zone", owner);
    Ref(s.zones, l.to_zone, "zone", owner);
    if (l.from_zone == l.to_zone) {
      Add(ErrorCode::kInvalidValue, owner + " connects a zone to itself");
    }
    NonNegative(l.investment_cost, owner + " investment cost");
    NonNegative(l.variable_cost, owner + " variable cost");
    CheckCapacityRange(l.capacity_min, l.capacity_max, l.investment_cost,
                       owner);
  }

  void CheckCoupling(const CouplingLink& c) {
    const IndexSets& s = spec_.sets;
    const std::string owner = "link " + c.id;
    Ref(s.vectors, c.vector, "vector", owner);
    Ref(s.zones, c.zone, "zone", owner);
    Ref(s.sectors, c.from_sector, "sector", owner);
    Ref(s.sectors, c.to_sector, "sector", owner);
    if (c.from_sector == c.to_sector) {
      Add(ErrorCode::kInvalidValue, owner + " couples a sector to itself");
    }
  }

  void CheckValues(const std::vector<double>& values, const std::string& what,
                   double hi) {
    if (static_cast<int>(values.size()) != Hours()) {
      Add(ErrorCode::kMissingSeries,
          what + " covers " + std::to_string(values.size()) + " of " +
              std::to_string(Hours()) + " hours");
      return;
    }
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0 || v > hi) {
        Add(ErrorCode::kInvalidValue, what + " has an out-of-range value");
        return;
      }
    }
  }

  void CheckSeries() {
    const IndexSets& s = spec_.sets;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    std::set<std::pair<std::string, std::string>> carriers;
    for (const DemandSeries& d : spec_.demand) {
      const std::string owner = "demand " + d.vector + "." + d.zone + "." +
                                d.sector;
      Ref(s.vectors, d.vector, "vector", owner);
      Ref(s.zones, d.zone, "zone", owner);
      Ref(s.sectors, d.sector, "sector", owner);
      if (!seen.insert({d.vector, d.zone, d.sector}).second) {
        Add(ErrorCode::kDuplicateLabel, owner + " given twice");
      }
      carriers.insert({d.vector, d.sector});
      CheckValues(d.values, owner, kInf);
    }
    for (const auto& [v, sec] : carriers) {
      for (const std::string& z : s.zones) {
        if (!seen.count({v, z, sec})) {
          Add(ErrorCode::kMissingSeries,
              "no demand series for " + v + "." + z + "." + sec);
        }
      }
    }
    std::set<std::pair<std::string, std::string>> profiles;
    for (const AvailabilityProfile& p : spec_.profiles) {
      Ref(s.zones, p.zone, "zone", "profile " + p.name);
      if (!profiles.insert({p.name, p.zone}).second) {
        Add(ErrorCode::kDuplicateLabel, "profile " + p.name + " given twice");
      }
      CheckValues(p.values, "profile " + p.name + "." + p.zone, 1.0);
    }
    NonNegative(spec_.default_nse_penalty, "non-served energy penalty");
    for (const NsePenalty& p : spec_.nse_penalties) {
      Ref(s.vectors, p.vector, "vector", "penalty");
      Ref(s.sectors, p.sector, "sector", "penalty");
      NonNegative(p.value, "non-served energy penalty");
    }
    if (std::isnan(spec_.emission_cap) || spec_.emission_cap < 0.0) {
      Add(ErrorCode::kInvalidValue, "emission cap must be non-negative");
    }
  }

  void CheckHorizon() {
    const int w = static_cast<int>(spec_.sets.subperiods.size());
    if (!spec_.subperiod_weights.empty()) {
      if (static_cast<int>(spec_.subperiod_weights.size()) != w) {
        Add(ErrorCode::kMismatch, "one weight per subperiod required");
      }
      for (double x : spec_.subperiod_weights) {
        if (!(x > 0.0) || !std::isfinite(x)) {
          Add(ErrorCode::kInvalidValue, "subperiod weights must be positive");
        }
      }
    }
    for (int r : spec_.chronology) {
      if (r < 0 || r >= w) {
        Add(ErrorCode::kMismatch, "chronology refers to a missing subperiod");
      }
    }
    const int periods = spec_.chronology.empty()
                            ? w
                            : static_cast<int>(spec_.chronology.size());
    if (!spec_.representative_period.empty()) {
      if (static_cast<int>(spec_.representative_period.size()) != w) {
        Add(ErrorCode::kMismatch, "one representative period per subperiod");
      }
      for (int o : spec_.representative_period) {
        if (o < 0 || o >= periods) {
          Add(ErrorCode::kMismatch, "representative period out of range");
        }
      }
    } else if (!spec_.chronology.empty() && periods != w) {
      Add(ErrorCode::kMismatch, "aggregated horizon needs representatives");
    }
  }

  const SystemSpec& spec_;
  std::vector<Violation> out_;
};

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::kInvalidArgument
                               : violations.front().code,
            JoinMessages(violations)),
      violations_(std::move(violations)) {}

std::vector<Violation> CheckSystem(const SystemSpec& spec) {
  return Checker(spec).Run();
}

ValidatedSystem ValidateSystem(SystemSpec spec) {
  std::vector<Violation> violations = CheckSystem(spec);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  ValidatedSystem sys;
  auto owned = std::make_shared<SystemSpec>(std::move(spec));
  sys.spec_ = owned;
  const SystemSpec& s = *owned;
  for (size_t i = 0; i < s.sets.zones.size(); ++i) {
    sys.zone_index_[s.sets.zones[i]] = static_cast<int>(i);
  }
  for (size_t i = 0; i < s.sets.sectors.size(); ++i) {
    sys.sector_index_[s.sets.sectors[i]] = static_cast<int>(i);
  }
  for (size_t i = 0; i < s.sets.vectors.size(); ++i) {
    sys.vector_index_[s.sets.vectors[i]] = static_cast<int>(i);
  }
  const int w = sys.num_subperiods();
  sys.weights_ = s.subperiod_weights.empty()
                     ? std::vector<double>(w, 1.0)
                     : s.subperiod_weights;
  for (size_t i = 0; i < s.technologies.size(); ++i) {
    const TechnologySpec& t = s.technologies[i];
    TechRef ref{static_cast<int>(i), sys.ZoneIndex(t.zone),
                sys.SectorIndex(t.sector), sys.VectorIndex(t.output),
                t.kind == TechKind::kConversion ? sys.VectorIndex(t.input) : -1,
                nullptr};
    for (const AvailabilityProfile& p : s.profiles) {
      if (!t.profile.empty() && p.name == t.profile && p.zone == t.zone) {
        ref.profile = &p.values;
      }
    }
    sys.techs_.push_back(ref);
  }
  for (size_t i = 0; i < s.transmission.size(); ++i) {
    const TransmissionLink& l = s.transmission[i];
    sys.transmission_.push_back({static_cast<int>(i), sys.VectorIndex(l.vector),
                                 sys.SectorIndex(l.sector),
                                 sys.ZoneIndex(l.from_zone),
                                 sys.ZoneIndex(l.to_zone)});
  }
  for (size_t i = 0; i < s.couplings.size(); ++i) {
    const CouplingLink& c = s.couplings[i];
    sys.couplings_.push_back({static_cast<int>(i), sys.VectorIndex(c.vector),
                              sys.ZoneIndex(c.zone),
                              sys.SectorIndex(c.from_sector),
                              sys.SectorIndex(c.to_sector)});
  }
  const int nv = sys.num_vectors();
  const int nz = sys.num_zones();
  const int ns = sys.num_sectors();
  sys.demand_.assign(nv * nz * ns, nullptr);
  for (const DemandSeries& d : s.demand) {
    const int key = (sys.VectorIndex(d.vector) * nz + sys.ZoneIndex(d.zone)) *
                        ns +
                    sys.SectorIndex(d.sector);
    sys.demand_[key] = &d.values;
  }
  sys.nse_penalty_.assign(nv * ns, s.default_nse_penalty);
  for (const NsePenalty& p : s.nse_penalties) {
    sys.nse_penalty_[sys.VectorIndex(p.vector) * ns + sys.SectorIndex(p.sector)] =
        p.value;
  }
  if (s.chronology.empty()) {
    for (int i = 0; i < w; ++i) sys.chronology_.push_back(i);
  } else {
    sys.chronology_ = s.chronology;
  }
  if (s.representative_period.empty()) {
    for (int i = 0; i < w; ++i) sys.representative_.push_back(i);
  } else {
    sys.representative_ = s.representative_period;
  }
  return sys;
}

int ValidatedSystem::ZoneIndex(std::string_view name) const {
  auto it = zone_index_.find(name);
  if (it == zone_index_.end()) {
    throw Error(ErrorCode::kDanglingReference, "zone " + std::string(name));
  }
  return it->second;
}

int ValidatedSystem::SectorIndex(std::string_view name) const {
  auto it = sector_index_.find(name);
  if (it == sector_index_.end()) {
    throw Error(ErrorCode::kDanglingReference, "sector " + std::string(name));
  }
  return it->second;
}

int ValidatedSystem::VectorIndex(std::string_view name) const {
  auto it = vector_index_.find(name);
  if (it == vector_index_.end()) {
    throw Error(ErrorCode::kDanglingReference, "vector " + std::string(name));
  }
  return it->second;
}

double ValidatedSystem::demand(int v, int z, int s, int t) const {
  const auto* series = demand_[(v * num_zones() + z) * num_sectors() + s];
  return series ? (*series)[t] : 0.0;
}

namespace labels {

namespace {
std::string Join(std::string_view head,
                 std::initializer_list<std::string_view> parts) {
  std::string out(head);
  out += '(';
  bool first = true;
  for (std::string_view p : parts) {
    if (!first) out += ',';
    out += p;
    first = false;
  }
  out += ')';
  return out;
}
}  // namespace

std::string Cap(std::string_view id) { return Join("cap", {id}); }
std::string StorageStart(std::string_view id, std::string_view w) {
  return Join("lvl", {id, w});
}
std::string StorageDelta(std::string_view id, std::string_view w) {
  return Join("dlvl", {id, w});
}
std::string StorageChrono(std::string_view id, int period) {
  return Join("lvlo", {id, std::to_string(period)});
}
std::string Gen(std::string_view id, int t) {
  return Join("gen", {id, std::to_string(t)});
}
std::string Charge(std::string_view id, int t) {
  return Join("chg", {id, std::to_string(t)});
}
std::string Discharge(std::string_view id, int t) {
  return Join("dis", {id, std::to_string(t)});
}
std::string Soc(std::string_view id, int t) {
  return Join("soc", {id, std::to_string(t)});
}
std::string Transport(std::string_view id, bool forward, int t) {
  return Join("trn", {id, forward ? "fwd" : "rev", std::to_string(t)});
}
std::string Export(std::string_view id, bool forward, int t) {
  return Join("exp", {id, forward ? "fwd" : "rev", std::to_string(t)});
}
std::string Nse(std::string_view v, std::string_view z, std::string_view s,
                int t) {
  return Join("nse", {v, z, s, std::to_string(t)});
}
std::string Curtail(std::string_view v, std::string_view z, std::string_view s,
                    int t) {
  return Join("crt", {v, z, s, std::to_string(t)});
}
std::string Balance(std::string_view v, std::string_view z, std::string_view s,
                    int t) {
  return Join("bal", {v, z, s, std::to_string(t)});
}

}  // namespace labels

std::vector<VariableInfo> EnumerateVariables(const ValidatedSystem& sys) {
  std::vector<VariableInfo> out;
  const int hours = sys.num_hours();
  for (const TechRef& t : sys.techs()) {
    const TechnologySpec& spec = sys.tech_spec(t.index);
    out.push_back({VarKind::kCapacity, spec.id, t.zone, t.sector, -1,
                   labels::Cap(spec.id)});
    if (spec.kind == TechKind::kStorage) {
      for (int h = 0; h < hours; ++h) {
        out.push_back({VarKind::kCharge, spec.id, t.zone, t.sector, h,
                       labels::Charge(spec.id, h)});
        out.push_back({VarKind::kDischarge, spec.id, t.zone, t.sector, h,
                       labels::Discharge(spec.id, h)});
        out.push_back({VarKind::kStateOfCharge, spec.id, t.zone, t.sector, h,
                       labels::Soc(spec.id, h)});
      }
      if (spec.long_duration) {
        for (int w = 0; w < sys.num_subperiods(); ++w) {
          out.push_back({VarKind::kStorageStart, spec.id, t.zone, t.sector, w,
                         labels::StorageStart(spec.id, sys.subperiod(w))});
          out.push_back({VarKind::kStorageDelta, spec.id, t.zone, t.sector, w,
                         labels::StorageDelta(spec.id, sys.subperiod(w))});
        }
        for (int o = 0; o < sys.num_periods(); ++o) {
          out.push_back({VarKind::kStorageChrono, spec.id, t.zone, t.sector, o,
                         labels::StorageChrono(spec.id, o)});
        }
      }
    } else {
      for (int h = 0; h < hours; ++h) {
        out.push_back({VarKind::kGeneration, spec.id, t.zone, t.sector, h,
                       labels::Gen(spec.id, h)});
      }
    }
  }
  for (const TransmissionRef& l : sys.transmission()) {
    const std::string& id = sys.transmission_spec(l.index).id;
    out.push_back({VarKind::kCapacity, id, l.from, l.sector, -1,
                   labels::Cap(id)});
    for (int h = 0; h < hours; ++h) {
      for (bool fwd : {true, false}) {
        out.push_back({VarKind::kTransport, id, l.from, l.sector, h,
                       labels::Transport(id, fwd, h)});
      }
    }
  }
  for (const CouplingRef& c : sys.couplings()) {
    const CouplingLink& spec = sys.coupling_spec(c.index);
    for (int h = 0; h < hours; ++h) {
      out.push_back({VarKind::kExport, spec.id, c.zone, c.from, h,
                     labels::Export(spec.id, true, h)});
      if (spec.bidirectional) {
        out.push_back({VarKind::kExport, spec.id, c.zone, c.from, h,
                       labels::Export(spec.id, false, h)});
      }
    }
  }
  for (int v = 0; v < sys.num_vectors(); ++v) {
    for (int z = 0; z < sys.num_zones(); ++z) {
      for (int s = 0; s < sys.num_sectors(); ++s) {
        for (int h = 0; h < hours; ++h) {
          out.push_back({VarKind::kNonServed, sys.vector(v), z, s, h,
                         labels::Nse(sys.vector(v), sys.zone(z),
                                     sys.sector(s), h)});
          out.push_back({VarKind::kCurtailment, sys.vector(v), z, s, h,
                         labels::Curtail(sys.vector(v), sys.zone(z),
                                         sys.sector(s), h)});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const VariableInfo& a, const VariableInfo& b) {
              return std::tie(a.kind, a.id, a.zone, a.sector, a.hour,
                              a.label) < std::tie(b.kind, b.id, b.zone,
                                                  b.sector, b.hour, b.label);
            });
  return out;
}

BalanceRow AssembleBalance(const ValidatedSystem& sys, int v, int z, int s,
                           int t) {
  BalanceRow row;
  row.label = labels::Balance(sys.vector(v), sys.zone(z), sys.sector(s), t);
  row.rhs = sys.demand(v, z, s, t);
  for (const TechRef& ref : sys.techs()) {
    if (ref.zone != z || ref.sector != s) continue;
    const TechnologySpec& tech = sys.tech_spec(ref.index);
    if (tech.kind == TechKind::kStorage) {
      if (ref.output != v) continue;
      row.terms.push_back(
          {labels::Discharge(tech.id, t), 1.0 / tech.discharge_efficiency});
      row.terms.push_back(
          {labels::Charge(tech.id, t), -tech.charge_efficiency});
      continue;
    }
    if (ref.output == v) row.terms.push_back({labels::Gen(tech.id, t), 1.0});
    if (ref.input == v) {
      row.terms.push_back({labels::Gen(tech.id, t), -1.0 / tech.efficiency});
    }
  }
  for (const TransmissionRef& l : sys.transmission()) {
    if (l.vector != v || l.sector != s) continue;
    const std::string& id = sys.transmission_spec(l.index).id;
    if (l.from == z) {
      row.terms.push_back({labels::Transport(id, true, t), -1.0});
      row.terms.push_back({labels::Transport(id, false, t), 1.0});
    } else if (l.to == z) {
      row.terms.push_back({labels::Transport(id, true, t), 1.0});
      row.terms.push_back({labels::Transport(id, false, t), -1.0});
    }
  }
  for (const CouplingRef& c : sys.couplings()) {
    if (c.vector != v || c.zone != z) continue;
    const CouplingLink& spec = sys.coupling_spec(c.index);
    double sign = 0.0;
    if (c.from == s) sign = -1.0;
    if (c.to == s) sign = 1.0;
    if (sign == 0.0) continue;
    row.terms.push_back({labels::Export(spec.id, true, t), sign});
    if (spec.bidirectional) {
      row.terms.push_back({labels::Export(spec.id, false, t), -sign});
    }
  }
  row.terms.push_back(
      {labels::Nse(sys.vector(v), sys.zone(z), sys.sector(s), t), 1.0});
  row.terms.push_back(
      {labels::Curtail(sys.vector(v), sys.zone(z), sys.sector(s), t), -1.0});
  return row;
}

}  // namespace capex
