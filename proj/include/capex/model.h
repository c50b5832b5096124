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

// System description for multi-sector capacity expansion: index sets,
// technologies, links, hourly series, and the validated view used by the
// problem builders.

#ifndef CAPEX_MODEL_H_
#define CAPEX_MODEL_H_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capex/common.h"
#include "capex/lp.h"

namespace capex {

enum class TechKind { kGeneration, kStorage, kConversion };

std::string_view TechKindName(TechKind kind);

struct TechnologySpec {
  std::string id;
  TechKind kind = TechKind::kGeneration;
  std::string zone;
  std::string sector;
  std::string output;  // stored vector for storage
  std::string input;   // conversion only
  double investment_cost = 0.0;  // per MW; per MWh of energy for storage
  double variable_cost = 0.0;    // per MWh produced or discharged
  std::string profile;           // availability profile, empty means 1
  double efficiency = 1.0;       // conversion output per unit input
  double charge_efficiency = 1.0;
  double discharge_efficiency = 1.0;
  double power_ratio = 1.0;  // storage hourly charge/discharge per MWh
  bool long_duration = false;
  double emission_rate = 0.0;  // t per MWh produced
  double capacity_min = 0.0;
  double capacity_max = kInf;

  bool operator==(const TechnologySpec&) const = default;
};

struct TransmissionLink {
  std::string id;
  std::string vector;
  std::string sector;
  std::string from_zone;
  std::string to_zone;
  double investment_cost = 0.0;  // per MW
  double variable_cost = 0.0;    // per MWh carried
  double capacity_min = 0.0;
  double capacity_max = kInf;

  bool operator==(const TransmissionLink&) const = default;
};

// Exchange of `vector` between two sectors inside one zone.
struct CouplingLink {
  std::string id;
  std::string vector;
  std::string zone;
  std::string from_sector;
  std::string to_sector;
  bool bidirectional = false;

  bool operator==(const CouplingLink&) const = default;
};

struct DemandSeries {
  std::string vector;
  std::string zone;
  std::string sector;
  std::vector<double> values;  // MWh per hour

  bool operator==(const DemandSeries&) const = default;
};

struct AvailabilityProfile {
  std::string name;
  std::string zone;
  std::vector<double> values;  // fraction of capacity, in [0, 1]

  bool operator==(const AvailabilityProfile&) const = default;
};

struct NsePenalty {
  std::string vector;
  std::string sector;
  double value = 0.0;

  bool operator==(const NsePenalty&) const = default;
};

struct IndexSets {
  std::vector<std::string> zones;
  std::vector<std::string> sectors;
  std::vector<std::string> vectors;
  std::vector<std::string> subperiods;
  int hours_per_subperiod = 0;

  bool operator==(const IndexSets&) const = default;
};

struct SystemSpec {
  std::string name;
  IndexSets sets;
  std::vector<TechnologySpec> technologies;
  std::vector<TransmissionLink> transmission;
  std::vector<CouplingLink> couplings;
  std::vector<DemandSeries> demand;
  std::vector<AvailabilityProfile> profiles;
  double emission_cap = kInf;  // t over the horizon
  double default_nse_penalty = 10000.0;
  std::vector<NsePenalty> nse_penalties;
  // Empty means weight 1 for every subperiod.
  std::vector<double> subperiod_weights;
  // Original period -> subperiod, in chronological order. Empty means the
  // identity (subperiods are the original periods).
  std::vector<int> chronology;
  // Subperiod -> original period it was taken from. Empty means identity.
  std::vector<int> representative_period;

  bool operator==(const SystemSpec&) const = default;
};

struct Violation {
  ErrorCode code;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

std::vector<Violation> CheckSystem(const SystemSpec& spec);

struct TechRef {
  int index;
  int zone;
  int sector;
  int output;
  int input;  // -1 unless conversion
  const std::vector<double>* profile;  // null means always available
};

struct TransmissionRef {
  int index;
  int vector;
  int sector;
  int from;
  int to;
};

struct CouplingRef {
  int index;
  int vector;
  int zone;
  int from;
  int to;
};

// Immutable, cross-checked view of a SystemSpec.
class ValidatedSystem {
 public:
  const SystemSpec& spec() const { return *spec_; }

  int num_zones() const { return static_cast<int>(spec_->sets.zones.size()); }
  int num_sectors() const {
    return static_cast<int>(spec_->sets.sectors.size());
  }
  int num_vectors() const {
    return static_cast<int>(spec_->sets.vectors.size());
  }
  int num_subperiods() const {
    return static_cast<int>(spec_->sets.subperiods.size());
  }
  int hours_per_subperiod() const { return spec_->sets.hours_per_subperiod; }
  int num_hours() const { return num_subperiods() * hours_per_subperiod(); }
  int first_hour(int w) const { return w * hours_per_subperiod(); }
  int subperiod_of_hour(int t) const { return t / hours_per_subperiod(); }
  double weight(int w) const { return weights_[w]; }

  const std::string& zone(int z) const { return spec_->sets.zones[z]; }
  const std::string& sector(int s) const { return spec_->sets.sectors[s]; }
  const std::string& vector(int v) const { return spec_->sets.vectors[v]; }
  const std::string& subperiod(int w) const {
    return spec_->sets.subperiods[w];
  }
  int ZoneIndex(std::string_view name) const;
  int SectorIndex(std::string_view name) const;
  int VectorIndex(std::string_view name) const;

  const std::vector<TechRef>& techs() const { return techs_; }
  const TechnologySpec& tech_spec(int i) const {
    return spec_->technologies[i];
  }
  const std::vector<TransmissionRef>& transmission() const {
    return transmission_;
  }
  const TransmissionLink& transmission_spec(int i) const {
    return spec_->transmission[i];
  }
  const std::vector<CouplingRef>& couplings() const { return couplings_; }
  const CouplingLink& coupling_spec(int i) const {
    return spec_->couplings[i];
  }

  double demand(int v, int z, int s, int t) const;
  double availability(const TechRef& tech, int t) const {
    return tech.profile ? (*tech.profile)[t] : 1.0;
  }
  double nse_penalty(int v, int s) const {
    return nse_penalty_[v * num_sectors() + s];
  }

  int num_periods() const { return static_cast<int>(chronology_.size()); }
  int chronology(int period) const { return chronology_[period]; }
  int representative_period(int w) const { return representative_[w]; }

 private:
  friend ValidatedSystem ValidateSystem(SystemSpec spec);
  std::shared_ptr<const SystemSpec> spec_;
  std::vector<double> weights_;
  std::vector<TechRef> techs_;
  std::vector<TransmissionRef> transmission_;
  std::vector<CouplingRef> couplings_;
  std::map<std::string, int, std::less<>> zone_index_;
  std::map<std::string, int, std::less<>> sector_index_;
  std::map<std::string, int, std::less<>> vector_index_;
  // (v, z, s) -> series, null when absent.
  std::vector<const std::vector<double>*> demand_;
  std::vector<double> nse_penalty_;
  std::vector<int> chronology_;
  std::vector<int> representative_;
};

// Throws ValidationError listing every violation.
ValidatedSystem ValidateSystem(SystemSpec spec);

enum class VarKind {
  kCapacity,
  kStorageStart,
  kStorageDelta,
  kStorageChrono,
  kGeneration,
  kCharge,
  kDischarge,
  kStateOfCharge,
  kTransport,
  kExport,
  kNonServed,
  kCurtailment,
};

struct VariableInfo {
  VarKind kind;
  std::string id;
  int zone;
  int sector;
  int hour;  // hour, subperiod or period index depending on kind; -1 if none
  std::string label;
};

// Every variable of the full monolithic model, ordered by
// (kind, id, zone, sector, hour, label).
std::vector<VariableInfo> EnumerateVariables(const ValidatedSystem& system);

struct LabeledTerm {
  std::string var;
  double coef;
};

struct BalanceRow {
  std::string label;
  std::vector<LabeledTerm> terms;
  double rhs;
};

// Energy balance of vector v in zone z, sector s, hour t.
BalanceRow AssembleBalance(const ValidatedSystem& system, int v, int z, int s,
                           int t);

namespace labels {

std::string Cap(std::string_view id);
std::string StorageStart(std::string_view id, std::string_view w);
std::string StorageDelta(std::string_view id, std::string_view w);
std::string StorageChrono(std::string_view id, int period);
std::string Gen(std::string_view id, int t);
std::string Charge(std::string_view id, int t);
std::string Discharge(std::string_view id, int t);
std::string Soc(std::string_view id, int t);
std::string Transport(std::string_view id, bool forward, int t);
std::string Export(std::string_view id, bool forward, int t);
std::string Nse(std::string_view v, std::string_view z, std::string_view s,
                int t);
std::string Curtail(std::string_view v, std::string_view z, std::string_view s,
                    int t);
std::string Balance(std::string_view v, std::string_view z, std::string_view s,
                    int t);

}  // namespace labels

}  // namespace capex

#endif  // CAPEX_MODEL_H_
