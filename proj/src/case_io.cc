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

#include "capex/case_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "capex/common.h"

namespace capex {
namespace {

std::string Trim(std::string_view s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> Split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(Trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string Where(const fs::path& file, int line) {
  return file.filename().string() + ":" + std::to_string(line);
}

[[noreturn]] void Schema(const std::string& message) {
  throw Error(ErrorCode::kSchemaViolation, message);
}

double ParseNumber(const std::string& cell, const std::string& where) {
  if (cell == "inf") return kInf;
  if (cell == "-inf") return -kInf;
  double value = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || std::isnan(value)) {
    throw Error(ErrorCode::kParseError,
                where + ": expected a number, got '" + cell + "'");
  }
  return value;
}

int ParseInt(const std::string& cell, const std::string& where) {
  int value = 0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kParseError,
                where + ": expected an integer, got '" + cell + "'");
  }
  return value;
}

bool ParseBool(const std::string& cell, const std::string& where) {
  if (cell == "true" || cell == "1") return true;
  if (cell == "false" || cell == "0" || cell.empty()) return false;
  throw Error(ErrorCode::kParseError,
              where + ": expected true or false, got '" + cell + "'");
}

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

// Comma-separated table with a header row.
struct Table {
  fs::path file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines;

  int Column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    Schema(file.filename().string() + ": missing column '" + name + "'");
  }
  std::string Cell(size_t row, int col) const {
    return file.filename().string() + ":" + std::to_string(lines[row]) +
           " column '" + header[col] + "'";
  }
};

std::ifstream OpenIn(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + file.string());
  return in;
}

std::ofstream OpenOut(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  return out;
}

Table ReadTable(const fs::path& file) {
  std::ifstream in = OpenIn(file);
  Table t;
  t.file = file;
  std::string line;
  int n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::vector<std::string> cells = Split(trimmed, ',');
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      std::set<std::string> seen;
      for (const std::string& h : t.header) {
        if (!seen.insert(h).second) {
          Schema(Where(file, n) + ": duplicate column '" + h + "'");
        }
      }
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::kParseError,
                  Where(file, n) + ": expected " +
                      std::to_string(t.header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(n);
  }
  if (!have_header) Schema(file.filename().string() + ": empty file");
  return t;
}

void RequireColumns(const Table& t, const std::vector<std::string>& expected) {
  std::set<std::string> want(expected.begin(), expected.end());
  for (const std::string& h : t.header) {
    if (!want.count(h)) {
      Schema(t.file.filename().string() + ": unknown column '" + h + "'");
    }
  }
  for (const std::string& e : expected) t.Column(e);
}

const std::vector<std::string> kTechColumns = {
    "id",          "kind",         "zone",
    "sector",      "output",       "input",
    "investment_cost", "variable_cost", "profile",
    "efficiency",  "charge_efficiency", "discharge_efficiency",
    "power_ratio", "long_duration", "emission_rate",
    "capacity_min", "capacity_max"};

const std::vector<std::string> kLinkColumns = {
    "id",   "type", "vector",          "zone",          "sector",
    "from", "to",   "investment_cost", "variable_cost", "capacity_min",
    "capacity_max", "bidirectional"};

TechKind ParseKind(const std::string& s, const std::string& where) {
  if (s == "generation") return TechKind::kGeneration;
  if (s == "storage") return TechKind::kStorage;
  if (s == "conversion") return TechKind::kConversion;
  Schema(where + ": unknown technology kind '" + s + "'");
}

std::vector<double> ParseList(const std::string& value,
                              const std::string& where) {
  std::vector<double> out;
  if (value.empty()) return out;
  for (const std::string& item : Split(value, ',')) {
    out.push_back(ParseNumber(item, where));
  }
  return out;
}

std::vector<int> ParseIntList(const std::string& value,
                              const std::string& where) {
  std::vector<int> out;
  if (value.empty()) return out;
  for (const std::string& item : Split(value, ',')) {
    out.push_back(ParseInt(item, where));
  }
  return out;
}

void ReadSystemFile(const fs::path& file, SystemSpec& spec) {
  std::ifstream in = OpenIn(file);
  std::string line;
  int n = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++n;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  Where(file, n) + ": expected 'key = value'");
    }
    const std::string key = Trim(trimmed.substr(0, eq));
    const std::string value = Trim(trimmed.substr(eq + 1));
    const std::string where = Where(file, n);
    if (!seen.insert(key).second) {
      Schema(where + ": key '" + key + "' given twice");
    }
    auto names = [&] {
      return value.empty() ? std::vector<std::string>{} : Split(value, ',');
    };
    if (key == "name") {
      spec.name = value;
    } else if (key == "zones") {
      spec.sets.zones = names();
    } else if (key == "sectors") {
      spec.sets.sectors = names();
    } else if (key == "vectors") {
      spec.sets.vectors = names();
    } else if (key == "subperiods") {
      spec.sets.subperiods = names();
    } else if (key == "hours_per_subperiod") {
      spec.sets.hours_per_subperiod = ParseInt(value, where);
    } else if (key == "emission_cap") {
      spec.emission_cap = ParseNumber(value, where);
    } else if (key == "nse_penalty") {
      spec.default_nse_penalty = ParseNumber(value, where);
    } else if (key.rfind("nse_penalty.", 0) == 0) {
      const std::vector<std::string> parts = Split(key, '.');
      if (parts.size() != 3) {
        throw Error(ErrorCode::kUnknownKey,
                    where + ": expected nse_penalty.<vector>.<sector>");
      }
      spec.nse_penalties.push_back(
          {parts[1], parts[2], ParseNumber(value, where)});
    } else if (key == "subperiod_weights") {
      spec.subperiod_weights = ParseList(value, where);
    } else if (key == "chronology") {
      spec.chronology = ParseIntList(value, where);
    } else if (key == "representative_period") {
      spec.representative_period = ParseIntList(value, where);
    } else if (key == "power_unit" || key == "energy_unit" ||
               key == "emission_unit") {
      const std::string want = key == "power_unit"    ? "MW"
                               : key == "energy_unit" ? "MWh"
                                                      : "t";
      if (value != want) {
        Schema(where + ": " + key + " must be " + want + ", got '" + value +
               "'");
      }
    } else {
      throw Error(ErrorCode::kUnknownKey,
                  where + ": unknown key '" + key + "'");
    }
  }
  for (const char* required : {"zones", "sectors", "vectors", "subperiods",
                               "hours_per_subperiod"}) {
    if (!seen.count(required)) {
      Schema(file.filename().string() + ": missing key '" + required + "'");
    }
  }
}

void ReadTechnologies(const fs::path& file, SystemSpec& spec) {
  const Table t = ReadTable(file);
  RequireColumns(t, kTechColumns);
  for (size_t r = 0; r < t.rows.size(); ++r) {
    auto get = [&](const char* name) { return t.rows[r][t.Column(name)]; };
    auto num = [&](const char* name, double fallback) {
      const std::string cell = get(name);
      return cell.empty() ? fallback : ParseNumber(cell, t.Cell(r, t.Column(name)));
    };
    TechnologySpec tech;
    tech.id = get("id");
    tech.kind = ParseKind(get("kind"), t.Cell(r, t.Column("kind")));
    tech.zone = get("zone");
    tech.sector = get("sector");
    tech.output = get("output");
    tech.input = get("input");
    tech.investment_cost = num("investment_cost", 0.0);
    tech.variable_cost = num("variable_cost", 0.0);
    tech.profile = get("profile");
    tech.efficiency = num("efficiency", 1.0);
    tech.charge_efficiency = num("charge_efficiency", 1.0);
    tech.discharge_efficiency = num("discharge_efficiency", 1.0);
    tech.power_ratio = num("power_ratio", 1.0);
    tech.long_duration = ParseBool(get("long_duration"),
                                   t.Cell(r, t.Column("long_duration")));
    tech.emission_rate = num("emission_rate", 0.0);
    tech.capacity_min = num("capacity_min", 0.0);
    tech.capacity_max = num("capacity_max", kInf);
    if (tech.id.empty()) Schema(t.Cell(r, t.Column("id")) + ": empty id");
    spec.technologies.push_back(std::move(tech));
  }
}

void ReadLinks(const fs::path& file, SystemSpec& spec) {
  const Table t = ReadTable(file);
  RequireColumns(t, kLinkColumns);
  for (size_t r = 0; r < t.rows.size(); ++r) {
    auto get = [&](const char* name) { return t.rows[r][t.Column(name)]; };
    auto num = [&](const char* name, double fallback) {
      const std::string cell = get(name);
      return cell.empty() ? fallback : ParseNumber(cell, t.Cell(r, t.Column(name)));
    };
    const std::string type = get("type");
    if (type == "transmission") {
      if (!get("zone").empty() || !get("bidirectional").empty()) {
        Schema(t.Cell(r, t.Column("zone")) +
               ": transmission links take no zone or bidirectional flag");
      }
      TransmissionLink link;
      link.id = get("id");
      link.vector = get("vector");
      link.sector = get("sector");
      link.from_zone = get("from");
      link.to_zone = get("to");
      link.investment_cost = num("investment_cost", 0.0);
      link.variable_cost = num("variable_cost", 0.0);
      link.capacity_min = num("capacity_min", 0.0);
      link.capacity_max = num("capacity_max", kInf);
      spec.transmission.push_back(std::move(link));
    } else if (type == "coupling") {
      for (const char* unused : {"sector", "investment_cost", "variable_cost",
                                 "capacity_min", "capacity_max"}) {
        if (!get(unused).empty()) {
          Schema(t.Cell(r, t.Column(unused)) +
                 ": coupling links leave this column empty");
        }
      }
      CouplingLink link;
      link.id = get("id");
      link.vector = get("vector");
      link.zone = get("zone");
      link.from_sector = get("from");
      link.to_sector = get("to");
      link.bidirectional = ParseBool(get("bidirectional"),
                                     t.Cell(r, t.Column("bidirectional")));
      spec.couplings.push_back(std::move(link));
    } else {
      Schema(t.Cell(r, t.Column("type")) + ": unknown link type '" + type +
             "'");
    }
  }
}

// Hourly table: an `hour` column numbered from 0, then one column per key.
std::vector<std::pair<std::string, std::vector<double>>> ReadHourly(
    const fs::path& file, int hours) {
  const Table t = ReadTable(file);
  if (t.header.empty() || t.header[0] != "hour") {
    Schema(file.filename().string() + ": first column must be 'hour'");
  }
  if (static_cast<int>(t.rows.size()) != hours) {
    Schema(file.filename().string() + ": " + std::to_string(t.rows.size()) +
           " hours, expected " + std::to_string(hours));
  }
  std::vector<std::pair<std::string, std::vector<double>>> out;
  for (size_t c = 1; c < t.header.size(); ++c) {
    out.push_back({t.header[c], std::vector<double>(hours)});
  }
  for (size_t r = 0; r < t.rows.size(); ++r) {
    if (ParseInt(t.rows[r][0], t.Cell(r, 0)) != static_cast<int>(r)) {
      Schema(t.Cell(r, 0) + ": hours must count up from 0");
    }
    for (size_t c = 1; c < t.header.size(); ++c) {
      out[c - 1].second[r] = ParseNumber(t.rows[r][c], t.Cell(r, c));
    }
  }
  return out;
}

std::vector<fs::path> SortedMatches(const fs::path& dir,
                                    const std::string& prefix) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Stem(const fs::path& file, const std::string& prefix) {
  return file.stem().string().substr(prefix.size());
}

int SpecHours(const SystemSpec& spec) {
  return static_cast<int>(spec.sets.subperiods.size()) *
         spec.sets.hours_per_subperiod;
}

std::string SubperiodOfBlock(const std::string& block) {
  return block.substr(0, block.find(','));
}

}  // namespace

SystemSpec LoadCase(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "no case directory at " + dir.string());
  }
  SystemSpec spec;
  ReadSystemFile(dir / "system.txt", spec);
  ReadTechnologies(dir / "technologies.csv", spec);
  if (fs::exists(dir / "links.csv")) ReadLinks(dir / "links.csv", spec);
  const int hours = SpecHours(spec);

  std::set<std::string> vectors(spec.sets.vectors.begin(),
                                spec.sets.vectors.end());
  std::map<std::string, fs::path> demand_files;
  for (const fs::path& f : SortedMatches(dir, "demand_")) {
    const std::string vector = Stem(f, "demand_");
    if (!vectors.count(vector)) {
      Schema(f.filename().string() + ": unknown vector '" + vector + "'");
    }
    demand_files[vector] = f;
  }
  for (const std::string& vector : spec.sets.vectors) {
    auto it = demand_files.find(vector);
    if (it == demand_files.end()) continue;
    for (auto& [column, values] : ReadHourly(it->second, hours)) {
      const std::vector<std::string> parts = Split(column, '.');
      if (parts.size() != 2) {
        Schema(it->second.filename().string() + ": column '" + column +
               "' is not <zone>.<sector>");
      }
      spec.demand.push_back({vector, parts[0], parts[1], std::move(values)});
    }
  }
  for (const fs::path& f : SortedMatches(dir, "profile_")) {
    const std::string name = Stem(f, "profile_");
    for (auto& [zone, values] : ReadHourly(f, hours)) {
      spec.profiles.push_back({name, zone, std::move(values)});
    }
  }
  if (fs::exists(dir / "partition.csv")) {
    spec = ApplyWeights(
        spec, ReadPartition(dir / "partition.csv", spec.sets.hours_per_subperiod));
  }
  return spec;
}

void WriteCase(const SystemSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out = OpenOut(dir / "system.txt");
    out << "name = " << spec.name << "\n"
        << "zones = " << Join(spec.sets.zones) << "\n"
        << "sectors = " << Join(spec.sets.sectors) << "\n"
        << "vectors = " << Join(spec.sets.vectors) << "\n"
        << "subperiods = " << Join(spec.sets.subperiods) << "\n"
        << "hours_per_subperiod = " << spec.sets.hours_per_subperiod << "\n"
        << "emission_cap = " << Num(spec.emission_cap) << "\n"
        << "nse_penalty = " << Num(spec.default_nse_penalty) << "\n";
    for (const NsePenalty& p : spec.nse_penalties) {
      out << "nse_penalty." << p.vector << "." << p.sector << " = "
          << Num(p.value) << "\n";
    }
    auto list = [&](const char* key, const auto& values) {
      if (values.empty()) return;
      std::vector<std::string> items;
      for (auto v : values) {
        if constexpr (std::is_same_v<decltype(v), double>) {
          items.push_back(Num(v));
        } else {
          items.push_back(std::to_string(v));
        }
      }
      out << key << " = " << Join(items) << "\n";
    };
    list("subperiod_weights", spec.subperiod_weights);
    list("chronology", spec.chronology);
    list("representative_period", spec.representative_period);
  }
  {
    std::ofstream out = OpenOut(dir / "technologies.csv");
    out << Join(kTechColumns) << "\n";
    for (const TechnologySpec& t : spec.technologies) {
      out << Join({t.id, std::string(TechKindName(t.kind)), t.zone, t.sector,
                   t.output, t.input, Num(t.investment_cost),
                   Num(t.variable_cost), t.profile, Num(t.efficiency),
                   Num(t.charge_efficiency), Num(t.discharge_efficiency),
                   Num(t.power_ratio), t.long_duration ? "true" : "false",
                   Num(t.emission_rate), Num(t.capacity_min),
                   Num(t.capacity_max)})
          << "\n";
    }
  }
  {
    std::ofstream out = OpenOut(dir / "links.csv");
    out << Join(kLinkColumns) << "\n";
    for (const TransmissionLink& l : spec.transmission) {
      out << Join({l.id, "transmission", l.vector, "", l.sector, l.from_zone,
                   l.to_zone, Num(l.investment_cost), Num(l.variable_cost),
                   Num(l.capacity_min), Num(l.capacity_max), ""})
          << "\n";
    }
    for (const CouplingLink& l : spec.couplings) {
      out << Join({l.id, "coupling", l.vector, l.zone, "", l.from_sector,
                   l.to_sector, "", "", "", "",
                   l.bidirectional ? "true" : "false"})
          << "\n";
    }
  }
  const int hours = SpecHours(spec);
  auto write_hourly = [&](const fs::path& file,
                          const std::vector<std::string>& columns,
                          const std::vector<const std::vector<double>*>& data) {
    std::ofstream out = OpenOut(file);
    out << "hour";
    for (const std::string& c : columns) out << "," << c;
    out << "\n";
    for (int h = 0; h < hours; ++h) {
      out << h;
      for (const auto* values : data) out << "," << Num(values->at(h));
      out << "\n";
    }
  };
  for (const std::string& vector : spec.sets.vectors) {
    std::vector<std::string> columns;
    std::vector<const std::vector<double>*> data;
    for (const DemandSeries& d : spec.demand) {
      if (d.vector != vector) continue;
      columns.push_back(d.zone + "." + d.sector);
      data.push_back(&d.values);
    }
    if (!columns.empty()) {
      write_hourly(dir / ("demand_" + vector + ".csv"), columns, data);
    }
  }
  std::vector<std::string> profile_names;
  for (const AvailabilityProfile& p : spec.profiles) {
    if (std::find(profile_names.begin(), profile_names.end(), p.name) ==
        profile_names.end()) {
      profile_names.push_back(p.name);
    }
  }
  for (const std::string& name : profile_names) {
    std::vector<std::string> columns;
    std::vector<const std::vector<double>*> data;
    for (const AvailabilityProfile& p : spec.profiles) {
      if (p.name != name) continue;
      columns.push_back(p.zone);
      data.push_back(&p.values);
    }
    write_hourly(dir / ("profile_" + name + ".csv"), columns, data);
  }
}

Partition ReadPartition(const fs::path& file, int period_length) {
  const Table t = ReadTable(file);
  RequireColumns(t, {"period", "cluster", "representative", "weight"});
  Partition p;
  p.period_length = period_length;
  const int pc = t.Column("period"), cc = t.Column("cluster"),
            rc = t.Column("representative"), wc = t.Column("weight");
  int clusters = 0;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    if (ParseInt(t.rows[r][pc], t.Cell(r, pc)) != static_cast<int>(r)) {
      Schema(t.Cell(r, pc) + ": periods must count up from 0");
    }
    const int c = ParseInt(t.rows[r][cc], t.Cell(r, cc));
    if (c < 0) Schema(t.Cell(r, cc) + ": negative cluster");
    p.assignment.push_back(c);
    clusters = std::max(clusters, c + 1);
  }
  p.representatives.assign(clusters, -1);
  p.weights.assign(clusters, std::numeric_limits<double>::quiet_NaN());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const int c = p.assignment[r];
    const double w = ParseNumber(t.rows[r][wc], t.Cell(r, wc));
    if (!std::isnan(p.weights[c]) && p.weights[c] != w) {
      Schema(t.Cell(r, wc) + ": weight differs within cluster");
    }
    p.weights[c] = w;
    if (ParseBool(t.rows[r][rc], t.Cell(r, rc))) {
      if (p.representatives[c] >= 0) {
        Schema(t.Cell(r, rc) + ": second representative for cluster");
      }
      p.representatives[c] = static_cast<int>(r);
    }
  }
  for (int c = 0; c < clusters; ++c) {
    if (p.representatives[c] < 0) {
      Schema(file.filename().string() + ": cluster " + std::to_string(c) +
             " has no representative");
    }
  }
  return p;
}

void WritePartition(const Partition& partition, const fs::path& file) {
  std::ofstream out = OpenOut(file);
  out << "period,cluster,representative,weight\n";
  for (size_t r = 0; r < partition.assignment.size(); ++r) {
    const int c = partition.assignment[r];
    out << r << "," << c << ","
        << (partition.representatives.at(c) == static_cast<int>(r) ? 1 : 0)
        << "," << Num(partition.weights.at(c)) << "\n";
  }
}

void WriteResults(const SolveReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  auto values = [&](const char* name,
                    const std::map<std::string, double>& m) {
    std::ofstream out = OpenOut(dir / name);
    out << "label,value\n";
    for (const auto& [label, v] : m) out << label << "," << Num(v) << "\n";
  };
  values("capacities.csv", report.capacities);
  values("final_capacities.csv", report.final_capacities);
  values("complicating.csv", report.complicating);
  {
    std::ofstream out = OpenOut(dir / "bounds_trace.csv");
    out << "stage,k,lb,ub,gap,cuts_added,cuts_pruned,pool_size,wall_ms\n";
    for (const IterationRecord& r : report.trace) {
      out << r.stage << "," << r.k << "," << Num(r.lb) << "," << Num(r.ub)
          << "," << Num(r.gap) << "," << r.cuts_added << "," << r.cuts_pruned
          << "," << r.pool_size << "," << Num(r.wall_ms) << "\n";
    }
  }
  {
    std::ofstream out = OpenOut(dir / "emissions.csv");
    out << "block,realized,budget\n";
    for (const BlockEmission& e : report.emissions) {
      out << "\"" << e.block << "\"," << Num(e.realized) << ","
          << Num(e.budget) << "\n";
    }
  }
  std::map<std::string, std::vector<const DispatchRecord*>> by_subperiod;
  for (const DispatchRecord& d : report.dispatch) {
    by_subperiod[SubperiodOfBlock(d.block)].push_back(&d);
  }
  for (const auto& [w, records] : by_subperiod) {
    std::ofstream out = OpenOut(dir / ("dispatch_" + w + ".csv"));
    out << "block;label;value\n";
    for (const DispatchRecord* d : records) {
      out << d->block << ";" << d->label << ";" << Num(d->value) << "\n";
    }
  }
  {
    std::ofstream out = OpenOut(dir / "report.txt");
    out << "algorithm = " << AlgorithmName(report.algorithm) << "\n"
        << "converged = " << (report.converged ? "true" : "false") << "\n"
        << "objective = " << Num(report.objective) << "\n"
        << "lower_bound = " << Num(report.lower_bound) << "\n"
        << "gap = " << Num(report.gap) << "\n"
        << "iterations = " << report.iterations << "\n"
        << "seconds = " << Num(report.seconds) << "\n";
    int stage = 0;
    for (const IterationRecord& r : report.trace) {
      if (r.stage != stage) {
        stage = r.stage;
        out << "[stage " << stage << "]\n";
      }
      out << "k=" << r.k << " lb=" << Num(r.lb) << " ub=" << Num(r.ub)
          << " gap=" << Num(r.gap) << " cuts_added=" << r.cuts_added
          << " cuts_pruned=" << r.cuts_pruned << " wall_ms=" << Num(r.wall_ms)
          << "\n";
    }
    out << "[capacities]\n";
    for (const auto& [label, v] : report.capacities) {
      out << label << " = " << Num(v) << "\n";
    }
  }
}

std::map<std::string, double> ReadValues(const fs::path& file) {
  // Labels contain commas, so the value is whatever follows the last one.
  std::ifstream in = OpenIn(file);
  std::map<std::string, double> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (++n == 1) {
      if (Trim(line) != "label,value") {
        Schema(Where(file, n) + ": expected header label,value");
      }
      continue;
    }
    if (Trim(line).empty()) continue;
    const size_t comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kParseError, Where(file, n) + ": no value");
    }
    out[line.substr(0, comma)] =
        ParseNumber(Trim(line.substr(comma + 1)), Where(file, n));
  }
  return out;
}

std::vector<IterationRecord> ReadBoundsTrace(const fs::path& file) {
  const Table t = ReadTable(file);
  RequireColumns(t, {"stage", "k", "lb", "ub", "gap", "cuts_added",
                     "cuts_pruned", "pool_size", "wall_ms"});
  std::vector<IterationRecord> out;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    auto num = [&](const char* c) {
      return ParseNumber(t.rows[r][t.Column(c)], t.Cell(r, t.Column(c)));
    };
    auto integer = [&](const char* c) {
      return ParseInt(t.rows[r][t.Column(c)], t.Cell(r, t.Column(c)));
    };
    out.push_back({integer("stage"), integer("k"), num("lb"), num("ub"),
                   num("gap"), integer("cuts_added"), integer("cuts_pruned"),
                   integer("pool_size"), num("wall_ms")});
  }
  return out;
}

std::vector<DispatchRecord> ReadDispatch(const fs::path& file) {
  std::ifstream in = OpenIn(file);
  std::vector<DispatchRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (++n == 1 || Trim(line).empty()) continue;
    const std::vector<std::string> cells = Split(line, ';');
    if (cells.size() != 3) {
      throw Error(ErrorCode::kParseError,
                  Where(file, n) + ": expected block;label;value");
    }
    out.push_back({cells[0], cells[1], ParseNumber(cells[2], Where(file, n))});
  }
  return out;
}

std::map<std::string, std::string> CapacityGroups(const SystemSpec& spec) {
  std::map<std::string, std::string> out;
  for (const TechnologySpec& t : spec.technologies) {
    out[labels::Cap(t.id)] = std::string(TechKindName(t.kind)) + ":" + t.output;
  }
  for (const TransmissionLink& l : spec.transmission) {
    out[labels::Cap(l.id)] = "transmission:" + l.vector;
  }
  return out;
}

std::vector<BenchmarkRow> BuildBenchmark(
    const std::vector<BenchmarkEntry>& entries) {
  using Config = std::pair<std::string, int>;
  std::map<Config, double> fastest;
  std::map<Config, const BenchmarkEntry*> reference;
  for (const BenchmarkEntry& e : entries) {
    const Config key{e.case_name, e.weeks};
    auto it = fastest.find(key);
    if (it == fastest.end() || e.report.seconds < it->second) {
      fastest[key] = e.report.seconds;
    }
    if (e.report.algorithm == Algorithm::kMonolithic) reference[key] = &e;
  }
  auto totals = [](const BenchmarkEntry& e) {
    std::map<std::string, double> sums;
    if (e.spec == nullptr) return sums;
    const auto groups = CapacityGroups(*e.spec);
    for (const auto& [label, v] : e.report.capacities) {
      auto g = groups.find(label);
      if (g != groups.end()) sums[g->second] += v;
    }
    return sums;
  };
  std::vector<BenchmarkRow> rows;
  for (const BenchmarkEntry& e : entries) {
    const Config key{e.case_name, e.weeks};
    BenchmarkRow row;
    row.case_name = e.case_name;
    row.weeks = e.weeks;
    row.algorithm = std::string(AlgorithmName(e.report.algorithm));
    row.converged = e.report.converged;
    row.seconds = e.report.seconds;
    row.iterations = e.report.iterations;
    row.seconds_per_iteration =
        e.report.iterations > 0 ? e.report.seconds / e.report.iterations : 0.0;
    row.gap = e.report.gap;
    row.objective = e.report.objective;
    row.fastest = e.report.seconds == fastest[key];
    auto ref = reference.find(key);
    if (ref != reference.end() && e.spec != nullptr) {
      const auto mono = totals(*ref->second);
      for (const auto& [group, v] : totals(e)) {
        auto m = mono.find(group);
        if (m != mono.end() && m->second != 0.0) {
          row.capacity_errors[group] = (v - m->second) / m->second;
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void EmitBenchmark(const std::vector<BenchmarkRow>& rows, const fs::path& dir) {
  fs::create_directories(dir);
  std::set<std::string> groups;
  for (const BenchmarkRow& r : rows) {
    for (const auto& [g, v] : r.capacity_errors) groups.insert(g);
  }
  {
    std::ofstream out = OpenOut(dir / "benchmark.csv");
    out << "case,weeks,algorithm,converged,seconds,iterations,"
           "seconds_per_iteration,gap,objective,fastest";
    for (const std::string& g : groups) out << ",err:" << g;
    out << "\n";
    for (const BenchmarkRow& r : rows) {
      out << r.case_name << "," << r.weeks << "," << r.algorithm << ","
          << (r.converged ? "true" : "false") << "," << Num(r.seconds) << ","
          << r.iterations << "," << Num(r.seconds_per_iteration) << ","
          << Num(r.gap) << "," << Num(r.objective) << ","
          << (r.fastest ? "true" : "false");
      for (const std::string& g : groups) {
        auto it = r.capacity_errors.find(g);
        out << "," << (it == r.capacity_errors.end() ? "" : Num(it->second));
      }
      out << "\n";
    }
  }
  std::ofstream out = OpenOut(dir / "benchmark.md");
  out << "| case | weeks | algorithm | runtime (s) | iterations | s/iter "
         "| gap | objective |\n"
      << "|---|---|---|---|---|---|---|---|\n";
  char buf[256];
  for (const BenchmarkRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.3f", r.seconds);
    std::string runtime = r.fastest ? "**" + std::string(buf) + "**" : buf;
    out << "| " << r.case_name << " | " << r.weeks << " | " << r.algorithm
        << (r.converged ? "" : " (not converged)") << " | " << runtime
        << " | " << r.iterations << " | ";
    std::snprintf(buf, sizeof(buf), "%.4f | %.2e | %.6g |",
                  r.seconds_per_iteration, r.gap, r.objective);
    out << buf << "\n";
  }
  out << "\nBold marks the fastest algorithm per case and week count; equal "
         "runtimes are all bold.\n";
}

}  // namespace capex
