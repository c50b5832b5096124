#!/usr/bin/env python3
# Copyright 2026 The capex Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the shipped case directories under data/cases."""

import argparse
import math
import pathlib

H = 24

TECH_COLUMNS = [
    "id", "kind", "zone", "sector", "output", "input", "investment_cost",
    "variable_cost", "profile", "efficiency", "charge_efficiency",
    "discharge_efficiency", "power_ratio", "long_duration", "emission_rate",
    "capacity_min", "capacity_max",
]
LINK_COLUMNS = [
    "id", "type", "vector", "zone", "sector", "from", "to", "investment_cost",
    "variable_cost", "capacity_min", "capacity_max", "bidirectional",
]


def fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(round(v, 6))
    return str(v)


def tech(**kw):
    row = {c: "" for c in TECH_COLUMNS}
    row.update(long_duration=False)
    row.update(kw)
    return row


def link(**kw):
    row = {c: "" for c in LINK_COLUMNS}
    row.update(kw)
    return row


def write_table(path, columns, rows):
    with open(path, "w") as f:
        f.write(",".join(columns) + "\n")
        for r in rows:
            f.write(",".join(fmt(r.get(c, "")) for c in columns) + "\n")


def write_hourly(path, columns):
    names = list(columns)
    n = len(next(iter(columns.values())))
    with open(path, "w") as f:
        f.write(",".join(["hour"] + names) + "\n")
        for h in range(n):
            f.write(",".join([str(h)] + [fmt(float(columns[c][h])) for c in names]) + "\n")


def write_case(root, name, system, techs, links, demand, profiles):
    d = root / name
    d.mkdir(parents=True, exist_ok=True)
    for old in d.glob("*.csv"):
        old.unlink()
    with open(d / "system.txt", "w") as f:
        f.write("name = %s\n" % name)
        for k, v in system.items():
            f.write("%s = %s\n" % (k, v))
    write_table(d / "technologies.csv", TECH_COLUMNS, techs)
    write_table(d / "links.csv", LINK_COLUMNS, links)
    for vector, cols in demand.items():
        write_hourly(d / ("demand_%s.csv" % vector), cols)
    for pname, cols in profiles.items():
        write_hourly(d / ("profile_%s.csv" % pname), cols)


def solar(days, scale):
    out = []
    for d in range(days):
        for h in range(H):
            x = math.sin(math.pi * (h - 6) / 12) if 6 <= h <= 18 else 0.0
            out.append(max(0.0, x) * scale[d % len(scale)])
    return out


def daily_load(days, base, swing):
    return [base + swing * math.sin(2 * math.pi * (h - 9) / 24)
            for _ in range(days) for h in range(H)]


def toy_1z_1s(root):
    days = 2
    system = {
        "zones": "z1", "sectors": "elec", "vectors": "elec",
        "subperiods": "w1,w2", "hours_per_subperiod": H,
    }
    techs = [
        tech(id="solar", kind="generation", zone="z1", sector="elec",
             output="elec", investment_cost=30.0, variable_cost=0.0,
             profile="solar", capacity_max=400.0),
        tech(id="gas", kind="generation", zone="z1", sector="elec",
             output="elec", investment_cost=25.0, variable_cost=40.0,
             emission_rate=0.4),
        tech(id="battery", kind="storage", zone="z1", sector="elec",
             output="elec", investment_cost=4.0, variable_cost=0.5,
             charge_efficiency=0.95, discharge_efficiency=0.95,
             power_ratio=0.25),
    ]
    demand = {"elec": {"z1.elec": daily_load(days, 100.0, 20.0)}}
    profiles = {"solar": {"z1": solar(days, [1.0, 0.55])}}
    write_case(root, "toy-1z-1s", system, techs, [], demand, profiles)


def toy_2z_2s(root):
    days = 3
    zones = ["z1", "z2"]
    system = {
        "zones": "z1,z2", "sectors": "elec,h2", "vectors": "elec,h2",
        "subperiods": "w1,w2,w3", "hours_per_subperiod": H,
        "emission_cap": 9000.0,
    }
    techs = []
    for i, z in enumerate(zones):
        techs += [
            tech(id="solar_" + z, kind="generation", zone=z, sector="elec",
                 output="elec", investment_cost=40.0, profile="solar",
                 capacity_max=60.0 + 20.0 * i),
            tech(id="nuclear_" + z, kind="generation", zone=z, sector="elec",
                 output="elec", investment_cost=700.0, variable_cost=5.0,
                 capacity_max=30.0),
            tech(id="gas_" + z, kind="generation", zone=z, sector="elec",
                 output="elec", investment_cost=0.0, variable_cost=50.0,
                 emission_rate=0.45, capacity_min=250.0, capacity_max=250.0),
            tech(id="electrolyzer_" + z, kind="conversion", zone=z,
                 sector="elec", output="h2", input="elec",
                 investment_cost=60.0, efficiency=0.7),
        ]
    links = [
        link(id="line_12", type="transmission", vector="elec", sector="elec",
             **{"from": "z1", "to": "z2"}, investment_cost=20.0,
             variable_cost=0.0, capacity_max=100.0),
    ]
    for z in zones:
        links.append(link(id="p2g_" + z, type="coupling", vector="h2", zone=z,
                          **{"from": "elec", "to": "h2"}, bidirectional=False))
    demand = {
        "elec": {z + ".elec": daily_load(days, 120.0 + 30 * i, 25.0)
                 for i, z in enumerate(zones)},
        "h2": {z + ".h2": [10.0 + 5 * i] * (days * H)
               for i, z in enumerate(zones)},
    }
    profiles = {"solar": {z: solar(days, [1.0, 0.7, 0.4]) for z in zones}}
    write_case(root, "toy-2z-2s", system, techs, links, demand, profiles)


def storage_stress(root):
    days = 4
    d = 10.0
    step = [1.0 if 6 <= h < 18 else 0.0 for h in range(H)] * days
    system = {
        "zones": "z1", "sectors": "elec,h2", "vectors": "elec,h2",
        "subperiods": "w1,w2,w3,w4", "hours_per_subperiod": H,
    }
    techs = [
        tech(id="solar", kind="generation", zone="z1", sector="elec",
             output="elec", investment_cost=2000.0, profile="step"),
        tech(id="gas", kind="generation", zone="z1", sector="elec",
             output="elec", investment_cost=0.0, variable_cost=150.0,
             capacity_min=200.0, capacity_max=200.0),
        tech(id="electrolyzer", kind="conversion", zone="z1", sector="elec",
             output="h2", input="elec", investment_cost=50.0, efficiency=0.7,
             capacity_min=2 * d, capacity_max=2 * d),
        tech(id="h2_tank", kind="storage", zone="z1", sector="h2",
             output="h2", investment_cost=0.001, power_ratio=1.0,
             capacity_max=140.0),
    ]
    links = [link(id="p2g", type="coupling", vector="h2", zone="z1",
                  **{"from": "elec", "to": "h2"}, bidirectional=False)]
    demand = {"elec": {"z1.elec": [100.0] * (days * H)},
              "h2": {"z1.h2": [d] * (days * H)}}
    profiles = {"step": {"z1": step}}
    write_case(root, "storage-stress", system, techs, links, demand, profiles)


def ring_4z(root):
    days = 3
    zones = ["za", "zb", "zc", "zd"]
    system = {
        "zones": ",".join(zones), "sectors": "elec", "vectors": "elec",
        "subperiods": "w1,w2,w3", "hours_per_subperiod": H,
    }
    wind = []
    for h in range(days * H):
        wind.append(0.5 + 0.45 * math.sin(2 * math.pi * h / 17.0 + 0.3)
                    * math.cos(2 * math.pi * h / 41.0))
    techs = [tech(id="wind_za", kind="generation", zone="za", sector="elec",
                  output="elec", investment_cost=1500.0, profile="wind",
                  capacity_max=500.0)]
    for i, z in enumerate(zones[1:]):
        techs.append(tech(id="gas_" + z, kind="generation", zone=z,
                          sector="elec", output="elec", investment_cost=0.0,
                          variable_cost=60.0, emission_rate=0.4,
                          capacity_min=250.0, capacity_max=250.0))
    links = []
    for a, b in zip(zones, zones[1:] + zones[:1]):
        cap = 75.0 if "za" in (a, b) else 150.0
        links.append(link(id="line_%s_%s" % (a[1], b[1]), type="transmission",
                          vector="elec", sector="elec", **{"from": a, "to": b},
                          investment_cost=0.0, variable_cost=0.0,
                          capacity_min=cap, capacity_max=cap))
    demand = {"elec": {z + ".elec": [50.0] * (days * H) for z in zones}}
    profiles = {"wind": {"za": wind}}
    write_case(root, "ring-4z", system, techs, links, demand, profiles)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(
        pathlib.Path(__file__).resolve().parent.parent / "data" / "cases"))
    args = parser.parse_args()
    root = pathlib.Path(args.out)
    for make in (toy_1z_1s, toy_2z_2s, storage_stress, ring_4z):
        make(root)


if __name__ == "__main__":
    main()
