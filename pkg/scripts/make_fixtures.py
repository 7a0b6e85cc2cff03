#!/usr/bin/env python3
"""Regenerate the committed desk-scale fixture CSVs under fixtures/.

The synthetic flows carry a learnable structure: the log-scale target is a
linear blend of a few descriptor columns, a per-title-template effect, a
description effect, and a small location effect, so feature selection and
evaluation have real signal to find. Texts repeat across rows (as process
titles do in real inventories) so their embeddings cluster.
"""

from __future__ import annotations

import csv
import os
import sys

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")

N_ROWS = 120
N_MARKET = 3
MACCS_BITS = 166

MORDRED_COLUMNS = [
    "SpMax_A", "nAromAtom", "nAromBond", "nC", "ATS5dv", "ATS6dv",
    "SpAD_A", "SpAbs_A", "VE3_A", "nAtom", "nBase",
    "MW", "nN", "nO", "nRing", "nHeavyAtom", "TopoPSA", "nRotB", "WPath",
]

TITLE_TEMPLATES = [
    ("oxidation of {name} in 95% solution state", 0.9),
    ("{name} production from maize, from fermentation", -0.3),
    ("{name} production from rye, from fermentation", -0.2),
    ("hydration of {name}, from ethylene", 0.1),
    ("distillation of {name} to 99.7% solution state", 0.5),
    ("chlorination of {name}, industrial grade", 1.4),
    ("{name} synthesis, high temperature operations", 1.1),
    ("dewatering of {name}, from 95% to 99.7% solution state", 0.0),
]

DESCRIPTIONS = [
    ("Continuous process representative of average European technology "
     "with heat integration and partial solvent recovery.", 0.2),
    ("Batch process at industrial scale; electricity from the regional "
     "grid mix, steam from natural gas boilers.", 0.6),
    ("Fermentation-based route using agricultural feedstock; includes "
     "upstream cultivation burdens.", -0.4),
    ("High temperature gas phase reaction with downstream quench and "
     "two-stage purification.", 0.9),
    ("Membrane separation step appended to a conventional route; low "
     "direct emissions, moderate electricity demand.", -0.1),
]

LOCATIONS = [
    ("Global", 0.00), ("Europe", -0.05), ("Rest-of-World", 0.10),
    ("CH", -0.15), ("CN", 0.25), ("US", 0.05), ("DE", -0.10), ("CA", 0.00),
]

COMPOUNDS = [
    "ethanol", "methanol", "acetone", "butanol", "glycerol", "toluene",
    "aniline", "phenol", "styrene", "acetic acid", "formic acid",
    "propylene", "benzene", "xylene", "furfural", "acetaldehyde",
    "cyclohexane", "ethylene glycol", "acrylonitrile", "chlorobenzene",
    "nitrobenzene", "pyridine", "morpholine", "octanol", "butyl acetate",
]

SMILES = [
    "CCO", "CO", "CC(=O)C", "CCCCO", "OCC(O)CO", "Cc1ccccc1",
    "Nc1ccccc1", "Oc1ccccc1", "C=Cc1ccccc1", "CC(=O)O", "OC=O",
    "C=CC", "c1ccccc1", "Cc1ccccc1C", "O=Cc1ccco1", "CC=O",
    "C1CCCCC1", "OCCO", "C=CC#N", "Clc1ccccc1",
    "O=[N+]([O-])c1ccccc1", "c1ccncc1", "C1COCCN1", "CCCCCCCCO", "CCCCOC(C)=O",
]


def main() -> int:
    rng = np.random.default_rng(20240917)
    os.makedirs(FIXTURES, exist_ok=True)

    ids = [f"f{i:03d}" for i in range(1, N_ROWS + 1)]
    compound_idx = rng.integers(0, len(COMPOUNDS), N_ROWS)

    # descriptor tables are keyed by flow id: the same compound in two flows
    # gets the same molecular columns
    per_compound = {}
    for ci in range(len(COMPOUNDS)):
        r = np.random.default_rng(1000 + ci)
        per_compound[ci] = {
            "SpMax_A": round(float(r.uniform(1.5, 2.6)), 4),
            "nAromAtom": int(r.choice([0, 0, 6, 6, 10])),
            "nC": int(r.integers(1, 10)),
            "ATS5dv": round(float(r.uniform(0.0, 40.0)), 4),
            "ATS6dv": round(float(r.uniform(0.0, 30.0)), 4),
            "SpAD_A": round(float(r.uniform(2.0, 12.0)), 4),
            "SpAbs_A": round(float(r.uniform(2.0, 12.0)), 4),
            "VE3_A": round(float(r.uniform(-2.0, 2.0)), 4),
            "nAtom": int(r.integers(4, 30)),
            "nBase": int(r.choice([0, 0, 0, 1])),
            "MW": round(float(r.uniform(30.0, 160.0)), 4),
            "nN": int(r.choice([0, 0, 1])),
            "nO": int(r.integers(0, 4)),
            "nRing": int(r.choice([0, 0, 1, 1])),
            "nHeavyAtom": int(r.integers(2, 12)),
            "TopoPSA": round(float(r.uniform(0.0, 60.0)), 4),
            "nRotB": int(r.integers(0, 6)),
            "WPath": int(r.integers(4, 200)),
        }
        per_compound[ci]["nAromBond"] = per_compound[ci]["nAromAtom"]

    # structural cousins share a fingerprint mask, so key bits alone cannot
    # resolve compound identity and selection must reach for the real-valued
    # descriptors too
    masks = {}
    for mi in range(8):
        r = np.random.default_rng(2000 + mi)
        bits = np.zeros(MACCS_BITS, dtype=int)
        active = r.choice(MACCS_BITS, size=r.integers(8, 18), replace=False)
        bits[active] = 1
        masks[mi] = bits
    maccs_rows = {ci: masks[ci % 8] for ci in range(len(COMPOUNDS))}

    market_rows = set(rng.choice(N_ROWS, size=N_MARKET, replace=False).tolist())

    flows = []
    for i in range(N_ROWS):
        ci = int(compound_idx[i])
        name = COMPOUNDS[ci]
        desc = per_compound[ci]
        t_idx = int(rng.integers(0, len(TITLE_TEMPLATES)))
        d_idx = int(rng.integers(0, len(DESCRIPTIONS)))
        l_idx = int(rng.integers(0, len(LOCATIONS)))
        if i in market_rows:
            title = f"market for {name}, global average"
        else:
            title = TITLE_TEMPLATES[t_idx][0].format(name=name)
        description = (DESCRIPTIONS[d_idx][0]
                       + f" Reference product: {name} at plant gate.")
        log_gwp = (
            0.9 * (desc["SpMax_A"] - 2.0)
            + 0.035 * desc["ATS5dv"]
            - 0.020 * desc["ATS6dv"]
            + 0.090 * desc["SpAD_A"]
            - 0.110 * desc["SpAbs_A"]
            + 0.060 * desc["nC"]
            + 0.020 * desc["nAtom"]
            + 0.010 * desc["TopoPSA"]
            + 0.30 * maccs_rows[ci][17]
            + TITLE_TEMPLATES[t_idx][1]
            + DESCRIPTIONS[d_idx][1]
            + LOCATIONS[l_idx][1]
            + float(rng.normal(0.0, 0.08))
            + 0.6
        )
        location = LOCATIONS[l_idx][0]
        # a few raw locations carry a city suffix to exercise consolidation
        if location in ("CH", "CN", "DE") and rng.random() < 0.5:
            location = location + "-" + {"CH": "Zurich", "CN": "Shanghai",
                                         "DE": "Berlin"}[location]
        flows.append({
            "id": ids[i],
            "chemical_name": name,
            "smiles": SMILES[ci],
            "process_title": title,
            "process_description": description,
            "location": location,
            "gwp": repr(round(float(10.0 ** log_gwp), 6)),
        })

    with open(os.path.join(FIXTURES, "flows.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(flows[0]))
        writer.writeheader()
        writer.writerows(flows)

    with open(os.path.join(FIXTURES, "maccs.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"maccs_{b}" for b in range(1, MACCS_BITS + 1)])
        for i, rid in enumerate(ids):
            writer.writerow([rid] + maccs_rows[int(compound_idx[i])].tolist())

    with open(os.path.join(FIXTURES, "mordred.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + MORDRED_COLUMNS)
        for i, rid in enumerate(ids):
            desc = per_compound[int(compound_idx[i])]
            writer.writerow([rid] + [desc[c] for c in MORDRED_COLUMNS])

    write_ethanol_fixture()
    print(f"wrote fixtures for {N_ROWS} flows under {FIXTURES}")
    return 0


# The eleven ethanol production entries with their published GWP values;
# the inventory lists the same title more than once where process variants
# share a name.
ETHANOL_ROWS = [
    ("ethylene hydration in 99.7% solution state, from ethylene", 1.220179),
    ("synthetic fuel production, from coal, high temperature Fisher-Tropsch "
     "operations in 99.7% solution state, from ethylene", 6.389138),
    ("dewatering of ethanol from biomass, from 95% to 99.7% solution state "
     "in 99.7% solution state, from fermentation", 1.546731),
    ("ethanol production from potatoes in 95% solution state, from "
     "fermentation", 2.325355),
    ("ethanol production from rye in 95% solution state, from fermentation",
     1.490242),
    ("ethanol production from maize in 95% solution state, from fermentation",
     1.261104),
    ("dewatering of ethanol from biomass, from 95% to 99.7% solution state "
     "in 99.7% solution state, from fermentation", 1.304751),
    ("market for ethanol, without water, in 99.7% solution state, from "
     "ethylene in 99.7% solution state, from ethylene", 1.916034),
    ("ethanol production from rye in 95% solution state, from fermentation",
     1.493039),
    ("ethylene hydration in 99.7% solution state, from ethylene", 1.377159),
    ("market for ethanol in 99.7% solution state, from ethylene", 1.245622),
]


def write_ethanol_fixture() -> None:
    with open(os.path.join(FIXTURES, "flows_ethanol.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "chemical_name", "smiles", "process_title",
                         "process_description", "location", "gwp"])
        for i, (title, gwp) in enumerate(ETHANOL_ROWS, start=1):
            writer.writerow([f"e{i:03d}", "ethanol", "CCO", title,
                             "Ethanol production process entry.", "Global",
                             repr(gwp)])


if __name__ == "__main__":
    sys.exit(main())
