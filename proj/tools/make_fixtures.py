#!/usr/bin/env python3
"""Regenerates the bundled clustering fixtures under data/.

three_blob: 30 wells in three well-separated spatial groups whose numeric
attributes and formation label follow the group, plus two production
channels with group-specific decline shapes.
xor: 40 wells whose label is the XOR of the coordinate quadrant signs.
"""
import csv
import json
import math
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"


def three_blob(rng):
    out = ROOT / "three_blob"
    out.mkdir(parents=True, exist_ok=True)
    groups = [
        # centre x, y, porosity, thickness, permeability, formation, decline
        (1000.0, 1000.0, 0.12, 40.0, 15.0, "A", 0.002),
        (6000.0, 1500.0, 0.22, 90.0, 250.0, "B", 0.010),
        (3500.0, 6000.0, 0.30, 150.0, 900.0, "C", 0.030),
    ]
    rows, channels = [], []
    for g, (cx, cy, phi, h, k, fm, dec) in enumerate(groups):
        for m in range(10):
            name = f"W{g * 10 + m + 1:02d}"
            rows.append([
                name,
                round(cx + rng.gauss(0, 350.0), 1),
                round(cy + rng.gauss(0, 350.0), 1),
                round(phi * (1 + rng.gauss(0, 0.04)), 4),
                round(h * (1 + rng.gauss(0, 0.05)), 2),
                round(k * (1 + rng.gauss(0, 0.06)), 2),
                fm,
            ])
            q0 = 800.0 * (1 + rng.gauss(0, 0.05))
            for t in range(0, 361, 30):
                rate = q0 * math.exp(-dec * t) * (1 + rng.gauss(0, 0.01))
                channels.append(("oil", name, t, round(rate, 3)))
                channels.append(("water", name, t, round(q0 * 0.05 * (1 + dec * 40 * t / 360.0), 3)))
    with open(out / "wells.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["well", "x", "y", "porosity", "thickness", "permeability", "formation"])
        w.writerows(rows)
    for ch in ("oil", "water"):
        with open(out / f"{ch}_rate.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["well", "time", "value"])
            w.writerows([c[1:] for c in channels if c[0] == ch])
    cfg = {
        "wells": "wells.csv",
        "numeric": ["porosity", "thickness", "permeability"],
        "categorical": ["formation"],
        "k_range": [1, 8],
        "n_init": 5,
        "seed": 7,
        "zone": {"kernel": "rbf", "resolution": 100},
    }
    (out / "cluster.json").write_text(json.dumps(cfg, indent=2) + "\n")
    cfg_t = dict(cfg)
    cfg_t["channels"] = {"oil": "oil_rate.csv", "water": "water_rate.csv"}
    cfg_t["temporal"] = {"k": 2, "split_threshold": 0.15, "depth_cap": 4}
    (out / "cluster_temporal.json").write_text(json.dumps(cfg_t, indent=2) + "\n")


def xor(rng):
    out = ROOT / "xor"
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for q, (sx, sy) in enumerate([(1, 1), (-1, 1), (-1, -1), (1, -1)]):
        for m in range(10):
            x = sx * (1000.0 + rng.uniform(0, 2000.0))
            y = sy * (1000.0 + rng.uniform(0, 2000.0))
            rows.append([f"X{q * 10 + m + 1:02d}", round(x, 1), round(y, 1), int(sx * sy < 0)])
    with open(out / "wells.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["well", "x", "y", "label"])
        w.writerows(rows)


if __name__ == "__main__":
    rng = random.Random(20240611)
    three_blob(rng)
    xor(rng)
