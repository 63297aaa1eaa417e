"""Regenerate the golden fingerprint fixtures from their definitions.

Independent of the Rust implementation: numpy only, brute-force image sums.
Run from this directory: python3 gen_fingerprints.py
"""
import csv
import itertools
import math
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
TABLE = os.path.join(HERE, "..", "..", "data", "elements.csv")

CUTOFF, WIDTH, SIGMA, BINS = 8.0, 0.1, 0.15, 80


def rdf(lattice, frac):
    lattice = np.asarray(lattice, float)
    frac = np.asarray(frac, float)
    n = len(frac)
    vol = abs(np.linalg.det(lattice))
    # generous fixed image range, independent of plane spacings
    reach = [int(math.ceil(CUTOFF / (vol / np.linalg.norm(np.cross(lattice[(i + 1) % 3], lattice[(i + 2) % 3]))))) + 2 for i in range(3)]
    dists = []
    for i in range(n):
        for j in range(n):
            for k in itertools.product(*[range(-r, r + 1) for r in reach]):
                d = np.linalg.norm((frac[j] - frac[i] + np.array(k)) @ lattice)
                if 1e-8 < d <= CUTOFF:
                    dists.append(d)
    dists = np.array(sorted(dists))
    rho = n / vol
    r = (np.arange(BINS) + 0.5) * WIDTH
    g = np.exp(-0.5 * ((r[:, None] - dists[None, :]) / SIGMA) ** 2).sum(axis=1)
    g /= SIGMA * math.sqrt(2 * math.pi)
    return g / (n * rho * 4 * math.pi * r * r)


def load_table():
    rows = {}
    with open(TABLE) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            z, sym, mass, rad, en, row, group = line.strip().split(",")[:7]
            f = lambda s: float(s) if s else None
            rows[sym] = [float(z), float(mass), f(rad), f(en), float(row), float(group)]
    return rows


def comp_fp(table, comp):
    stats = []
    for f in range(6):
        vals = np.array([v[f] for v in table.values() if v[f] is not None])
        stats.append((vals.mean(), vals.std()))
    total = sum(comp.values())
    feats = []
    for sym, count in comp.items():
        raw = table[sym]
        feats.append((count / total, [0.0 if raw[f] is None else (raw[f] - stats[f][0]) / stats[f][1] for f in range(6)]))
    mean = [sum(w * x[f] for w, x in feats) for f in range(6)]
    std = [math.sqrt(sum(w * (x[f] - mean[f]) ** 2 for w, x in feats)) for f in range(6)]
    return np.array(mean + std)


def write(name, header, rows):
    with open(os.path.join(HERE, name), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def main():
    sc1 = rdf(np.eye(3), [[0, 0, 0]])
    sc11 = rdf(1.1 * np.eye(3), [[0, 0, 0]])
    nacl = rdf(5.64 * np.eye(3), [[0, 0, 0], [0.5, 0.5, 0.5]])
    r = (np.arange(BINS) + 0.5) * WIDTH
    write("rdf_golden.csv", ["r", "sc_a1", "sc_a1_1", "cscl_type_a5_64"], zip(r, sc1, sc11, nacl))
    table = load_table()
    na = comp_fp(table, {"Na": 1, "Cl": 1})
    k = comp_fp(table, {"K": 1, "Cl": 1})
    write("composition_golden.csv", ["feature", "NaCl", "KCl"], zip(range(12), na, k))
    write(
        "distance_golden.csv",
        ["pair", "distance"],
        [("sc_a1_vs_a1_1", float(np.linalg.norm(sc1 - sc11))), ("NaCl_vs_KCl", float(np.linalg.norm(na - k)))],
    )


if __name__ == "__main__":
    main()
