"""Regenerates the CSV fixtures under data/.

Values are drawn from a seeded generator, then shifted and scaled so the
sample mean and population standard deviation hit the target exactly.
"""

import csv
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "data"
PITCH_MM = 2.0


def ordered_pairs(n):
    return [(v, s) for v in range(n) for s in range(n) if v != s]


def standardize(x, mean, std):
    x = np.asarray(x, dtype=float)
    return mean + (x - x.mean()) / x.std() * std


def write_dataset(name, pairs, values, unit="dB"):
    with open(OUT / name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["victim", "source", "value", "unit"])
        for (v, s), x in zip(pairs, values):
            w.writerow([v, s, f"{x:.6f}", unit])


def grid_distance(side, a, b):
    ra, ca = divmod(a, side)
    rb, cb = divmod(b, side)
    return PITCH_MM * math.hypot(ra - rb, ca - cb)


def bare(name, qubits, mean, std, seed):
    rng = np.random.default_rng(seed)
    pairs = ordered_pairs(qubits)
    write_dataset(name, pairs, standardize(rng.normal(size=len(pairs)), mean, std))


def tunnel(name, mean, std, slope, intercept, seed):
    # 3x3 grid at 2 mm pitch; every ordered pair gives 72 rows.
    rng = np.random.default_rng(seed)
    side = 3
    pairs = ordered_pairs(side * side)
    d = np.array([grid_distance(side, v, s) for v, s in pairs])
    trend = slope * d + intercept
    # Residuals orthogonal to 1 and d keep the least-squares line at the trend.
    design = np.column_stack([np.ones_like(d), d])
    r = rng.normal(size=len(d))
    r -= design @ np.linalg.lstsq(design, r, rcond=None)[0]
    # Shift the trend so the mean is exact, then size the scatter for the std.
    trend += mean - trend.mean()
    spread = std**2 - trend.var()
    r *= math.sqrt(spread) / r.std()
    write_dataset(name, pairs, trend + r)


def capacitances(prefix, qubits, mean, lo, hi, seed):
    rng = np.random.default_rng(seed)
    self_ff = rng.uniform(80.0, 90.0, qubits)
    plan = [4.20, 4.80, 4.26, 4.86, 4.92, 4.38, 4.98, 4.32]
    freq = np.array([plan[k % len(plan)] for k in range(qubits)])
    own_ff = 0.1
    pairs = ordered_pairs(qubits)
    target = np.clip(rng.normal(mean, 26.0, len(pairs)), lo + 2.0, hi - 2.0)
    target += mean - target.mean()
    with open(OUT / f"{prefix}_self.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["qubit", "C_fF", "frequency_GHz"])
        for q in range(qubits):
            w.writerow([q, f"{self_ff[q]:.6f}", f"{freq[q]:.2f}"])
    with open(OUT / f"{prefix}_coupling.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "C_fF"])
        for q in range(qubits):
            w.writerow([q, q, f"{own_ff:.6f}"])
        for (v, s), lam in zip(pairs, target):
            c = own_ff * (freq[s] / freq[v]) * math.sqrt(self_ff[v] / self_ff[s]) * 10 ** (lam / 20.0)
            w.writerow([v, s, f"{c:.9e}"])


def main():
    OUT.mkdir(exist_ok=True)
    bare("xy_bare_72.csv", 9, -39.4, 3.7, 7201)
    tunnel("xy_tunnel_72.csv", -37.4, 3.9, -1.1, -33.9, 7202)
    bare("xy_bare_210.csv", 15, -39.8, 4.0, 21001)
    capacitances("caps", 12, -95.0, -150.0, -49.0, 9501)


if __name__ == "__main__":
    main()
