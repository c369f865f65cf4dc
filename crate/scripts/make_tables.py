#!/usr/bin/env python3
"""Regenerate the bundled OCP tables and synthetic drive profiles.

Usage: python3 scripts/make_tables.py [output_data_dir]
"""
import math
import sys
from pathlib import Path

import numpy as np


def graphite_raw(x):
    return (
        1.9793 * math.exp(-39.3631 * x)
        + 0.2482
        - 0.0909 * math.tanh(29.8538 * (x - 0.1234))
        - 0.04478 * math.tanh(14.9159 * (x - 0.2769))
        - 0.0205 * math.tanh(30.4444 * (x - 0.6103))
    )


def nmc_raw(y):
    return (
        -0.8090 * y
        + 4.4875
        - 0.0428 * math.tanh(18.5138 * (y - 0.5542))
        - 17.7326 * math.tanh(15.7890 * (y - 0.3117))
        + 17.5842 * math.tanh(15.9308 * (y - 0.3120))
    )


def graphite(x):
    return graphite_raw(0.05 + 0.95 * x)


def nmc(y):
    return nmc_raw(0.25 + 0.75 * y)


def write_ocp(path, name, f, points=1001):
    xs = np.linspace(0.0, 1.0, points)
    vals = [f(x) for x in xs]
    # enforce non-increasing after rounding
    out = []
    prev = float("inf")
    for v in vals:
        v = round(v, 7)
        v = min(v, prev)
        out.append(v)
        prev = v
    with open(path, "w") as fh:
        fh.write(f"# {name} open-circuit potential\n")
        fh.write("# stoichiometry  potential_v\n")
        for x, v in zip(xs, out):
            fh.write(f"{x:.4f} {v:.7f}\n")


def smooth(rng, n, scale, corr):
    raw = rng.normal(0.0, 1.0, n)
    out = np.zeros(n)
    acc = 0.0
    a = math.exp(-1.0 / corr)
    for i in range(n):
        acc = a * acc + math.sqrt(1.0 - a * a) * raw[i]
        out[i] = acc
    return scale * out


def trip(rng, length, peak, cruise, regen):
    """One stop-and-go micro trip: accelerate, cruise, brake, idle."""
    acc = max(4, int(length * 0.2))
    brk = max(4, int(length * 0.15))
    idle = max(3, int(length * 0.15))
    cru = max(1, length - acc - brk - idle)
    seg = []
    for i in range(acc):
        s = math.sin(math.pi * (i + 0.5) / acc)
        seg.append(cruise + (peak - cruise) * s)
    seg.extend(cruise + smooth(rng, cru, 0.08 * cruise + 0.02, 8.0))
    for i in range(brk):
        s = math.sin(math.pi * (i + 0.5) / brk)
        seg.append(-regen * s)
    seg.extend([0.02] * idle)
    return seg[:length] + [0.02] * max(0, length - len(seg))


def city(rng, seconds):
    out = []
    while len(out) < seconds:
        length = int(rng.uniform(60, 140))
        out.extend(trip(rng, length, rng.uniform(0.7, 1.2), rng.uniform(0.2, 0.4), rng.uniform(0.25, 0.55)))
    return np.array(out[:seconds])


def highway(rng, seconds):
    base = 0.55 + smooth(rng, seconds, 0.12, 30.0)
    ramp = 60
    for i in range(ramp):
        base[i] = 0.02 + (base[ramp] - 0.02) * i / ramp + 0.5 * math.sin(math.pi * i / ramp)
        base[-1 - i] = -0.35 * math.sin(math.pi * i / ramp)
    return base


def aggressive(rng, seconds):
    out = []
    while len(out) < seconds:
        length = int(rng.uniform(90, 180))
        out.extend(trip(rng, length, rng.uniform(1.5, 2.0), rng.uniform(0.6, 0.9), rng.uniform(0.5, 0.8)))
    return np.array(out[:seconds])


def scaled(profile, target_net, duration):
    pos = np.clip(profile, 0.0, None)
    neg = np.clip(profile, None, 0.0)
    a = (target_net * duration - neg.sum()) / pos.sum()
    return np.clip(a * pos + neg, -1.0, 2.0)


def write_drive(path, name, rates, distance_mi):
    with open(path, "w") as fh:
        fh.write(f"# {name}\n")
        fh.write(f"# distance_mi = {distance_mi}\n")
        fh.write("# time_s  c_rate (discharge positive)\n")
        for t, c in enumerate(rates):
            fh.write(f"{t} {c:.5f}\n")
        fh.write(f"{len(rates)} 0.0\n")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "crates/core/data"
    write_ocp(out / "ocp/graphite.txt", "graphite", graphite)
    write_ocp(out / "ocp/nmc.txt", "layered oxide (NMC)", nmc)

    rng = np.random.default_rng(20240501)
    udds = city(rng, 1370)
    hw1 = highway(rng, 765)
    hw2 = highway(rng, 765)
    us06 = aggressive(rng, 600)
    idle = np.full(100, 0.02)

    net_per_hour = 0.27
    long = np.concatenate([udds, hw1, hw2, us06, idle])
    long_s = scaled(long, net_per_hour, 3600)
    write_drive(out / "drive/long.txt", "commute drive, long (city, 2x highway, aggressive)", long_s, 34.1)

    # short variant reuses the same scaling so per-second statistics match
    pos = np.clip(long, 0.0, None)
    neg = np.clip(long, None, 0.0)
    factor = (net_per_hour * 3600 - neg.sum()) / pos.sum()

    def apply(p):
        return np.clip(factor * np.clip(p, 0.0, None) + np.clip(p, None, 0.0), -1.0, 2.0)

    short = np.concatenate([udds[:685], hw1, us06[300:], np.full(50, 0.02)])
    write_drive(out / "drive/short.txt", "commute drive, short (half city, highway, half aggressive)", apply(short), 17.0)

    write_drive(out / "drive/aggressive.txt", "aggressive drive cycle segment", apply(us06), 8.0)

    for name in ["long", "short", "aggressive"]:
        data = np.loadtxt(out / f"drive/{name}.txt")
        rates = data[:-1, 1]
        print(name, len(rates), "net/h", rates.mean(), "min", rates.min(), "max", rates.max(),
              "net soc", rates.sum() / 3600)


if __name__ == "__main__":
    main()
