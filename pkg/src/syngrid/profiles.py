"""Synthetic consumer load profiles and the coincidence-factor function.

The coincidence factor CF(n) is the ratio of the peak of n consumers'
aggregated load to the sum of their individual peaks. It is estimated by
Monte Carlo on a pool of synthetic household profiles at the log-spaced
anchors n = 2, 4, ..., 64, assumed flat beyond 64, and interpolated
linearly in log2(n) in between.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

ANCHOR_EXPONENTS = (1, 2, 3, 4, 5, 6)
ANCHORS = tuple(2 ** i for i in ANCHOR_EXPONENTS)
FLAT_TAIL_N = 64

DEFAULT_RESOLUTION_MIN = 15
DEFAULT_DAYS = 7  # one representative week


@dataclass(frozen=True)
class LoadProfile:
    values: np.ndarray      # active power samples, kW
    resolution_min: int
    peak_kw: float


@dataclass(frozen=True)
class CFTable:
    anchor_n: tuple[int, ...]
    cf_values: tuple[float, ...]
    repetitions: int
    seed: int


def generate_pool(count: int, s_r_kva: float, seed: int,
                  resolution_min: int = DEFAULT_RESOLUTION_MIN,
                  days: int = DEFAULT_DAYS) -> list[LoadProfile]:
    """Pool of distinct consumer profiles, each rescaled to peak exactly
    ``s_r_kva``.

    A profile is a smooth double-peak daily base (morning and evening)
    with per-day amplitude jitter plus short stochastic appliance spikes.
    Sub-seed per profile is derived from (seed, index), so the pool is
    reproducible element-wise.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    samples_per_day = 24 * 60 // resolution_min
    hours = np.arange(samples_per_day) * (resolution_min / 60.0)
    pool = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        mu_m = rng.uniform(6.0, 9.0)
        mu_e = rng.uniform(17.5, 21.0)
        sig_m = rng.uniform(1.0, 2.0)
        sig_e = rng.uniform(1.5, 2.5)
        w_m = rng.uniform(0.4, 0.9)
        w_e = rng.uniform(0.8, 1.2)
        base = (0.12
                + w_m * np.exp(-0.5 * ((hours - mu_m) / sig_m) ** 2)
                + w_e * np.exp(-0.5 * ((hours - mu_e) / sig_e) ** 2))
        day_gain = rng.uniform(0.8, 1.2, size=days)
        values = np.concatenate([base * g for g in day_gain])

        n_spikes = int(rng.integers(8, 25))
        total = len(values)
        for _ in range(n_spikes):
            at = int(rng.integers(0, total))
            width = int(rng.integers(1, 4))
            amp = rng.uniform(0.4, 1.8)
            values[at:at + width] += amp

        values *= s_r_kva / values.max()
        values[int(np.argmax(values))] = s_r_kva  # pin the peak exactly
        pool.append(LoadProfile(values, resolution_min, s_r_kva))
    return pool


def estimate_cf(pool: list[LoadProfile], s_r_kva: float,
                k: int = 200, seed: int = 0) -> CFTable:
    """Monte Carlo CF estimate at the log-spaced anchors.

    Per anchor n: draw n profiles without replacement, aggregate
    pointwise, record the aggregate peak; repeat k times and keep the
    largest peak. CF(n) = max_j(peak_j) / (s_r * n). A final cumulative
    minimum removes non-physical upticks from sampling noise.
    """
    if len(pool) < FLAT_TAIL_N:
        raise ValueError(f"pool must hold at least {FLAT_TAIL_N} profiles, "
                         f"got {len(pool)}")
    if k < 1:
        raise ValueError("k must be >= 1")
    matrix = np.stack([p.values for p in pool])
    cf = []
    for i, n in zip(ANCHOR_EXPONENTS, ANCHORS):
        rng = np.random.default_rng([seed, i])
        best = 0.0
        for _ in range(k):
            idx = rng.choice(len(pool), size=n, replace=False)
            peak = matrix[idx].sum(axis=0).max()
            if peak > best:
                best = peak
        cf.append(best / (s_r_kva * n))
    cf = np.minimum.accumulate(cf)  # enforce non-increasing anchors
    return CFTable(ANCHORS, tuple(float(v) for v in cf), k, seed)


def cf_at(table: CFTable, n: float) -> float:
    """CF(n): 1 at n=1, anchor values at anchors, log2-linear in between,
    flat at CF(64) for n >= 64."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return 1.0
    if n >= FLAT_TAIL_N:
        return table.cf_values[-1]
    xs = [0.0] + [float(i) for i in ANCHOR_EXPONENTS]
    ys = [1.0] + list(table.cf_values)
    x = math.log2(n)
    for j in range(len(xs) - 1):
        if xs[j] <= x <= xs[j + 1]:
            t = (x - xs[j]) / (xs[j + 1] - xs[j])
            return ys[j] + t * (ys[j + 1] - ys[j])
    return table.cf_values[-1]


def table_to_json(table: CFTable) -> str:
    return json.dumps({
        "anchor_n": list(table.anchor_n),
        "cf_values": list(table.cf_values),
        "repetitions": table.repetitions,
        "seed": table.seed,
    }, indent=1)


def table_from_json(data: str | bytes) -> CFTable:
    doc = json.loads(data)
    return CFTable(tuple(doc["anchor_n"]), tuple(doc["cf_values"]),
                   doc["repetitions"], doc["seed"])


def pool_to_csv(pool: list[LoadProfile]) -> str:
    """One column per consumer, one row per time step (kW)."""
    buf = io.StringIO()
    buf.write(",".join(f"consumer_{i}" for i in range(len(pool))) + "\n")
    matrix = np.stack([p.values for p in pool]).T
    for row in matrix:
        buf.write(",".join(format(v, ".6f") for v in row) + "\n")
    return buf.getvalue()
