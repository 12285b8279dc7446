#!/usr/bin/env python3
"""Regenerate the surrogate input data under data/.

The Sunbury gage record, its rating curve and the historical real discount-rate
series are not redistributable offline, so the files under data/ are synthetic
stand-ins with the same layout as the public sources:

* data/gage/usgs_01554000_dv.rdb        USGS RDB daily discharge, 1937-2019
* data/gage/usgs_01554000_rating.csv    stage-discharge rating (discharge,stage)
* data/discount/real_rates.csv          smoothed real discount rates, 1800-2018

Annual-maximum stages are Gumbel(18.5 ft, 3.7 ft). Discount rates follow a
log-scale AR(3) with a linear background trend. Everything is seeded, so the
output is byte-identical across runs.

Usage: python3 tools/make_surrogate_data.py [repo_root]
"""
import datetime as dt
import math
import sys
from pathlib import Path

import numpy as np

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1]

GAGE_ID = "01554000"
FIRST_YEAR, LAST_YEAR = 1937, 2019
HAZARD_SEED = 7
STAGE_LOC, STAGE_SCALE = 18.5, 3.7

RATING_A, RATING_B = 0.005494, 0.688
RATING_Q = [1000, 2000, 3000, 5000, 7500, 10000, 15000, 20000, 30000, 40000,
            50000, 60000, 80000, 100000, 125000, 150000, 175000, 200000,
            250000, 300000, 350000, 400000, 500000, 600000]

DISCOUNT_SEED = 28
DISCOUNT_TREND = (1.9289, -0.0058)
DISCOUNT_RHO = np.array([1.6965, -0.9755, 0.2388])
DISCOUNT_SIGMA2 = 0.0033


def rating_table():
    return [(q, round(RATING_A * q ** RATING_B, 2)) for q in RATING_Q]


def stage_to_discharge(table, stage):
    qs = np.array([p[0] for p in table], dtype=float)
    ss = np.array([p[1] for p in table], dtype=float)
    i = int(np.clip(np.searchsorted(ss, stage) - 1, 0, len(ss) - 2))
    return qs[i] + (stage - ss[i]) * (qs[i + 1] - qs[i]) / (ss[i + 1] - ss[i])


def write_rating(table):
    path = ROOT / "data/gage/usgs_01554000_rating.csv"
    with path.open("w") as f:
        f.write("discharge,stage\n")
        for q, s in table:
            f.write(f"{q},{s:.2f}\n")


def write_rdb(table):
    rng = np.random.default_rng(HAZARD_SEED)
    years = list(range(FIRST_YEAR, LAST_YEAR + 1))
    u = rng.random(len(years))
    peak_stage = STAGE_LOC - STAGE_SCALE * np.log(-np.log(u))
    # (year, first day-of-year, length, marker) for gaps; 1962 drops below 90% coverage.
    gaps = {1945: (10, 20, "Ice"), 1962: (5, 60, "Ice"), 1978: (200, 25, "Eqp"), 1990: (150, 1, "")}
    lines = [
        "# ---------------------------------- WARNING ----------------------------------------",
        "# Synthetic stand-in for USGS daily values. Layout follows the NWIS RDB service.",
        "#",
        f"# USGS {GAGE_ID} SUSQUEHANNA RIVER AT SUNBURY, PA (surrogate)",
        "#",
        "# Data provided for site " + GAGE_ID,
        "#            TS   parameter     statistic     Description",
        "#         12345       00060     00003     Discharge, cubic feet per second (Mean)",
        "#",
        "agency_cd\tsite_no\tdatetime\t12345_00060_00003\t12345_00060_00003_cd",
        "5s\t15s\t20d\t14n\t10s",
    ]
    for yi, year in enumerate(years):
        start = dt.date(year, 1, 1)
        ndays = (dt.date(year + 1, 1, 1) - start).days
        peak_q = round(stage_to_discharge(table, peak_stage[yi]))
        doy = np.arange(ndays)
        season = 22000.0 * np.exp(0.9 * np.cos(2 * math.pi * (doy - 85) / 365.25))
        noise = np.empty(ndays)
        noise[0] = rng.normal(0, 0.35)
        for d in range(1, ndays):
            noise[d] = 0.93 * noise[d - 1] + rng.normal(0, 0.13)
        base = np.minimum(season * np.exp(noise), 0.6 * peak_q)
        if rng.random() < 0.75:
            peak_day = int(rng.integers(40, 130))
        else:
            peak_day = int(rng.integers(150, 330))
        gap = gaps.get(year)
        if gap and gap[0] <= peak_day < gap[0] + gap[1]:
            peak_day = gap[0] + gap[1] + 5
        flow = np.maximum(base, 0.85 * peak_q * np.exp(-np.abs(doy - peak_day) / 3.0))
        flow[peak_day] = peak_q
        for d in range(ndays):
            date = start + dt.timedelta(days=d)
            if gap and gap[0] <= d < gap[0] + gap[1]:
                lines.append(f"USGS\t{GAGE_ID}\t{date.isoformat()}\t{gap[2]}\t")
                continue
            q = int(round(flow[d]))
            if d != peak_day and q >= peak_q:
                q = peak_q - 1
            lines.append(f"USGS\t{GAGE_ID}\t{date.isoformat()}\t{q}\tA")
    (ROOT / "data/gage/usgs_01554000_dv.rdb").write_text("\n".join(lines) + "\n")


def write_discount():
    rng = np.random.default_rng(DISCOUNT_SEED)
    n, burn = 219, 300
    dev = np.zeros(n + burn)
    for t in range(3, n + burn):
        dev[t] = DISCOUNT_RHO @ np.array([dev[t - 1], dev[t - 2], dev[t - 3]])
        dev[t] += rng.normal(0, math.sqrt(DISCOUNT_SIGMA2))
    t = np.arange(1, n + 1)
    log_rate = DISCOUNT_TREND[0] + DISCOUNT_TREND[1] * t + dev[burn:]
    with (ROOT / "data/discount/real_rates.csv").open("w") as f:
        f.write("year,rate_percent\n")
        for year, r in zip(1799 + t, np.exp(log_rate)):
            f.write(f"{year},{r:.6f}\n")


def main():
    table = rating_table()
    write_rating(table)
    write_rdb(table)
    write_discount()


if __name__ == "__main__":
    main()
