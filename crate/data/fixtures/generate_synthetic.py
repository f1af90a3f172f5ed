"""Writes a small JHU-format snapshot with known ground truth.

Synthland has no cases before 2020-06-02, so smoothed series are at rest at
the start of the CFR window, and its deaths follow a delayed geometric kernel
exactly. Paramland has two provinces and integer counts.

Run from the repository root:  python3 data/fixtures/generate_synthetic.py
"""

import csv
import datetime as dt
import hashlib
import math
from pathlib import Path

OUT = Path(__file__).resolve().parent / "synthetic"
START = dt.date(2020, 1, 22)
END = dt.date(2020, 12, 31)
DAYS = (END - START).days + 1

DELAY, DECAY, SCALE = 3, 0.943, 0.000485
ONSET = dt.date(2020, 6, 2)

FILES = {
    "confirmed": "time_series_covid19_confirmed_global.csv",
    "deaths": "time_series_covid19_deaths_global.csv",
    "recovered": "time_series_covid19_recovered_global.csv",
}


def header():
    cols = ["Province/State", "Country/Region", "Lat", "Long"]
    for i in range(DAYS):
        d = START + dt.timedelta(days=i)
        cols.append(f"{d.month}/{d.day}/{d.year % 100:02d}")
    return cols


def synthland_daily_cases():
    bumps = [(120.0, 18.0, 2500.0), (245.0, 16.0, 6000.0), (320.0, 12.0, 3000.0)]
    onset = (ONSET - START).days
    out = []
    for t in range(DAYS):
        if t < onset:
            out.append(0.0)
            continue
        out.append(
            float(round(40.0 + sum(h * math.exp(-(((t - c) / w) ** 2)) for c, w, h in bumps)))
        )
    return out


def convolve(cases):
    deaths, state = [], 0.0
    for t in range(DAYS):
        state = DECAY * state + (cases[t - DELAY] if t >= DELAY else 0.0)
        deaths.append(SCALE * state)
    return deaths


def cumulative(daily):
    total, out = 0.0, []
    for v in daily:
        total += v
        out.append(total)
    return out


def fmt(v):
    return str(int(v)) if float(v).is_integer() else repr(v)


def paramland(seed, scale):
    # deterministic integer cumulative counts
    total, out = 0, []
    for t in range(DAYS):
        total += (seed * (t + 7) * 7919) % (scale + 1)
        out.append(total)
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cases = synthland_daily_cases()
    confirmed = cumulative(cases)
    deaths = cumulative(convolve(cases))
    recovered = [0.0] * 14 + [0.98 * c for c in confirmed[:-14]]
    tables = {
        "confirmed": (confirmed, paramland(3, 90), paramland(5, 40)),
        "deaths": (deaths, paramland(7, 2), paramland(11, 1)),
        "recovered": (recovered, paramland(13, 60), paramland(17, 30)),
    }
    sums = []
    for kind, name in FILES.items():
        synth, north, south = tables[kind]
        path = OUT / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header())
            w.writerow(["", "Synthland", "10.0", "20.0"] + [fmt(v) for v in synth])
            w.writerow(["North", "Paramland", "-5.5", "12.25"] + [fmt(v) for v in north])
            w.writerow(["South, Coast", "Paramland", "-7.0", "13.0"] + [fmt(v) for v in south])
        sums.append(f"{hashlib.sha256(path.read_bytes()).hexdigest()}  {name}")
    (OUT / "SHA256SUMS").write_text("\n".join(sums) + "\n")


if __name__ == "__main__":
    main()
