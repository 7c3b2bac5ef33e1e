#!/usr/bin/env python3
"""Regenerates the GHCN-Daily fixtures used by the ingest and CLI tests."""
import calendar
import pathlib

HERE = pathlib.Path(__file__).parent
YEARS = (2000, 2001)

# id, lat, lon, state, kind
STATIONS = [
    ("USC00000001", 40.0, -100.0, "NE", "complete"),
    ("USC00000002", 45.0, -90.0, "WI", "complete"),
    ("USC00000003", 42.25, -95.5, "IA", "complete"),
    ("USC00000004", 41.5, -93.0, "IA", "missing-day"),
    ("USC00000005", 43.0, -97.0, "SD", "flagged-day"),
]


def value(s, y, m, d):
    return (s * 7 + y * 3 + m * 11 + d * 13) % 600 - 100


def line(sid, y, m, element, days):
    out = f"{sid}{y:04d}{m:02d}{element}"
    for v, q in days:
        out += f"{v:5d} {q} "
    assert len(out) == 269
    return out


def main():
    (HERE / "dly").mkdir(exist_ok=True)
    with open(HERE / "ghcnd-stations.txt", "w") as f:
        for sid, lat, lon, state, _ in STATIONS:
            f.write(f"{sid} {lat:8.4f} {lon:9.4f} {0.0:6.1f} {state} FIXTURE STATION\n")
    for s, (sid, _, _, _, kind) in enumerate(STATIONS, start=1):
        rows = []
        for y in (1999,) + YEARS:
            for m in range(1, 13):
                ndays = calendar.monthrange(y, m)[1]
                days = []
                for d in range(1, 32):
                    if d > ndays:
                        # Nonexistent day: station 2 carries a bogus value.
                        days.append((555 if s == 2 else -9999, " "))
                        continue
                    v = value(s, y, m, d)
                    if s == 1 and (y, m, d) == (2000, 1, 1):
                        v = 317
                    q = " "
                    if kind == "missing-day" and (y, m, d) == (2001, 6, 15):
                        v = -9999
                    if kind == "flagged-day" and (y, m, d) == (2000, 3, 3):
                        q = "X"
                    days.append((v, q))
                rows.append(line(sid, y, m, "TMAX", days))
                rows.append(line(sid, y, m, "PRCP", [(s * 10 + d, " ") for d in range(1, 32)]))
        (HERE / "dly" / f"{sid}.dly").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
