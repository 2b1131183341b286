#!/usr/bin/env python3
"""Independent unit cross-check for the depth metrics.

Standalone on purpose: no numpy, no package imports. Starting from SI
definitions (1 m = 1000 mm, 1 km = 1000 m) it derives the expected RMSE,
MAE, iRMSE and iMAE for a small fixed set of prediction/target depths and
prints them as `key value` lines. The test suite compares these values
against the package's metric implementation, so the two conversion paths
stay honest about units independently of each other.

Run: python scripts/unit_check.py
"""

import math
import sys

# Fixed evaluation set: (prediction, ground truth) in meters.
CASES = [
    (10.0, 11.0),
    (5.0, 5.5),
    (2.0, 2.0),
    (40.0, 39.25),
]


def expected_metrics(cases):
    mm_per_m = 1000.0          # SI: milli = 1e-3
    m_per_km = 1000.0          # SI: kilo = 1e+3

    diffs_mm = [(p - g) * mm_per_m for p, g in cases]
    rmse_mm = math.sqrt(sum(d * d for d in diffs_mm) / len(diffs_mm))
    mae_mm = sum(abs(d) for d in diffs_mm) / len(diffs_mm)

    # A depth of d meters is d / 1000 km, so its inverse is 1000 / d per km.
    inv_diffs_per_km = [m_per_km / p - m_per_km / g for p, g in cases]
    irmse = math.sqrt(sum(d * d for d in inv_diffs_per_km) / len(inv_diffs_per_km))
    imae = sum(abs(d) for d in inv_diffs_per_km) / len(inv_diffs_per_km)
    return {
        "rmse_mm": rmse_mm,
        "mae_mm": mae_mm,
        "irmse_per_km": irmse,
        "imae_per_km": imae,
    }


def main():
    values = expected_metrics(CASES)

    # Self-checks on hand-derivable single points.
    # 10 m vs 11 m is exactly 1000 mm of error.
    one = expected_metrics([(10.0, 11.0)])
    assert abs(one["rmse_mm"] - 1000.0) < 1e-9, one
    assert abs(one["mae_mm"] - 1000.0) < 1e-9, one
    # Inverse: |1000/10 - 1000/11| = 100 - 90.9090... = 9.0909... per km.
    assert abs(one["irmse_per_km"] - (100.0 - 1000.0 / 11.0)) < 1e-9, one

    for key, value in values.items():
        print(f"{key} {value!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
