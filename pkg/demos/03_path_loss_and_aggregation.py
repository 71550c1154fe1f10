"""The measurement layer: path loss, packet delivery, and windowed RSSI.

Plots (as text) the expected RSSI curve of the log-distance model, shows
how shadowing noise spreads samples at a fixed distance, and walks one
simulated device through aggregation into a per-window signal matrix.
"""

import statistics
from dataclasses import replace

import numpy as np

from fingertrace import (
    DeviceScript,
    ScenarioConfig,
    aggregate,
    generate_scenario,
    rssi_model,
    signal_matrix,
)


def main():
    cfg = ScenarioConfig(
        sniffers=(("A", 0.0, 0.0), ("B", 10.0, 0.0)),
        devices=(
            DeviceScript(
                "tag",
                waypoints=((0.0, 2.0, 0.0), (30.0, 2.0, 0.0),
                           (40.0, 8.0, 0.0), (80.0, 8.0, 0.0)),
                delivery_prob=1.0,
            ),
        ),
        duration=80.0,
        seed=7,
    )

    print("expected RSSI vs. distance (no shadowing):")
    quiet = replace(cfg, shadow_sigma_db=0.0)
    rng = np.random.default_rng(0)
    for d in (1, 2, 5, 10, 20, 40):
        print(f"  {d:3d} m  {rssi_model(d, quiet, rng):6.1f} dBm")

    samples = [rssi_model(5.0, cfg, rng) for _ in range(500)]
    print(f"\nat 5 m with sigma={cfg.shadow_sigma_db} dB over 500 samples:")
    print(f"  mean {statistics.mean(samples):6.1f}  stdev {statistics.stdev(samples):4.1f}")

    records, _ = generate_scenario(cfg)
    windowed = aggregate(records, window_len=20.0)
    header, rows = signal_matrix(windowed, "tag")
    print("\nper-window signal matrix for device 'tag':")
    print("  " + "  ".join(f"{h:>12}" for h in header))
    for row in rows:
        print("  " + "  ".join(f"{c!s:>12}" for c in row))


if __name__ == "__main__":
    main()
