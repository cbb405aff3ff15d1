#!/usr/bin/env python3
"""Regenerates the synthetic corpus configs under configs/.

regime_drift.json / regime_stationary.json
    30 seasonal series (period 24) with 6 test-half spikes each; the drifting variant adds
    a +30 level shift at index 100, inside the initial training half.
fedd_stationary.json / fedd_shift.json
    20 seasonal series with 9 test batches of 168; the shifted variant adds a +5 mean
    shift in the middle of test batch 3.
"""
import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "configs"


def regime_specs(drift: bool):
    rng = np.random.default_rng(20240801)
    specs = []
    for i in range(30):
        spikes = sorted(rng.choice(np.arange(724, 1436), size=6, replace=False).tolist())
        spec = {
            "id": f"reg{i:02d}",
            "length": 1440,
            "base": {"level": 10.0, "season_amplitude": 3.0, "season_period": 24},
            "noise_sigma": 1.0,
            "anomalies": [{"at": a, "kind": "spike", "magnitude": 12.0} for a in spikes],
            "seed": 1000 + i,
        }
        if drift:
            spec["drift"] = {"at": 100, "kind": "mean_shift", "magnitude": 30.0}
        specs.append(spec)
    return specs


def fedd_specs(shift: bool):
    specs = []
    for i in range(20):
        spec = {
            "id": f"fedd{i:02d}",
            "length": 3024,
            "base": {"level": 10.0, "season_amplitude": 6.0, "season_period": 24},
            "noise_sigma": 1.0,
            "seed": 5000 + i,
        }
        if shift:
            spec["drift"] = {"at": 1512 + 3 * 168 + 84, "kind": "mean_shift", "magnitude": 5.0}
        specs.append(spec)
    return specs


def config(specs, regimes, out_dir, monitor=False):
    c = {
        "dataset": {"kind": "synthetic", "specs": specs},
        "detector": {"kind": "fft", "params": {"keep_components": 10}},
        "regimes": regimes,
        "batch_len": 168,
        "delays": [0, 1, 2, 3, 5, 7],
        "seeds": [1],
        "alpha": 0.10,
        "output_dir": out_dir,
    }
    if monitor:
        c["monitor"] = {"fedd": {"lambda": 0.2, "warn_limit": 2.0, "drift_limit": 3.0,
                                 "burn_in": 5}}
    return c


BLIND = [
    {"data": "static"},
    {"data": "full_history", "frequency": "blind"},
    {"data": "sliding_window", "frequency": "blind"},
]
ALL = BLIND + [
    {"data": "full_history", "frequency": "informed"},
    {"data": "sliding_window", "frequency": "informed"},
]


def write(name, obj):
    (OUT / name).write_text(json.dumps(obj, indent=2) + "\n")


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    write("regime_drift.json", config(regime_specs(True), BLIND, "out/regime_drift"))
    write("regime_stationary.json", config(regime_specs(False), BLIND, "out/regime_stationary"))
    write("fedd_stationary.json", config(fedd_specs(False), ALL, "out/fedd_stationary", True))
    write("fedd_shift.json", config(fedd_specs(True), ALL, "out/fedd_shift", True))
