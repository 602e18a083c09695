#!/usr/bin/env python3
"""Regenerate the shipped default calibration file.

T1/T2 values are spread over the 30-120 us band measured on 20-qubit
superconducting devices of this generation, with qubit 7 deliberately weak
so chain experiments show a localized fidelity dip. Drift frequencies are
post-calibration residuals (a few kHz). Values are fixed, not sampled, so
the shipped file is reproducible byte for byte.
"""
import json
import sys
from pathlib import Path

T1_US = [85, 62, 110, 48, 73, 95, 41, 12, 67, 102,
         58, 88, 36, 77, 115, 52, 69, 98, 44, 81]
T2_US = [70, 55, 96, 40, 66, 83, 38, 10, 60, 91,
         49, 74, 33, 68, 104, 45, 61, 85, 39, 72]
OMEGA_MHZ = [0.005, 0.003, 0.008, 0.004, 0.006, 0.002, 0.007, 0.005, 0.003, 0.004,
             0.006, 0.008, 0.005, 0.003, 0.002, 0.007, 0.004, 0.006, 0.008, 0.003]


def build() -> dict:
    assert all(t2 <= 2 * t1 for t1, t2 in zip(T1_US, T2_US))
    return {
        "qubits": [
            {"t1_us": float(t1), "t2_us": float(t2), "omega_mhz": w, "readout_error": 0.0}
            for t1, t2, w in zip(T1_US, T2_US, OMEGA_MHZ)
        ],
        "durations_ns": {"single": 100.0, "two_qubit": 300.0, "measure": 1000.0},
        "two_qubit_error": 0.03,
    }


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "src" / "nisq_lab" / "data"
        / "default_calibration.json")
    target.write_text(json.dumps(build(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {target}")
