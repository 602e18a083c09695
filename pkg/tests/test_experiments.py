"""Experiment drivers: closed-loop recovery, noiseless limits, trends."""
import math

import numpy as np
import pytest

from nisq_lab import builders, topology
from nisq_lab.experiments import (
    ExperimentConfig,
    default_phi_grid,
    nearest_perfect_phase,
    run_ccnot_survey,
    run_cnot_chain_sweep,
    run_qft_perfect_phases,
    run_qpe_phase_sweep,
    run_t1,
    run_t2_echo,
    run_t2_ramsey,
)
from nisq_lab.noise import DeviceCalibration, DurationModel, QubitNoiseParams

INF = math.inf


def cal_for_qubit(t1=INF, t2=INF, omega=0.0, p2=0.0):
    return DeviceCalibration(
        qubits=(QubitNoiseParams(t1=t1, t2=t2, omega=omega),),
        durations=DurationModel(),
        two_qubit_error=p2,
    )


def test_t1_recovery_within_ten_percent():
    cfg = ExperimentConfig(calibration=cal_for_qubit(t1=70e-6, t2=100e-6), shots=8000, seed=5)
    table = run_t1(cfg)
    assert table.fit.ok
    assert abs(table.fit.params["t_decay"] - 70.0) / 70.0 < 0.10
    # the dt = 0 point only decays during the 1 us readout window
    assert table.rows[0].f1 == pytest.approx(math.exp(-1.0 / 70.0), abs=0.01)


def test_t1_zero_measurement_duration_starts_at_one():
    cal = DeviceCalibration(
        qubits=(QubitNoiseParams(t1=70e-6, t2=100e-6),),
        durations=DurationModel(measurement=0.0),
    )
    cfg = ExperimentConfig(calibration=cal, shots=4000, seed=5)
    table = run_t1(cfg)
    assert table.rows[0].f1 == 1.0  # dt = 0, no readout window decay


def test_t1_zero_noise_fit_failure_flagged():
    cfg = ExperimentConfig(calibration=cal_for_qubit(), shots=500, seed=1,
                           dt_grid_us=(0.0, 10.0, 20.0, 40.0))
    table = run_t1(cfg)
    assert all(r.f1 == 1.0 for r in table.rows)
    assert not table.fit.ok


def test_t1_grid_warning():
    cfg = ExperimentConfig(calibration=cal_for_qubit(t1=70e-6, t2=100e-6), shots=200, seed=1,
                           dt_grid_us=(0.0, 10.0, 20.0, 30.0))
    table = run_t1(cfg)
    assert "grid_warning" in table.metadata


def test_ramsey_recovers_omega_within_one_percent():
    omega = 2 * math.pi * 0.1e6
    cfg = ExperimentConfig(calibration=cal_for_qubit(t1=120e-6, t2=45e-6, omega=omega),
                           shots=8000, seed=5)
    table = run_t2_ramsey(cfg)
    assert table.fit.ok and not table.fit.fallback
    fitted = table.fit.params["omega"]  # rad/us
    assert abs(fitted - omega * 1e-6) / (omega * 1e-6) < 0.01


def test_echo_pure_drift_stays_at_one():
    cfg = ExperimentConfig(calibration=cal_for_qubit(omega=2 * math.pi * 0.2e6),
                           shots=2000, seed=3, dt_grid_us=(0.0, 5.0, 11.0, 17.0, 23.0, 40.0))
    table = run_t2_echo(cfg)
    assert all(r.f1 == 1.0 for r in table.rows)
    assert not table.fit.ok  # no decay to fit


def test_echo_decay_at_least_ramsey_decay():
    cal = cal_for_qubit(t1=60e-6, t2=45e-6, omega=2 * math.pi * 0.15e6)
    cfg = ExperimentConfig(calibration=cal, shots=8000, seed=11)
    ramsey = run_t2_ramsey(cfg)
    echo = run_t2_echo(cfg)
    assert ramsey.fit.ok and echo.fit.ok
    assert echo.fit.params["t_decay"] >= 0.9 * ramsey.fit.params["t_phi"]


def noiseless_20q():
    return DeviceCalibration.noiseless(20)


def test_chain_sweep_noiseless_all_ones(graph):
    cfg = ExperimentConfig(calibration=noiseless_20q(), graph=graph, shots=64, seed=0,
                           orientations=(1, 3), max_length=6)
    result = run_cnot_chain_sweep(cfg)
    for table in result.tables.values():
        assert all(r.f1 == 1.0 and r.f2 == 1.0 for r in table.rows)
    for table in result.averages.values():
        assert all(r.f1 == 1.0 and r.f2 == 1.0 for r in table.rows)


def test_chain_sweep_reproducible(graph, default_cal):
    cfg = ExperimentConfig(calibration=default_cal, graph=graph, shots=300, seed=9,
                           orientations=(2,), strategies=("x-reset",), max_length=5)
    a = run_cnot_chain_sweep(cfg)
    b = run_cnot_chain_sweep(cfg)
    ta = a.tables[(2, "x-reset")]
    tb = b.tables[(2, "x-reset")]
    assert [(r.x, r.f1, r.f2) for r in ta.rows] == [(r.x, r.f1, r.f2) for r in tb.rows]


def test_chain_weak_qubit_dip(graph):
    """A mid-path qubit with t1 cut to a third of its neighbors' produces a
    visible f1 drop at the length where it joins the chain."""
    qubits = []
    for q in range(20):
        t1 = 20e-6 if q == 7 else 60e-6
        qubits.append(QubitNoiseParams(t1=t1, t2=t1, omega=0.0))
    cal = DeviceCalibration(tuple(qubits), DurationModel(), two_qubit_error=0.0)
    # orientation 1 reaches qubit 7 at chain length 7
    cfg = ExperimentConfig(calibration=cal, graph=graph, shots=8000, seed=13,
                           orientations=(1,), strategies=("x-reset",), max_length=9)
    table = run_cnot_chain_sweep(cfg).tables[(1, "x-reset")]
    f1 = [r.f1 for r in table.rows]
    drop = f1[5] - f1[6]
    sigma = math.sqrt(f1[5] * (1 - f1[5]) / 8000 + f1[6] * (1 - f1[6]) / 8000)
    assert drop > 3 * sigma


def test_ccnot_survey_noiseless_all_ones(graph):
    cfg = ExperimentConfig(calibration=noiseless_20q(), graph=graph, shots=16, seed=0)
    result = run_ccnot_survey(cfg, families=("linear3",))
    assert len(result.cells) == 96  # 32 triples x 3 target placements
    assert all(c.f1 == 1.0 and c.f2 == 1.0 for c in result.cells)


def test_ccnot_survey_star_and_ring_noiseless(graph):
    cfg = ExperimentConfig(calibration=noiseless_20q(), graph=graph, shots=16, seed=0)
    result = run_ccnot_survey(cfg, families=("star4", "ring6-3chain", "ring6-1chains"))
    assert len(result.family("star4-x-reset")) == 18  # 6 stars x 3 targets
    assert len(result.family("star4-cnot-reset")) == 18
    assert len(result.family("ring6-3chain")) == 12
    assert len(result.family("ring6-1chains")) == 12
    assert all(c.f1 == 1.0 and c.f2 == 1.0 for c in result.cells)


def test_survey_top_placements_ranking(graph):
    cfg = ExperimentConfig(calibration=noiseless_20q(), graph=graph, shots=16, seed=0)
    result = run_ccnot_survey(cfg, families=("star4",))
    top = result.top_placements("star4", 3)
    assert len(top) == 3
    assert all(p.kind == "star4" for p in top)


def test_qft_perfect_noiseless_all_ones(graph):
    cfg = ExperimentConfig(calibration=noiseless_20q(), graph=graph, shots=32, seed=0, top_k=1)
    result = run_qft_perfect_phases(cfg)
    for geometry, table in result.tables.items():
        assert [r.x for r in table.rows] == list(range(8))
        assert all(r.f1 == 1.0 for r in table.rows), geometry
        assert all(r.f2 == 1.0 for r in table.rows), geometry
    assert result.cnot_counts["star4"] == result.cnot_counts["linear3"] - 2


def test_qpe_sweep_noiseless_matches_theory(graph):
    grid = tuple(np.arange(0.0, 9.0) * (math.pi / 16.0))
    cfg = ExperimentConfig(calibration=noiseless_20q(), graph=graph, shots=4000, seed=21,
                           geometries=("linear3",), phi_grid=grid)
    result = run_qpe_phase_sweep(cfg)
    table = result.tables["linear3"]
    for row in table.rows:
        theory = row.extras["theoretical"]
        sigma = math.sqrt(max(theory * (1 - theory), 1e-9) / 4000)
        assert abs(row.f1 - theory) <= 5 * sigma


def test_qpe_sweep_grid_and_nearest_phase():
    grid = default_phi_grid()
    assert len(grid) == 33
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(2 * math.pi)
    assert nearest_perfect_phase(0.0) == 0
    assert nearest_perfect_phase(math.pi / 4 + 0.01) == 1
    assert nearest_perfect_phase(2 * math.pi) == 0


def test_qpe_theoretical_dips_to_041():
    from nisq_lab.fitting import theoretical_qpe_distribution

    grid = default_phi_grid()
    halfway = [g for g in grid if abs((g / (math.pi / 8)) % 2 - 1) < 1e-9]
    assert halfway
    for phi in halfway:
        assert max(theoretical_qpe_distribution(phi)) == pytest.approx(0.4105, abs=1e-3)


def test_experiment_config_validation(default_cal):
    with pytest.raises(ValueError):
        ExperimentConfig(calibration=default_cal, shots=0)
    with pytest.raises(ValueError):
        ExperimentConfig(calibration=default_cal, dt_grid_us=())
    with pytest.raises(ValueError):
        ExperimentConfig(calibration=default_cal, dt_grid_us=(5.0, 1.0))
