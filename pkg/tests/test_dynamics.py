"""Integrator and probe-simulation tests.

The Rabi and heating oracles are closed forms: P(t) = sin^2(pi f t) for a
resonant two-level pair, d<N>/dt = n_dot for the a/a-dagger pair of collapse
operators, and the exact thermal red/blue ratio n_bar/(n_bar+1).
"""

import numpy as np
import pytest

from sbcool import (
    FlopResult,
    HeatingChannel,
    IntegratorConfig,
    LindbladModel,
    ScanResult,
    SidebandProbe,
    TruncationError,
    effective_two_level_hamiltonian,
    evolve_lindblad,
    evolve_unitary,
    heating_collapse_ops,
    mean_phonon,
    sideband_probability,
    sideband_scan_probability,
    simulate_flop,
    simulate_scan,
    thermal_density,
    thermal_distribution,
    two_level_space,
)

ETA = 6.442436053e-03
F1 = 394.2770864  # eta * 61.2 kHz


def resonant_probe(sideband="blue", model="effective") -> SidebandProbe:
    return SidebandProbe(sideband=sideband, model=model)


def test_unitary_matches_lindblad_without_collapse():
    space = two_level_space(6)
    h = effective_two_level_hamiltonian(ETA, 61.2e3, 426.7e3, 426.7e3, space,
                                        sideband="blue")
    rho0 = thermal_density(0.0, space)
    times = np.linspace(1e-4, 2e-3, 7)
    li = evolve_lindblad(LindbladModel(h, ()), rho0, times, IntegratorConfig())
    un = evolve_unitary(h, rho0, times)
    for a, b in zip(li, un):
        assert np.max(np.abs(a.matrix - b.matrix)) < 1e-7


def test_vacuum_blue_flop_is_rabi_oracle():
    times = np.linspace(0.0, 3e-3, 25)
    r = simulate_flop(resonant_probe("blue"), times, 0.0)
    assert np.max(np.abs(r.p_f1 - np.sin(np.pi * F1 * times) ** 2)) < 1e-6


def test_vacuum_red_flop_is_dark():
    times = np.linspace(0.0, 3e-3, 9)
    r = simulate_flop(resonant_probe("red"), times, 0.0)
    assert np.max(r.p_f1) < 1e-10


def test_fixed_step_matches_adaptive():
    times = np.linspace(0.0, 1.5e-3, 7)
    cfg = IntegratorConfig(method="fixed_step_rk4", max_step_s=5e-7)
    a = simulate_flop(resonant_probe("blue"), times, 0.13, cfg=cfg)
    b = simulate_flop(resonant_probe("blue"), times, 0.13)
    assert np.max(np.abs(a.p_f1 - b.p_f1)) < 1e-6


def test_heating_rate_exact_on_vacuum_and_thermal():
    space = two_level_space(40)
    h = effective_two_level_hamiltonian(ETA, 0.0, 426.7e3, -426.7e3, space)
    ops = tuple(heating_collapse_ops(HeatingChannel(41.0), space))
    model = LindbladModel(h, ops)
    for nbar0 in (0.0, 0.5):
        rho0 = thermal_density(nbar0, space)
        states = evolve_lindblad(model, rho0, [5e-3, 10e-3], IntegratorConfig())
        assert mean_phonon(states[0]) == pytest.approx(nbar0 + 41.0 * 5e-3, rel=1e-6)
        assert mean_phonon(states[1]) == pytest.approx(nbar0 + 41.0 * 10e-3, rel=1e-6)
        drift = abs(float(np.real(np.trace(states[1].matrix))) - 1.0)
        assert drift < 1e-8


def test_four_level_matches_effective_within_two_percent():
    times = np.linspace(0.0, 1.27e-3, 9)
    a = simulate_flop(resonant_probe("blue", "effective"), times, 0.0, n_max=6)
    b = simulate_flop(resonant_probe("blue", "full_dressed"), times, 0.0, n_max=6)
    # compare pointwise against the flop amplitude
    assert np.max(np.abs(a.p_f1 - b.p_f1)) < 0.02


def test_flop_matches_closed_form_with_thermal_state():
    times = np.linspace(0.0, 4e-3, 17)
    for nbar in (0.13, 1.0):
        r = simulate_flop(resonant_probe("blue"), times, nbar)
        ana = sideband_probability(times, "blue", nbar, F1)
        assert np.max(np.abs(r.p_f1 - ana)) < 1e-5


def test_scan_matches_closed_form():
    nu = 426.7e3
    grid = np.linspace(-nu - 1500.0, -nu + 1500.0, 11)
    scan = simulate_scan(resonant_probe("red"), grid, 1.27e-3, 0.13)
    ana = sideband_scan_probability(grid, "red", 0.13, F1, nu, 1.27e-3)
    assert np.max(np.abs(scan.p_f1 - ana)) < 1e-5


def test_thermal_ratio_identity_on_resonance():
    nbar = 0.13
    q = nbar / (nbar + 1.0)
    for t in (0.4e-3, 1.27e-3):
        red = simulate_flop(resonant_probe("red"), [t], nbar)
        blue = simulate_flop(resonant_probe("blue"), [t], nbar)
        assert red.p_f1[-1] / blue.p_f1[-1] == pytest.approx(q, rel=1e-5)


def test_scan_parallel_matches_serial():
    nu = 426.7e3
    grid = np.linspace(nu - 1000.0, nu + 1000.0, 6)
    a = simulate_scan(resonant_probe("blue"), grid, 0.8e-3, 0.2, jobs=1)
    b = simulate_scan(resonant_probe("blue"), grid, 0.8e-3, 0.2, jobs=2)
    assert np.array_equal(a.x, b.x)
    assert np.max(np.abs(a.p_f1 - b.p_f1)) < 1e-12


def test_truncation_guard_trips_when_space_too_small():
    times = [0.0, 20e-3]
    with pytest.raises(TruncationError):
        simulate_flop(resonant_probe("blue"), times, 2.0,
                      heating=HeatingChannel(500.0), n_max=8)


def test_heating_collapse_ops_scaling():
    space = two_level_space(5)
    up, down = heating_collapse_ops(HeatingChannel(41.0), space)
    # matrix elements sqrt(n_dot) * sqrt(n)
    i1 = space.index("0'", 1)
    i0 = space.index("0'", 0)
    assert abs(up.matrix[i1, i0]) == pytest.approx(np.sqrt(41.0), rel=1e-12)
    assert abs(down.matrix[i0, i1]) == pytest.approx(np.sqrt(41.0), rel=1e-12)
    for op in heating_collapse_ops(HeatingChannel(0.0), space):
        assert np.abs(op.matrix).max() == 0.0


def test_result_containers_validate():
    with pytest.raises(ValueError):
        FlopResult(np.array([0.0, 0.0]), np.array([0.1, 0.2]))  # not increasing
    with pytest.raises(ValueError):
        ScanResult(np.array([1.0]), np.array([0.1, 0.2]))  # length mismatch
    r = FlopResult(np.array([0.0, 1.0]), np.array([-1e-12, 1.0 + 1e-12]))
    assert r.p_f1.min() >= 0.0 and r.p_f1.max() <= 1.0


def test_probe_resonance_and_rabi_properties():
    p = SidebandProbe(sideband="red")
    assert p.resonance_hz() == pytest.approx(-426.7e3)
    assert p.eta_eff == pytest.approx(ETA, rel=1e-6)
    assert p.effective_sideband_rabi_hz == pytest.approx(F1, rel=1e-6)
    q = SidebandProbe(sideband="blue", sideband_rabi_hz=350.0)
    assert q.resonance_hz() == pytest.approx(426.7e3)
    assert q.effective_sideband_rabi_hz == pytest.approx(350.0)
    # override rescales the carrier consistently
    assert q.effective_carrier_rabi_hz * q.eta_eff == pytest.approx(350.0, rel=1e-9)
